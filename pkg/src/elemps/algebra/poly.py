"""Sparse multivariate polynomials over the Gaussian rationals.

Thin immutable wrapper around sympy's sparse ``PolyElement``.  Every ring
uses graded-lex order, which fixes the "canonical leading coefficient"
used for monic normalization throughout the package.
"""
from __future__ import annotations

from functools import lru_cache
from typing import Iterable, Mapping, Sequence

import sympy as sp
from sympy import QQ_I
from sympy.polys.orderings import grlex
from sympy.polys.rings import PolyElement, PolyRing

from ..errors import DivisionError, VariableError
from . import gaussian

X, Y, U = sp.symbols("x y u")
BASE_VARS = (X, Y, U)

GaussRat = QQ_I.dtype


def gauss(re, im=0) -> GaussRat:
    """Build a Gaussian rational from two rationals (ints, Fractions, strings)."""
    return QQ_I(sp.Rational(re), sp.Rational(im)) if not isinstance(re, GaussRat) else re


def to_gauss(value) -> GaussRat:
    if isinstance(value, GaussRat):
        return value
    return QQ_I.from_sympy(sp.nsimplify(value) if isinstance(value, float) else sp.sympify(value))


@lru_cache(maxsize=None)
def poly_ring(variables: tuple) -> PolyRing:
    return PolyRing(variables, QQ_I, grlex)


class MultiPoly:
    """Polynomial in an ordered tuple of sympy symbols with QQ(i) coefficients."""

    __slots__ = ("_p",)

    def __init__(self, element: PolyElement):
        self._p = element

    # construction ---------------------------------------------------------
    @classmethod
    def from_expr(cls, expr, variables: Sequence[sp.Symbol] = BASE_VARS) -> "MultiPoly":
        ring = poly_ring(tuple(variables))
        expr = sp.expand(sp.sympify(expr))
        try:
            return cls(ring.from_expr(expr))
        except (ValueError, sp.polys.polyerrors.CoercionFailed) as exc:
            raise VariableError(f"{expr} is not a polynomial in {tuple(variables)}") from exc

    @classmethod
    def from_terms(cls, terms: Mapping[tuple, object], variables: Sequence[sp.Symbol] = BASE_VARS):
        ring = poly_ring(tuple(variables))
        return cls(ring.from_dict({k: to_gauss(v) for k, v in terms.items()}))

    @classmethod
    def constant(cls, value, variables: Sequence[sp.Symbol] = BASE_VARS) -> "MultiPoly":
        return cls(poly_ring(tuple(variables))(to_gauss(value)))

    @classmethod
    def var(cls, v: sp.Symbol, variables: Sequence[sp.Symbol] = BASE_VARS) -> "MultiPoly":
        ring = poly_ring(tuple(variables))
        return cls(ring.gens[list(variables).index(v)])

    # basic views ----------------------------------------------------------
    @property
    def element(self) -> PolyElement:
        return self._p

    @property
    def ring(self) -> PolyRing:
        return self._p.ring

    @property
    def variables(self) -> tuple:
        return self._p.ring.symbols

    @property
    def terms(self) -> dict:
        return dict(self._p)

    def as_expr(self) -> sp.Expr:
        return self._p.as_expr()

    def is_zero(self) -> bool:
        return not self._p

    def is_constant(self) -> bool:
        return self._p.is_ground

    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        if not self._p:
            return -1
        return max(sum(m) for m in self._p.keys())

    def degree_in(self, v: sp.Symbol) -> int:
        return self._p.degree(self._gen(v)) if self._p else -1

    def leading_monomial(self) -> tuple:
        return self._p.LM

    def leading_coeff(self) -> GaussRat:
        return self._p.LC

    def free_variables(self) -> set:
        used = set()
        for mon in self._p.keys():
            used.update(v for v, e in zip(self.variables, mon) if e)
        return used

    def with_variables(self, variables: Sequence[sp.Symbol]) -> "MultiPoly":
        variables = tuple(variables)
        if variables == self.variables:
            return self
        return MultiPoly.from_expr(self.as_expr(), variables)

    # arithmetic -----------------------------------------------------------
    def _coerce(self, other) -> PolyElement:
        if isinstance(other, MultiPoly):
            if other.ring is not self.ring:
                return other.with_variables(self.variables)._p
            return other._p
        return self.ring(to_gauss(other))

    def __add__(self, other):
        return MultiPoly(self._p + self._coerce(other))

    __radd__ = __add__

    def __sub__(self, other):
        return MultiPoly(self._p - self._coerce(other))

    def __rsub__(self, other):
        return MultiPoly(self._coerce(other) - self._p)

    def __mul__(self, other):
        return MultiPoly(self._p * self._coerce(other))

    __rmul__ = __mul__

    def __neg__(self):
        return MultiPoly(-self._p)

    def __pow__(self, n: int):
        return MultiPoly(self._p ** n)

    def __eq__(self, other):
        if isinstance(other, MultiPoly):
            return self._p == self._coerce(other)
        try:
            return self._p == self._coerce(other)
        except Exception:
            return NotImplemented

    def __hash__(self):
        return hash((self.variables, frozenset(self._p.items())))

    def __repr__(self):
        return f"MultiPoly({self.as_expr()})"

    def __str__(self):
        return str(self.as_expr())

    def exact_div(self, other) -> "MultiPoly":
        den = self._coerce(other)
        if not den:
            raise DivisionError("division by the zero polynomial")
        q, r = self._p.div(den)
        if r:
            raise DivisionError(f"{other} does not divide {self}")
        return MultiPoly(q)

    def divides(self, other) -> bool:
        den = self._p
        if not den:
            return False
        return not self._coerce(other).rem(den)

    def gcd(self, other) -> "MultiPoly":
        return MultiPoly(gaussian.gcd(self._p, self._coerce(other)))

    def monic(self) -> "MultiPoly":
        if not self._p:
            return self
        return MultiPoly(self._p.quo_ground(self._p.LC))

    def diff(self, v: sp.Symbol) -> "MultiPoly":
        return MultiPoly(self._p.diff(self._gen(v)))

    def subs(self, values: Mapping[sp.Symbol, object]) -> "MultiPoly":
        p = self._p
        for v, val in values.items():
            gen = self._gen(v)
            p = p.subs(gen, to_gauss(val))
        return MultiPoly(p)

    def eval(self, point: Mapping[sp.Symbol, object]) -> GaussRat:
        args = [to_gauss(point[v]) for v in self.variables]
        return self._p(*args) if args else self._p.LC

    def eval_complex(self, point: Mapping[sp.Symbol, complex]) -> complex:
        total = 0j
        vals = [complex(point[v]) for v in self.variables]
        for mon, c in self._p.items():
            term = complex(float(c.x), float(c.y))
            for val, e in zip(vals, mon):
                if e:
                    term *= val ** e
            total += term
        return total

    def factor(self) -> tuple:
        """Irreducible factors over QQ(i) as (monic factor, multiplicity), plus the unit."""
        unit, facs = gaussian.factor_list(self._p)
        out = []
        for fac, mult in facs:
            lc = fac.LC
            unit = unit * lc ** mult
            out.append((MultiPoly(fac.quo_ground(lc)), mult))
        out.sort(key=lambda fm: sort_key(fm[0]))
        return unit, out

    def _gen(self, v: sp.Symbol) -> PolyElement:
        try:
            idx = self.variables.index(v)
        except ValueError:
            raise VariableError(f"{v} is not a variable of {self}") from None
        return self.ring.gens[idx]


def sort_key(p: MultiPoly):
    """Deterministic ordering: degree first, then the printed form."""
    return (p.degree(), str(p.as_expr()))


def poly_arith(a: MultiPoly, b: MultiPoly, op: str) -> MultiPoly:
    if op == "add":
        return a + b
    if op == "mul":
        return a * b
    if op == "exact_div":
        return a.exact_div(b)
    if op == "gcd":
        return a.gcd(b)
    raise ValueError(f"unknown operation {op!r}")


def poly_derivative(p: MultiPoly, v: sp.Symbol) -> MultiPoly:
    return p.diff(v)


def gcd_all(polys: Iterable[MultiPoly]) -> MultiPoly:
    polys = [p for p in polys if not p.is_zero()]
    if not polys:
        raise ValueError("gcd of zero polynomials")
    g = polys[0].monic()
    for p in polys[1:]:
        if g.is_constant():
            break
        g = g.gcd(p)
    return g


def monomials_upto(nvars: int, degree: int) -> list:
    """Exponent tuples of total degree <= degree, in descending grlex order."""
    out = []

    def rec(prefix, remaining, left):
        if left == 1:
            for e in range(remaining, -1, -1):
                out.append(prefix + (e,))
            return
        for e in range(remaining, -1, -1):
            rec(prefix + (e,), remaining - e, left - 1)

    if nvars == 0:
        return [()]
    rec((), degree, nvars)
    out = sorted(set(out), key=lambda m: (sum(m), m), reverse=True)
    return out
