"""Hyperexponential normal form and exact zero testing.

An expression built from rational functions of the base variables,
``exp``, ``log``, rational powers and opaque heads is written as

    sum_k  R_k * exp(A_k) * prod_j p_j^(e_kj)

where the ``R_k`` are rational in the base variables plus one fresh symbol
per opaque atom (logarithms of irreducible polynomials, unevaluated
integrals, other function heads), the ``A_k`` are rational exponents with
no constant term and the ``e_kj`` are fractional exponents in (0, 1) on
monic irreducible polynomials.  Distinct keys are treated as independent,
so "all ``R_k`` vanish" is a sound (if not complete) zero test: it never
certifies a nonzero expression.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import sympy as sp

from ..errors import NotRationalError
from .poly import MultiPoly
from .ratfunc import RatFunc


@dataclass
class _Atoms:
    """Fresh symbols standing for opaque sub-expressions."""

    variables: tuple
    table: dict = field(default_factory=dict)  # key -> symbol
    origin: dict = field(default_factory=dict)  # symbol -> expression

    def symbol(self, key, expr) -> sp.Symbol:
        if key not in self.table:
            sym = sp.Symbol(f"_a{len(self.table)}")
            self.table[key] = sym
            self.origin[sym] = expr
        return self.table[key]

    @property
    def all_variables(self) -> tuple:
        return self.variables + tuple(self.table.values())


_ONE_KEY = (None, frozenset())


def _key(exp_arg, fracs: dict):
    return (exp_arg, frozenset((p, e) for p, e in fracs.items() if e))


class NormalForm:
    """Map key -> coefficient expression (rational in variables and atoms)."""

    def __init__(self, terms=None):
        self.terms = dict(terms or {})

    @classmethod
    def scalar(cls, e) -> "NormalForm":
        return cls({_ONE_KEY: sp.sympify(e)})

    def add(self, other: "NormalForm") -> "NormalForm":
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, 0) + v
        return NormalForm(out)

    def mul(self, other: "NormalForm", conv: "_Converter") -> "NormalForm":
        out: dict = {}
        for k1, v1 in self.terms.items():
            for k2, v2 in other.terms.items():
                key, carry = conv.combine(k1, k2)
                out[key] = out.get(key, 0) + v1 * v2 * carry
        return NormalForm(out)

    def is_single(self) -> bool:
        return len(self.terms) == 1

    def is_plain(self) -> bool:
        return set(self.terms) <= {_ONE_KEY}

    def plain(self) -> sp.Expr:
        return self.terms.get(_ONE_KEY, sp.Integer(0))


class _Converter:
    def __init__(self, variables: Sequence[sp.Symbol]):
        self.variables = tuple(variables)
        self.atoms = _Atoms(self.variables)

    # keys ------------------------------------------------------------------
    def combine(self, k1, k2):
        a1, f1 = k1
        a2, f2 = k2
        if a1 is None:
            arg = a2
        elif a2 is None:
            arg = a1
        else:
            arg = a1 + a2
            if arg.is_zero():
                arg = None
        fr = dict(f1)
        carry = sp.Integer(1)
        for p, e in f2:
            total = fr.get(p, Fraction(0)) + e
            whole = total.numerator // total.denominator
            if whole:
                carry *= p.as_expr() ** whole
            fr[p] = total - whole
        return _key(arg, fr), carry

    def _ratfunc(self, e) -> RatFunc | None:
        try:
            return RatFunc.from_expr(e, self.variables)
        except Exception:
            return None

    def _is_rational(self, e) -> bool:
        return all(s in self.variables for s in e.free_symbols) and not e.has(
            sp.Function, sp.Integral, sp.E, sp.pi) and all(
            p.exp.is_Integer for p in e.atoms(sp.Pow))

    # conversion ------------------------------------------------------------
    def convert(self, e) -> NormalForm:
        e = sp.sympify(e)
        if self._is_rational(e):
            return NormalForm.scalar(e)
        if e.is_Add:
            out = NormalForm()
            for a in e.args:
                out = out.add(self.convert(a))
            return out
        if e.is_Mul:
            out = NormalForm.scalar(1)
            for a in e.args:
                out = out.mul(self.convert(a), self)
            return out
        if e.is_Pow:
            return self._pow(e)
        if isinstance(e, sp.exp) or e == sp.E:
            return self._exp(e.args[0] if isinstance(e, sp.exp) else sp.Integer(1), e)
        if isinstance(e, sp.log):
            return self._log(e)
        if e.is_Symbol and e not in self.variables:
            return NormalForm.scalar(self.atoms.symbol(("sym", e), e))
        if e.is_number and not e.has(sp.E, sp.pi) and e.is_Number:
            return NormalForm.scalar(e)
        return NormalForm.scalar(self.atoms.symbol(("head", e), e))

    def _pow(self, e) -> NormalForm:
        base, ex = e.args
        if ex.is_Integer:
            nb = self.convert(base)
            n = int(ex)
            if n >= 0:
                out = NormalForm.scalar(1)
                for _ in range(n):
                    out = out.mul(nb, self)
                return out
            if nb.is_single():
                ((key, coeff),) = nb.terms.items()
                inv_key, carry = self._invert_key(key)
                return self._power_single(inv_key, carry / coeff, -n)
            return NormalForm.scalar(self.atoms.symbol(("head", e), e))
        if ex.is_Rational and self._is_rational(base):
            return self._fractional_power(base, Fraction(int(ex.p), int(ex.q)), e)
        if base == sp.E:
            return self._exp(ex, e)
        if self._is_rational(ex) and not ex.free_symbols and base.is_number:
            return NormalForm.scalar(self.atoms.symbol(("head", e), e))
        # b^a = exp(a log b) for non-constant exponents
        return self.convert(sp.exp(ex * sp.log(base)))

    def _power_single(self, key, coeff, n: int) -> NormalForm:
        base = NormalForm({key: coeff})
        out = NormalForm.scalar(1)
        for _ in range(n):
            out = out.mul(base, self)
        return out

    def _invert_key(self, key):
        arg, fr = key
        new_arg = None
        if arg is not None:
            new_arg = -arg
        carry = sp.Integer(1)
        new_fr = {}
        for p, e in fr:
            # p^-e = p^(1-e) / p
            new_fr[p] = 1 - e
            carry /= p.as_expr()
        return _key(new_arg, new_fr), carry

    def _fractional_power(self, base, ex: Fraction, e) -> NormalForm:
        R = self._ratfunc(base)
        if R is None or R.is_zero():
            return NormalForm.scalar(self.atoms.symbol(("head", e), e))
        coeff = sp.Integer(1)
        fr: dict = {}
        for poly, sign in ((R.num, 1), (R.den, -1)):
            unit, facs = poly.factor()
            if sign == 1:
                c = sp.sympify(unit.x) + sp.I * sp.sympify(unit.y) if hasattr(unit, "x") else sp.sympify(unit)
                if c != 1:
                    coeff *= self.atoms.symbol(("const", c, ex), sp.Pow(c, sp.Rational(ex.numerator, ex.denominator)))
            for p, m in facs:
                total = ex * m * sign + fr.get(p, Fraction(0))
                whole = total.numerator // total.denominator
                if whole:
                    coeff *= p.as_expr() ** whole
                fr[p] = total - whole
        return NormalForm({_key(None, fr): coeff})

    def _exp(self, arg, e) -> NormalForm:
        na = self.convert(arg)
        if not na.is_plain():
            return NormalForm.scalar(self.atoms.symbol(("head", e), e))
        a = sp.expand(na.plain())
        # pull out c*log-atoms with constant c: exp(c log p) = p^c
        out = NormalForm.scalar(1)
        rest = sp.Integer(0)
        for term in sp.Add.make_args(a):
            c, syms = term.as_independent(*self.atoms.all_variables)
            origin = self.atoms.origin.get(syms)
            if origin is not None and isinstance(origin, sp.log) and c.is_Rational:
                out = out.mul(self.convert(sp.Pow(origin.args[0], c)), self)
            else:
                rest += term
        if not rest.free_symbols <= set(self.variables):
            return NormalForm.scalar(self.atoms.symbol(("head", e), e))
        R = self._ratfunc(rest)
        if R is None:
            return NormalForm.scalar(self.atoms.symbol(("head", e), e))
        const = sp.Integer(0)
        if R.den.is_constant():
            c0 = R.num.terms.get((0,) * len(self.variables))
            if c0 is not None:
                const = (sp.sympify(c0.x) + sp.I * sp.sympify(c0.y)) / R.den.as_expr()
                R = R - RatFunc(MultiPoly.constant(c0, self.variables), R.den)
        piece = NormalForm({_key(None if R.is_zero() else R, {}): sp.Integer(1)})
        if const != 0:
            piece = NormalForm({k: v * self.atoms.symbol(("exp", const), sp.exp(const))
                                for k, v in piece.terms.items()})
        return out.mul(piece, self)

    def _log(self, e) -> NormalForm:
        arg = e.args[0]
        if not self._is_rational(arg):
            return NormalForm.scalar(self.atoms.symbol(("head", e), e))
        R = self._ratfunc(arg)
        if R is None or R.is_zero():
            return NormalForm.scalar(self.atoms.symbol(("head", e), e))
        total = sp.Integer(0)
        for poly, sign in ((R.num, 1), (R.den, -1)):
            unit, facs = poly.factor()
            if sign == 1:
                c = sp.sympify(unit.x) + sp.I * sp.sympify(unit.y)
                if c != 1:
                    total += self.atoms.symbol(("logc", c), sp.log(c))
            for p, m in facs:
                total += sign * m * self.atoms.symbol(("log", p), sp.log(p.as_expr()))
        return NormalForm.scalar(total)


def normal_form(e, variables: Sequence[sp.Symbol]) -> tuple:
    """Return (NormalForm, converter) for ``e``; coefficients are sympy expressions."""
    conv = _Converter(variables)
    return conv.convert(e), conv


def is_identically_zero(e, variables: Sequence[sp.Symbol]) -> bool:
    """Exact (sound) zero test for expressions over the base variables."""
    nf, conv = normal_form(e, variables)
    allv = conv.atoms.all_variables
    for coeff in nf.terms.values():
        try:
            if not RatFunc.from_expr(coeff, allv).is_zero():
                return False
        except Exception as exc:  # pragma: no cover - defensive
            raise NotRationalError(f"cannot canonicalize coefficient {coeff}") from exc
    return True


def nonzero_numerators(e, variables: Sequence[sp.Symbol]) -> list:
    """Numerators (in variables + atom symbols) of the non-vanishing components."""
    nf, conv = normal_form(e, variables)
    allv = conv.atoms.all_variables
    out = []
    for coeff in nf.terms.values():
        R = RatFunc.from_expr(coeff, allv)
        if not R.is_zero():
            out.append(R.num)
    return out
