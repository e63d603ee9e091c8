"""Rational integration with logarithmic parts, and the iterated integral
that rebuilds a first integral I from an integrating pair (r, s).

``integrate_rational`` treats the integrand as a univariate rational
function of the integration variable whose coefficients are rational in the
remaining variables.  Hermite reduction gives the rational part; each
irreducible denominator factor p contributes c*log(p) when the residue
c is the same at every root of p (always the case for factors linear in the
variable).  Otherwise that piece is kept as an unevaluated ``Integral``.

Results are :class:`LogSum` values: rational part + sum c_k log(p_k) +
unevaluated integrals, closed under partial differentiation.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import sympy as sp

from .algebra.poly import BASE_VARS, U, X, Y, MultiPoly, sort_key
from .algebra.ratfunc import RatFunc
from .errors import NonElementaryResidual

log = logging.getLogger(__name__)


# -- univariate polynomials over the rational functions in the other variables --


def _rf_const(value, variables) -> RatFunc:
    return RatFunc(MultiPoly.constant(value, variables))


class _UPoly:
    """Polynomial in one variable with RatFunc coefficients (index = degree)."""

    __slots__ = ("c", "variables")

    def __init__(self, coeffs, variables):
        coeffs = list(coeffs)
        while coeffs and coeffs[-1].is_zero():
            coeffs.pop()
        self.c = coeffs
        self.variables = variables

    @classmethod
    def from_poly(cls, p: MultiPoly, v: sp.Symbol) -> "_UPoly":
        idx = p.variables.index(v)
        groups: dict = {}
        for mon, coeff in p.terms.items():
            k = mon[idx]
            key = mon[:idx] + (0,) + mon[idx + 1:]
            groups.setdefault(k, {})[key] = coeff
        deg = max(groups, default=-1)
        coeffs = []
        for k in range(deg + 1):
            terms = groups.get(k)
            poly = MultiPoly.from_terms(terms, p.variables) if terms else MultiPoly.constant(0, p.variables)
            coeffs.append(RatFunc(poly))
        return cls(coeffs, p.variables)

    def to_ratfunc(self, v: sp.Symbol) -> RatFunc:
        out = _rf_const(0, self.variables)
        vpoly = RatFunc(MultiPoly.var(v, self.variables))
        power = _rf_const(1, self.variables)
        for coeff in self.c:
            if not coeff.is_zero():
                out = out + coeff * power
            power = power * vpoly
        return out

    @property
    def deg(self) -> int:
        return len(self.c) - 1

    def is_zero(self) -> bool:
        return not self.c

    def lc(self) -> RatFunc:
        return self.c[-1]

    def _zero(self):
        return _rf_const(0, self.variables)

    def __add__(self, other: "_UPoly") -> "_UPoly":
        n = max(len(self.c), len(other.c))
        z = self._zero()
        return _UPoly([(self.c[k] if k < len(self.c) else z) + (other.c[k] if k < len(other.c) else z)
                       for k in range(n)], self.variables)

    def __neg__(self) -> "_UPoly":
        return _UPoly([-a for a in self.c], self.variables)

    def __sub__(self, other: "_UPoly") -> "_UPoly":
        return self + (-other)

    def __mul__(self, other) -> "_UPoly":
        if isinstance(other, RatFunc):
            return _UPoly([a * other for a in self.c], self.variables)
        if self.is_zero() or other.is_zero():
            return _UPoly([], self.variables)
        out = [self._zero() for _ in range(len(self.c) + len(other.c) - 1)]
        for i, a in enumerate(self.c):
            if a.is_zero():
                continue
            for j, b in enumerate(other.c):
                if not b.is_zero():
                    out[i + j] = out[i + j] + a * b
        return _UPoly(out, self.variables)

    def __pow__(self, n: int) -> "_UPoly":
        out = _UPoly([_rf_const(1, self.variables)], self.variables)
        for _ in range(n):
            out = out * self
        return out

    def divmod(self, other: "_UPoly"):
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        q = [self._zero() for _ in range(max(self.deg - other.deg + 1, 0))]
        r = _UPoly(self.c, self.variables)
        lc = other.lc()
        while not r.is_zero() and r.deg >= other.deg:
            k = r.deg - other.deg
            coeff = r.lc() / lc
            q[k] = coeff
            shifted = _UPoly([self._zero()] * k + [a * coeff for a in other.c], self.variables)
            r = r - shifted
        return _UPoly(q, self.variables), r

    def deriv(self) -> "_UPoly":
        return _UPoly([a * _rf_const(k, self.variables) for k, a in enumerate(self.c)][1:], self.variables)


def _gcdex(a: _UPoly, b: _UPoly):
    """(s, t, g) with s*a + t*b = g = gcd(a, b), g monic."""
    one = _UPoly([_rf_const(1, a.variables)], a.variables)
    zero = _UPoly([], a.variables)
    r0, r1, s0, s1, t0, t1 = a, b, one, zero, zero, one
    while not r1.is_zero():
        q, r = r0.divmod(r1)
        r0, r1 = r1, r
        s0, s1 = s1, s0 - q * s1
        t0, t1 = t1, t0 - q * t1
    inv = _rf_const(1, a.variables) / r0.lc()
    return s0 * inv, t0 * inv, r0 * inv


# -- LogSum ---------------------------------------------------------------------


@dataclass
class LogSum:
    """rational + sum(c * log(p)) + sum(Integral(phi, v))."""

    variables: tuple
    rational: RatFunc
    logs: dict = field(default_factory=dict)  # monic MultiPoly -> RatFunc coefficient
    integrals: list = field(default_factory=list)  # (RatFunc integrand, variable)

    @classmethod
    def zero(cls, variables=BASE_VARS) -> "LogSum":
        return cls(tuple(variables), _rf_const(0, tuple(variables)))

    def __add__(self, other: "LogSum") -> "LogSum":
        logs = dict(self.logs)
        for p, c in other.logs.items():
            logs[p] = logs[p] + c if p in logs else c
        logs = {p: c for p, c in logs.items() if not c.is_zero()}
        return LogSum(self.variables, self.rational + other.rational, logs,
                      self.integrals + other.integrals)

    def __neg__(self) -> "LogSum":
        return LogSum(self.variables, -self.rational, {p: -c for p, c in self.logs.items()},
                      [(-phi, v) for phi, v in self.integrals])

    def __sub__(self, other: "LogSum") -> "LogSum":
        return self + (-other)

    def diff(self, v: sp.Symbol) -> "LogSum":
        rational = self.rational.diff(v)
        logs = {}
        for p, c in self.logs.items():
            dp = p.diff(v)
            if not dp.is_zero():
                rational = rational + c * RatFunc(dp, p)
            dc = c.diff(v)
            if not dc.is_zero():
                logs[p] = dc
        for phi, w in self.integrals:
            if w == v:
                rational = rational + phi
            elif v in phi.num.free_variables() | phi.den.free_variables():
                raise NonElementaryResidual(
                    f"unevaluated integral over {w} depends on {v}; its derivative cannot be certified")
        return LogSum(self.variables, rational, logs, [])

    def depends_on(self, v: sp.Symbol) -> bool:
        def uses(R):
            return v in R.num.free_variables() | R.den.free_variables()
        return (uses(self.rational) or any(uses(c) or v in p.free_variables() for p, c in self.logs.items())
                or any(w == v or uses(phi) for phi, w in self.integrals))

    def is_rational(self) -> bool:
        return not self.logs and not self.integrals

    def as_expr(self) -> sp.Expr:
        out = self.rational.as_expr()
        for p in sorted(self.logs, key=sort_key):
            out += self.logs[p].as_expr() * sp.log(p.as_expr())
        for phi, v in self.integrals:
            out += sp.Integral(phi.as_expr(), v)
        return out


# -- integration ----------------------------------------------------------------


def _split_denominator(den: MultiPoly, v: sp.Symbol, hints: Sequence[MultiPoly]):
    """den = content * prod(p^m): return (content free of v, [(p, m)])."""
    rest = den
    factors = []
    for hint in hints:
        hint = hint.with_variables(den.variables).monic()
        if hint.is_constant() or v not in hint.free_variables():
            continue
        m = 0
        while True:
            try:
                q = rest.exact_div(hint)
            except Exception:
                break
            rest, m = q, m + 1
        if m:
            factors.append((hint, m))
    content = MultiPoly.constant(1, den.variables)
    if not rest.is_constant():
        unit, facs = rest.factor()
        content = content * MultiPoly.constant(unit, den.variables)
        for p, m in facs:
            if v in p.free_variables():
                factors.append((p, m))
            else:
                content = content * p ** m
    else:
        content = rest
    merged: dict = {}
    for p, m in factors:
        merged[p] = merged.get(p, 0) + m
    return content, sorted(merged.items(), key=lambda pm: sort_key(pm[0]))


def _integrate_poly(a: _UPoly, v: sp.Symbol) -> RatFunc:
    out = _UPoly([_rf_const(0, a.variables)] + [c * _rf_const(sp.Rational(1, k + 1), a.variables)
                                                for k, c in enumerate(a.c)], a.variables)
    return out.to_ratfunc(v)


def integrate_rational_parts(e: RatFunc, v: sp.Symbol, hints: Sequence[MultiPoly] = ()) -> LogSum:
    """Antiderivative of a rational function in ``v`` as a :class:`LogSum`."""
    variables = e.variables
    result = LogSum.zero(variables)
    if e.is_zero():
        return result
    if v not in e.den.free_variables():
        a = _UPoly.from_poly(e.num, v) * RatFunc(MultiPoly.constant(1, variables), e.den)
        return LogSum(variables, _integrate_poly(a, v))
    content, factors = _split_denominator(e.den, v, hints)
    a = _UPoly.from_poly(e.num, v) * RatFunc(MultiPoly.constant(1, variables), content)
    parts = [(_UPoly.from_poly(p, v), m, p) for p, m in factors]
    D = _UPoly([_rf_const(1, variables)], variables)
    for P, m, _p in parts:
        D = D * P ** m
    q, a = a.divmod(D)
    rational = _integrate_poly(q, v)
    logs: dict = {}
    integrals: list = []
    for j, (P, m, p) in enumerate(parts):
        Dj = P ** m
        Ej = _UPoly([_rf_const(1, variables)], variables)
        for k, (P2, m2, _p2) in enumerate(parts):
            if k != j:
                Ej = Ej * P2 ** m2
        s, _t, g = _gcdex(Ej, Dj)
        aj = (a * s).divmod(Dj)[1]
        rj, lj, ij = _reduce_factor(aj, P, m, p, v)
        rational = rational + rj
        for key, c in lj.items():
            logs[key] = logs[key] + c if key in logs else c
        integrals.extend(ij)
    logs = {p: c for p, c in logs.items() if not c.is_zero()}
    return LogSum(variables, rational, logs, integrals)


def _reduce_factor(a: _UPoly, P: _UPoly, m: int, p: MultiPoly, v: sp.Symbol):
    """Integrate a / P^m with deg a < m deg P: Hermite steps, then the log part."""
    variables = a.variables
    rational = _rf_const(0, variables)
    dP = P.deriv()
    sigma, tau, _g = _gcdex(P, dP)
    while m > 1 and not a.is_zero():
        t = (a * tau).divmod(P)[1]
        s = (a - t * dP).divmod(P)[0]
        k = _rf_const(m - 1, variables)
        denom = (P ** (m - 1)).to_ratfunc(v) * k
        rational = rational - t.to_ratfunc(v) / denom
        a = s + t.deriv() * (_rf_const(1, variables) / k)
        m -= 1
    logs: dict = {}
    integrals: list = []
    if a.is_zero():
        return rational, logs, integrals
    if m > 1:  # numerator vanished early
        return rational, logs, integrals
    q, a = a.divmod(P)
    if not q.is_zero():
        rational = rational + _integrate_poly(q, v)
    if a.is_zero():
        return rational, logs, integrals
    if P.deg == 1:
        logs[p] = a.c[0] / P.lc()
        return rational, logs, integrals
    if a.deg == dP.deg:
        c = a.lc() / dP.lc()
        if (a - dP * c).is_zero():
            logs[p] = c
            return rational, logs, integrals
    integrals.append((a.to_ratfunc(v) / P.to_ratfunc(v), v))
    return rational, logs, integrals


def integrate_rational(e: RatFunc, v: sp.Symbol, hints: Sequence[MultiPoly] = ()) -> sp.Expr:
    """Antiderivative of ``e`` in ``v`` as a sympy expression."""
    return integrate_rational_parts(e, v, hints).as_expr()


# -- iterated integral ------------------------------------------------------------


@dataclass(frozen=True)
class RSPair:
    """Integrating pair: dI = r (g dx - f dy) + s (h dx - f du)."""

    r: RatFunc
    s: RatFunc


@dataclass
class FirstIntegral:
    value: sp.Expr
    provenance: str
    parts: LogSum | None = None

    def __str__(self):
        return str(self.value)


def _as_rational(ls: LogSum, stage: str, forbidden: Sequence[sp.Symbol]) -> RatFunc:
    if ls.integrals:
        raise NonElementaryResidual(f"{stage}: an unevaluated integral survives")
    if ls.logs:
        raise NonElementaryResidual(f"{stage}: logarithmic terms with non-constant coefficients survive")
    for w in forbidden:
        if ls.depends_on(w):
            raise NonElementaryResidual(f"{stage}: integrand still depends on {w}; (r, s) is not compatible")
    return ls.rational


def iterated_integral(rs: RSPair, system, hints: Sequence[MultiPoly] = ()) -> FirstIntegral:
    """I = int(-rg - sh) dx + int(rf - d_y[...]) dy + int(sf - d_u[...]) du."""
    f, g, h = (RatFunc(p) for p in system.components())
    r, s = rs.r, rs.s
    if r.is_zero() and s.is_zero():
        raise NonElementaryResidual("r = s = 0 gives only a constant")
    A1 = integrate_rational_parts(-(r * g) - s * h, X, hints)
    B = LogSum(A1.variables, r * f) - A1.diff(Y)
    A2 = integrate_rational_parts(_as_rational(B, "second quadrature", (X,)), Y, hints)
    C = LogSum(A1.variables, s * f) - (A1 + A2).diff(U)
    A3 = integrate_rational_parts(_as_rational(C, "third quadrature", (X, Y)), U, hints)
    total = A1 + A2 + A3
    return FirstIntegral(total.as_expr(), "prelle-singer", total)


def leaf_integral(R: RatFunc, system, hints: Sequence[MultiPoly] = ()) -> FirstIntegral:
    """First integral of dy/dx = g/f when u is a known function of x alone.

    ``R`` is an integrating factor: I_y = R f and dI/dx = -R g, where d/dx is
    the total derivative with du/dx = h/f.  The x-quadrature may leave an
    unevaluated integral of a function of x (written through the original
    elementary function), which is differentiated formally downstream.
    """
    f, g, h = (RatFunc(p) for p in system.components())
    A1 = integrate_rational_parts(R * f, Y, hints)
    du_dx = h / f
    dA1 = A1.diff(X)
    if A1.depends_on(U):
        dA1 = dA1 + _scale(A1.diff(U), du_dx)
    B = LogSum(A1.variables, -(R * g)) - dA1
    phi = _as_rational(B, "x quadrature", (Y,))
    if U not in phi.num.free_variables() | phi.den.free_variables():
        A2 = integrate_rational_parts(phi, X, hints)
        total = A1 + A2
        return FirstIntegral(total.as_expr(), "prelle-singer (leaf)", total)
    # split off the u-free part of a polynomial-in-u numerator over a u-free denominator
    rational_part = _rf_const(0, phi.variables)
    rest = phi
    if U not in phi.den.free_variables():
        up = _UPoly.from_poly(phi.num, U)
        inv_den = RatFunc(MultiPoly.constant(1, phi.variables), phi.den)
        rational_part = up.c[0] * inv_den
        rest = phi - rational_part
    A2 = integrate_rational_parts(rational_part, X, hints)
    node = sp.Integral(system.record.back_substitute(rest.as_expr()), X)
    value = (A1 + A2).as_expr() + node
    return FirstIntegral(value, "prelle-singer (leaf)", None)


def _scale(ls: LogSum, c: RatFunc) -> LogSum:
    if ls.integrals:
        raise NonElementaryResidual("cannot rescale an unevaluated integral")
    return LogSum(ls.variables, ls.rational * c, {p: k * c for p, k in ls.logs.items()}, [])
