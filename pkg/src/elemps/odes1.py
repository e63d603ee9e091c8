"""Small chain of classical solvers for dw/dt = R(t, w) with R rational.

Each subsolver returns G(t, w) (possibly involving parameters) that is
constant along solutions, or ``None`` when its pattern does not apply.
Every candidate is checked exactly (G_t + R G_w = 0) before it is returned.
Order: separable, linear, exact (integrating factor 1, mu(t), mu(w)),
homogeneous, Bernoulli.
"""
from __future__ import annotations

import logging
import math
from fractions import Fraction
from typing import Callable, Sequence

import sympy as sp

from .algebra.expr import partial
from .algebra.normal import is_identically_zero
from .algebra.poly import MultiPoly
from .algebra.ratfunc import RatFunc
from .errors import AssociatedUnsolved, NonElementaryResidual
from .quadrature import LogSum, integrate_rational_parts

log = logging.getLogger(__name__)


class _Problem:
    def __init__(self, rhs, t, w, params=()):
        self.t, self.w = t, w
        self.params = tuple(params)
        self.variables = (t, w) + self.params
        self.rhs = sp.sympify(rhs)
        self.R = RatFunc.from_expr(self.rhs, self.variables)

    def rf(self, e) -> RatFunc:
        return RatFunc.from_expr(e, self.variables)

    def integrate(self, e, v) -> LogSum:
        R = e if isinstance(e, RatFunc) else self.rf(e)
        return integrate_rational_parts(R, v)

    def check(self, G) -> bool:
        G = sp.sympify(G)
        if is_identically_zero(partial(G, self.w), self.variables):
            return False
        return is_identically_zero(partial(G, self.t) + self.rhs * partial(G, self.w), self.variables)


def _uses(p: MultiPoly, v) -> bool:
    return v in p.free_variables()


def _exponential(ls: LogSum, sign: int = 1):
    """exp(sign * ls) as a sympy expression; also returns the RatFunc when it is rational."""
    if ls.integrals:
        return None, None
    rational = None
    if ls.rational.is_zero() and all(_is_integer(c) for c in ls.logs.values()):
        rational = RatFunc(MultiPoly.constant(1, ls.variables))
        for p, c in ls.logs.items():
            k = int(sign * _const(c))
            rational = rational * (RatFunc(p ** k) if k >= 0 else RatFunc(MultiPoly.constant(1, p.variables), p ** -k))
        return rational.as_expr(), rational
    factors = [sp.exp(sign * ls.rational.as_expr())] if not ls.rational.is_zero() else []
    for p, c in ls.logs.items():
        factors.append(sp.Pow(p.as_expr(), sign * c.as_expr()))
    return sp.Mul(*factors), None


def _const(c: RatFunc):
    val = c.num.leading_coeff() if not c.num.is_zero() else 0
    if not c.is_polynomial() or c.num.degree() > 0:
        return None
    if val == 0:
        return Fraction(0)
    if val.y:
        return None
    return Fraction(int(val.x.numerator), int(val.x.denominator)) / _den_const(c)


def _den_const(c: RatFunc):
    lc = c.den.leading_coeff()
    return Fraction(int(lc.x.numerator), int(lc.x.denominator))


def _is_integer(c: RatFunc) -> bool:
    k = _const(c)
    return k is not None and k.denominator == 1


def exponentiate_logs(G: sp.Expr, ls: LogSum | None):
    """Replace a G of the form R + sum c log p (c rational) by exp(d G) with integral powers."""
    if ls is None or not ls.logs or ls.integrals:
        return G
    consts = [_const(c) for c in ls.logs.values()]
    if any(k is None for k in consts):
        return G
    d = 1
    for k in consts:
        d = d * k.denominator // math.gcd(d, k.denominator)
    factors = []
    for p, k in zip(ls.logs, consts):
        factors.append(p.as_expr() ** int(k * d))
    if not ls.rational.is_zero():
        factors.append(sp.exp(d * ls.rational.as_expr()))
    return sp.Mul(*factors)


# -- subsolvers ----------------------------------------------------------------


def separable(pb: _Problem):
    R = pb.R
    if R.is_zero():
        return pb.w
    a = RatFunc(MultiPoly.constant(1, pb.variables))
    b = RatFunc(MultiPoly.constant(1, pb.variables))
    for poly, sign in ((R.num, 1), (R.den, -1)):
        unit, facs = poly.factor()
        if sign == 1:
            a = a * RatFunc(MultiPoly.constant(unit, pb.variables))
        for p, m in facs:
            if _uses(p, pb.w) and _uses(p, pb.t):
                return None
            piece = RatFunc(p ** m) if sign == 1 else RatFunc(MultiPoly.constant(1, pb.variables), p ** m)
            if _uses(p, pb.w):
                b = b * piece
            else:
                a = a * piece
    if any(_uses(q, pb.t) for q in (b.num, b.den)) or any(_uses(q, pb.w) for q in (a.num, a.den)):
        return None
    inv_b = RatFunc(b.den, b.num)
    total = pb.integrate(inv_b, pb.w) - pb.integrate(a, pb.t)
    return exponentiate_logs(total.as_expr(), total)


def _linear_parts(pb: _Problem):
    R = pb.R
    if _uses(R.den, pb.w) or R.num.degree_in(pb.w) > 1:
        return None
    from .quadrature import _UPoly
    up = _UPoly.from_poly(R.num, pb.w)
    inv = RatFunc(MultiPoly.constant(1, pb.variables), R.den)
    zero = RatFunc(MultiPoly.constant(0, pb.variables))
    B = up.c[0] * inv if len(up.c) > 0 else zero
    A = up.c[1] * inv if len(up.c) > 1 else zero
    return A, B


def _solve_linear(pb: _Problem, A: RatFunc, B: RatFunc, w_expr):
    """G for w' = A w + B, written for a dependent expression ``w_expr``."""
    LA = pb.integrate(A, pb.t)
    mu, mu_rat = _exponential(LA, -1)
    if mu is None:
        return None
    if B.is_zero():
        if mu_rat is not None:
            return mu_rat.as_expr() * w_expr
        return sp.powsimp(mu * w_expr)
    if mu_rat is not None:
        rest = pb.integrate(mu_rat * B, pb.t)
        return mu_rat.as_expr() * w_expr - rest.as_expr()
    return mu * w_expr - sp.Integral(sp.powsimp(mu * B.as_expr()), pb.t)


def linear(pb: _Problem):
    parts = _linear_parts(pb)
    if parts is None:
        return None
    A, B = parts
    if A.is_zero():
        rest = pb.integrate(B, pb.t)
        return pb.w - rest.as_expr()
    return _solve_linear(pb, A, B, pb.w)


def _exact_with(pb: _Problem, P: RatFunc, Q: RatFunc):
    """G for P dt + Q dw = 0 when it is exact."""
    if not (P.diff(pb.w) - Q.diff(pb.t)).is_zero():
        return None
    A = pb.integrate(P, pb.t)
    rest = LogSum(A.variables, Q) - A.diff(pb.w)
    if rest.logs or rest.integrals or any(_uses(q, pb.t) for q in (rest.rational.num, rest.rational.den)):
        return None
    B = pb.integrate(rest.rational, pb.w)
    total = A + B
    return exponentiate_logs(total.as_expr(), total)


def exact(pb: _Problem):
    R = pb.R
    P = RatFunc(R.num)
    Q = -RatFunc(R.den)  # R.num dt - R.den dw = 0
    G = _exact_with(pb, P, Q)
    if G is not None:
        return G
    diff = P.diff(pb.w) - Q.diff(pb.t)
    # mu(t): (P_w - Q_t)/Q depends on t only
    for ratio, v, other in ((diff / Q, pb.t, pb.w), (-(diff / P) if not P.is_zero() else None, pb.w, pb.t)):
        if ratio is None or any(_uses(q, other) for q in (ratio.num, ratio.den)):
            continue
        L = pb.integrate(ratio, v)
        _mu, mu_rat = _exponential(L, 1)
        if mu_rat is None:
            continue
        G = _exact_with(pb, P * mu_rat, Q * mu_rat)
        if G is not None:
            return G
    return None


def homogeneous(pb: _Problem):
    R = pb.R
    if R.is_zero():
        return None
    idx = (pb.variables.index(pb.t), pb.variables.index(pb.w))

    def hdeg(p: MultiPoly):
        degs = {m[idx[0]] + m[idx[1]] for m in p.terms}
        return degs.pop() if len(degs) == 1 else None

    dn, dd = hdeg(R.num), hdeg(R.den)
    if dn is None or dd is None or dn != dd:
        return None
    v = sp.Dummy("v")
    F = sp.cancel(pb.rhs.subs(pb.w, v * pb.t, simultaneous=True))
    if F.has(pb.t):
        return None
    denom = sp.cancel(F - v)
    if denom == 0:
        return pb.w / pb.t
    sub = _Problem(sp.cancel(1 / denom), v, pb.t, pb.params)
    ls = integrate_rational_parts(sub.R, v)
    G = ls.as_expr() - sp.log(pb.t)
    G = G.subs(v, pb.w / pb.t)
    return sp.expand_log(G, force=True)


def bernoulli(pb: _Problem):
    R = pb.R
    if _uses(R.den, pb.w):
        return None
    degs = sorted({m[pb.variables.index(pb.w)] for m in R.num.terms})
    if len(degs) != 2 or degs[0] != 1 or degs[1] < 2:
        return None
    n = degs[1]
    from .quadrature import _UPoly
    up = _UPoly.from_poly(R.num, pb.w)
    inv = RatFunc(MultiPoly.constant(1, pb.variables), R.den)
    A = up.c[1] * inv
    B = up.c[n] * inv
    k = RatFunc(MultiPoly.constant(1 - n, pb.variables))
    # v = w^(1-n): v' = (1-n)(A v + B)
    return _solve_linear(pb, A * k, B * k, pb.w ** (1 - n))


SUBSOLVERS: tuple = (
    ("separable", separable),
    ("linear", linear),
    ("exact", exact),
    ("homogeneous", homogeneous),
    ("bernoulli", bernoulli),
)


def solve_first_order(rhs, t: sp.Symbol, w: sp.Symbol, params: Sequence[sp.Symbol] = (),
                      chain: Sequence[tuple] = SUBSOLVERS) -> tuple:
    """Return (G, subsolver name) with G constant along dw/dt = rhs."""
    pb = _Problem(rhs, t, w, params)
    for name, solver in chain:
        try:
            G = solver(pb)
        except (NonElementaryResidual, ZeroDivisionError) as exc:
            log.debug("%s failed: %s", name, exc)
            continue
        if G is None:
            continue
        if pb.check(G):
            return G, name
        log.debug("%s produced %s which failed the exact check", name, G)
    raise AssociatedUnsolved(f"no subsolver handles d{w}/d{t} = {rhs}")
