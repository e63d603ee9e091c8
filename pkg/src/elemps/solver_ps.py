"""Prelle-Singer type route: integrating pair (r, s) from Darboux polynomials.

An invariant I has I_x = -r g - s h, I_y = r f, I_u = s f.  Writing
r = Q T and s = P T with T = prod p_i^n_i (p_i Darboux polynomials, plus f
itself), the mixed-partial identities become two polynomial equations in
P, Q and the exponents n_i:

    f P sum(n_i q_i) = -f D[P] - P (f f_x + g f_y + f h_u) - Q (f g_u - g f_u)
    f Q sum(n_i q_i) = -f D[Q] - Q (f f_x + f g_y + h f_u) - P (f h_y - h f_y)

(the term for f contributes n_f D[f] in place of f n_f q_f).  Solutions are
found with the case-split solver, checked against all three compatibility
identities, and integrated by :mod:`elemps.quadrature`.

When the elementary function depends on x alone the 1ODE is effectively
two dimensional; ``solve_leaf`` then looks for an integrating factor
R = prod p_i^n_i with a single linear condition on the n_i.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction

import sympy as sp
from sympy import QQ_I
from sympy.polys.orderings import grlex
from sympy.polys.rings import PolyRing

from .algebra.poly import BASE_VARS, MultiPoly, U, X, Y, monomials_upto
from .algebra.polysolve import Budget, PolySystemSolver, coefficient_equations
from .algebra.ratfunc import RatFunc
from .darboux import DarbouxOperator, DarbouxPair, apply_D, search_darboux
from .errors import NonElementaryResidual, NotFound, NotRationalError, SearchBudgetExceeded
from .quadrature import FirstIntegral, RSPair, iterated_integral, leaf_integral
from .verifier import check_invariant, is_nontrivial_for_ode

log = logging.getLogger(__name__)

MAX_FULL_SUPPORT = 6
MAX_SUPPORT = 4


@dataclass(frozen=True)
class PSCandidate:
    P: MultiPoly
    Q: MultiPoly
    exponents: tuple  # ((polynomial, Fraction), ...) including f when its exponent is nonzero

    @property
    def nonzero(self) -> int:
        return sum(1 for _, n in self.exponents if n)

    def sort_key(self):
        return ((self.P * self.Q).degree() if not self.P.is_zero() else self.Q.degree(), self.nonzero)

    def integer_exponents(self) -> bool:
        return all(n.denominator == 1 for _, n in self.exponents)

    def T(self) -> RatFunc:
        """prod p_i^n_i as a rational function (integer exponents only)."""
        if not self.integer_exponents():
            raise NonElementaryResidual("T has fractional exponents; r and s are not rational")
        return _power_product(self.exponents)

    def rs(self) -> RSPair:
        T = self.T()
        return RSPair(RatFunc(self.Q) * T, RatFunc(self.P) * T)


def _power_product(exponents) -> RatFunc:
    one = MultiPoly.constant(1)
    num, den = one, one
    for p, n in exponents:
        k = int(n)
        if k > 0:
            num = num * p ** k
        elif k < 0:
            den = den * p ** (-k)
    return RatFunc(num, den)


# -- residuals ----------------------------------------------------------------------


def _system_terms(system):
    f, g, h = system.components()
    cP = f * f.diff(X) + g * f.diff(Y) + f * h.diff(U)
    cPQ = f * g.diff(U) - g * f.diff(U)
    cQ = f * f.diff(X) + f * g.diff(Y) + h * f.diff(U)
    cQP = f * h.diff(Y) - h * f.diff(Y)
    return f, g, h, cP, cPQ, cQ, cQP


def _log_derivative_times_f(system, pairs, n) -> MultiPoly:
    """f * D[T]/T for T = prod p_i^n_i * f^n_f; ``n`` lists exponents for pairs then f."""
    f = system.f
    op = DarbouxOperator(system)
    total = MultiPoly.constant(0)
    for pair, k in zip(pairs, n):
        total = total + f * pair.q * k
    if len(n) > len(pairs):
        total = total + apply_D(op, f) * n[len(pairs)]
    return total


def pdr_residuals(system, pairs, P: MultiPoly, Q: MultiPoly, n) -> tuple:
    """Left minus right of the two defining equations, for concrete P, Q, n.

    ``n`` holds one exponent per pair, optionally followed by the exponent of f.
    """
    f, g, h, cP, cPQ, cQ, cQP = _system_terms(system)
    op = DarbouxOperator(system)
    n = [sp.Rational(k) if not isinstance(k, Fraction) else sp.Rational(k.numerator, k.denominator) for k in n]
    L = _log_derivative_times_f(system, pairs, n)
    resP = P * L + f * apply_D(op, P) + P * cP + Q * cPQ
    resQ = Q * L + f * apply_D(op, Q) + Q * cQ + P * cQP
    return resP, resQ


def _ps_equations(system, polys, dP: int, dQ: int, lead_Q, lead_P=None):
    """Coefficient equations in (P coeffs, Q coeffs, n).

    ``polys`` are the candidate factors (the last one is f, entering via D[f]).
    Q is fixed monic at ``lead_Q``; when ``lead_Q`` is None, Q = 0 and P is
    fixed monic at ``lead_P``.
    """
    f, g, h, cP, cPQ, cQ, cQP = _system_terms(system)
    pm = monomials_upto(3, dP)
    qm = monomials_upto(3, dQ)
    if lead_Q is not None:
        q_free = [m for m in qm if grlex(m) < grlex(lead_Q)]
        p_free = pm
    else:
        q_free = []
        p_free = [m for m in pm if grlex(m) < grlex(lead_P)]
    names = ([f"p{k}" for k in range(len(p_free))] + [f"q{k}" for k in range(len(q_free))]
             + [f"n{k}" for k in range(len(polys))])
    ring = PolyRing(["x", "y", "u"] + names, QQ_I, grlex)
    coeff_ring = PolyRing(names, QQ_I, grlex)
    gx = ring.gens[:3]
    unk = ring.gens[3:]
    pad = (0,) * len(names)

    def lift(p: MultiPoly):
        return ring.from_dict({mon + pad: c for mon, c in p.terms.items()}) if not p.is_zero() else ring.zero

    def mono(m):
        return gx[0] ** m[0] * gx[1] ** m[1] * gx[2] ** m[2]

    P = sum((unk[k] * mono(m) for k, m in enumerate(p_free)), ring.zero)
    if lead_Q is None:
        P += mono(lead_P)
        Q = ring.zero
    else:
        off = len(p_free)
        Q = mono(lead_Q) + sum((unk[off + k] * mono(m) for k, m in enumerate(q_free)), ring.zero)
    F, G, H = lift(f), lift(g), lift(h)
    op = DarbouxOperator(system)

    def D(p):
        return F * p.diff(gx[0]) + G * p.diff(gx[1]) + H * p.diff(gx[2])

    n0 = len(p_free) + len(q_free)
    L = ring.zero
    for k, (p, q) in enumerate(polys[:-1]):
        L += unk[n0 + k] * lift(f * q)
    L += unk[n0 + len(polys) - 1] * lift(apply_D(op, f))
    resP = P * L + F * D(P) + P * lift(cP) + Q * lift(cPQ)
    resQ = Q * L + F * D(Q) + Q * lift(cQ) + P * lift(cQP)
    eqs = coefficient_equations(resP, 3, coeff_ring) + coefficient_equations(resQ, 3, coeff_ring)
    layout = (p_free, q_free, n0)
    return eqs, coeff_ring, layout


def _real_rational(c) -> Fraction | None:
    if c.y:
        return None
    return Fraction(int(c.x.numerator), int(c.x.denominator))


def _candidates_for(system, pairs, support, dP, dQ, budget) -> list:
    """All candidates (P, Q, n) with n supported on ``support`` (indices into pairs)."""
    polys = [(pairs[i].p, pairs[i].q) for i in support] + [(system.f, None)]
    leads = [(m, None) for m in monomials_upto(3, dQ)] + [(None, m) for m in monomials_upto(3, dP)]
    out = []
    for lead_Q, lead_P in leads:
        eqs, ring, (p_free, q_free, n0) = _ps_equations(system, polys, dP, dQ, lead_Q, lead_P)
        # exponents first, then Q, then P
        nn = ring.ngens
        priority = list(range(n0, nn)) + list(range(len(p_free), n0)) + list(range(len(p_free)))
        solver = PolySystemSolver(ring, priority=priority, budget=budget)
        for sol in solver.solve([e for e in eqs if e]):
            ns = [_real_rational(sol[n0 + k]) for k in range(len(polys))]
            if any(k is None for k in ns):
                continue
            pt = {m: sol[k] for k, m in enumerate(p_free) if sol[k]}
            if lead_Q is None:
                pt[lead_P] = 1
                qt = {}
            else:
                qt = {lead_Q: 1}
                qt.update({m: sol[len(p_free) + k] for k, m in enumerate(q_free) if sol[len(p_free) + k]})
            P = MultiPoly.from_terms(pt, BASE_VARS) if pt else MultiPoly.constant(0)
            Q = MultiPoly.from_terms(qt, BASE_VARS) if qt else MultiPoly.constant(0)
            exps = tuple((p, k) for (p, _q), k in zip(polys, ns) if k)
            out.append(PSCandidate(P, Q, exps))
    return out


def _supports(npairs: int) -> list:
    if npairs <= MAX_FULL_SUPPORT:
        return [tuple(range(npairs))]
    out = []
    for size in range(0, MAX_SUPPORT + 1):
        out.extend(itertools.combinations(range(npairs), size))
    return out


def list_candidates(system, pairs, degP: int, degQ: int, budget: Budget | None = None) -> list:
    """Every candidate at the given degrees, sorted by the tie-break rule."""
    if degP < 0 or degQ < 0:
        raise ValueError("degP and degQ must be non-negative")
    budget = budget or Budget()
    seen, out = set(), []
    for support in _supports(len(pairs)):
        for cand in _candidates_for(system, pairs, support, degP, degQ, budget):
            key = (cand.P, cand.Q, cand.exponents)
            if key in seen:
                continue
            seen.add(key)
            out.append(cand)
    out.sort(key=PSCandidate.sort_key)
    return out


def solve_ps(system, pairs, degP: int, degQ: int, budget: Budget | None = None) -> PSCandidate:
    """First candidate (tie-break order) that passes the compatibility check."""
    for cand in list_candidates(system, pairs, degP, degQ, budget):
        if compatibility_check(cand, system):
            return cand
    raise NotFound(f"no (P, Q, n) with deg P <= {degP}, deg Q <= {degQ}")


# -- compatibility ------------------------------------------------------------------


def _log_gradient(exponents, v) -> RatFunc:
    """sum n_i d_v p_i / p_i."""
    total = RatFunc(MultiPoly.constant(0))
    for p, n in exponents:
        total = total + RatFunc(MultiPoly.constant(sp.Rational(n.numerator, n.denominator))) * RatFunc(p.diff(v), p)
    return total


def _compatible_with_T(a: dict, exponents) -> bool:
    """Mixed partials of I given I_v = T * a[v] with T = prod p_i^n_i."""
    L = {v: _log_gradient(exponents, v) for v in BASE_VARS}

    def d(v, w):  # d/dw of (T a_v), divided by T
        return a[v].diff(w) + a[v] * L[w]

    return all((d(v, w) - d(w, v)).is_zero() for v, w in ((X, Y), (X, U), (Y, U)))


def compatibility_check(rs, system) -> bool:
    """The three mixed-partial identities for I_x = -rg - sh, I_y = rf, I_u = sf.

    Accepts an :class:`RSPair` (rational r, s) or a :class:`PSCandidate`
    (r = Q T, s = P T with possibly fractional exponents in T).
    """
    f, g, h = (RatFunc(p) for p in system.components())
    if isinstance(rs, PSCandidate):
        r, s, exps = RatFunc(rs.Q), RatFunc(rs.P), rs.exponents
    else:
        r, s, exps = rs.r, rs.s, ()
    a = {X: -(r * g) - s * h, Y: r * f, U: s * f}
    return _compatible_with_T(a, exps)


# -- leaf mode ------------------------------------------------------------------------


@dataclass(frozen=True)
class LeafCandidate:
    exponents: tuple

    def R(self) -> RatFunc:
        if not all(n.denominator == 1 for _, n in self.exponents):
            raise NonElementaryResidual("integrating factor with fractional exponents")
        return _power_product(self.exponents)


def leaf_candidates(system, pairs, budget: Budget | None = None) -> list:
    """Integrating factors R = prod p_i^n_i * f^n_f for dy/dx = g/f with u = u(x)."""
    f, g, h = system.components()
    op = DarbouxOperator(system)
    polys = [pr.p for pr in pairs] + [f]
    images = [f * pr.q for pr in pairs] + [apply_D(op, f)]
    rhs = -(f * f.diff(X) + f * g.diff(Y) + h * f.diff(U))
    supports = _supports(len(pairs))
    out, seen = [], set()
    for support in supports:
        idx = list(support) + [len(pairs)]
        names = [f"n{k}" for k in range(len(idx))]
        ring = PolyRing(names, QQ_I, grlex)
        eqs: dict = {}
        for k, i in enumerate(idx):
            for mon, c in images[i].terms.items():
                eqs[mon] = eqs.get(mon, ring.zero) + ring.gens[k] * c
        for mon, c in rhs.terms.items():
            eqs[mon] = eqs.get(mon, ring.zero) - c
        solver = PolySystemSolver(ring, budget=budget or Budget())
        for sol in solver.solve([e for e in eqs.values() if e]):
            ns = [_real_rational(sol[k]) for k in range(len(idx))]
            if any(k is None for k in ns):
                continue
            exps = tuple((polys[i], k) for i, k in zip(idx, ns) if k)
            if exps in seen:
                continue
            seen.add(exps)
            out.append(LeafCandidate(exps))
    out.sort(key=lambda c: (not all(n.denominator == 1 for _, n in c.exponents), len(c.exponents)))
    return out


# -- driver -----------------------------------------------------------------------------


@dataclass
class PSResult:
    integral: FirstIntegral
    pairs: list
    candidate: object
    mode: str
    darboux_degree: int
    pq_degree: int | None = None
    trace: list = field(default_factory=list)


def degree_schedule(max_darboux: int, max_pq: int) -> list:
    """(Darboux degree, P/Q degree) in the order the search visits them."""
    return [(d, min(d, max_pq)) for d in range(1, max_darboux + 1)]


def _accept(I: FirstIntegral, system) -> bool:
    verdict = check_invariant(I.value, system)
    if not verdict:
        log.warning("integral failed verification: %s", I.value)
        return False
    return not verdict.degenerate and is_nontrivial_for_ode(I.value, system)


def _hints(pairs, system):
    return [pr.p for pr in pairs] + [p for p, _ in system.f.factor()[1]]


def solve_ps_system(system, max_darboux: int = 2, max_pq: int = 2, budget: Budget | None = None,
                    modes: tuple = ("3d", "leaf")) -> PSResult:
    """The degree loop: Darboux polynomials up to deg, then P, Q of the paired degree."""
    budget = budget or Budget()
    op = DarbouxOperator(system)
    trace = []
    leaf_ok = "leaf" in modes and system.record.depends_on_x_only
    for deg, dpq in degree_schedule(max_darboux, max_pq):
        pairs, complete = search_darboux(op, deg, budget, partial=True)
        trace.append(f"deg {deg}: {len(pairs)} Darboux polynomials" + ("" if complete else " (partial)"))
        hints = _hints(pairs, system)
        if "3d" in modes:
            try:
                cands = list_candidates(system, pairs, dpq, dpq, budget)
            except SearchBudgetExceeded:
                cands = []
                trace.append(f"deg {deg}: P/Q search budget exhausted")
            for cand in cands:
                if not compatibility_check(cand, system):
                    continue
                try:
                    I = iterated_integral(cand.rs(), system, hints)
                except (NonElementaryResidual, NotRationalError) as exc:
                    trace.append(f"candidate rejected: {exc}")
                    continue
                if _accept(I, system):
                    return PSResult(I, pairs, cand, "3d", deg, dpq, trace)
        if leaf_ok:
            for cand in leaf_candidates(system, pairs, budget):
                try:
                    I = leaf_integral(cand.R(), system, hints)
                except (NonElementaryResidual, NotRationalError) as exc:
                    trace.append(f"leaf candidate rejected: {exc}")
                    continue
                if _accept(I, system):
                    return PSResult(I, pairs, cand, "leaf", deg, None, trace)
        budget.check_time()
    raise NotFound("; ".join(trace) or "no Darboux polynomials")
