"""S-function route to first integrals of a 3D polynomial system.

For an invariant I of D = f d/dx + g d/dy + h d/du, the ratio S = I_y / I_u
satisfies a Riccati-type first order PDE whose coefficients come from the
system.  A rational S is found by ansatz; then

* the associated ODE du/dy = -S (x a parameter) yields G with D_y G = S D_u G;
* along the system, dG/dx = D[G]/f depends only on (x, G);
* solving that reduced ODE gives F(x, G), and I = F(x, G).
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterator

import sympy as sp
from sympy import QQ_I
from sympy.polys.orderings import grlex
from sympy.polys.rings import PolyRing

from .algebra.expr import partial
from .algebra.normal import is_identically_zero
from .algebra.poly import BASE_VARS, MultiPoly, U, X, Y, monomials_upto
from .algebra.polysolve import Budget, PolySystemSolver, coefficient_equations
from .algebra.ratfunc import RatFunc
from .errors import (AssociatedUnsolved, GuardViolation, NonElementaryResidual, NotFound,
                     NotRationalError, NotReducible, SearchBudgetExceeded)
from .odes1 import solve_first_order
from .quadrature import FirstIntegral
from .verifier import apply_derivation, check_invariant, is_nontrivial_for_ode

log = logging.getLogger(__name__)

GAMMA = sp.Symbol("gamma")


@dataclass(frozen=True)
class SFunction:
    value: RatFunc

    def as_expr(self) -> sp.Expr:
        return self.value.as_expr()


@dataclass(frozen=True)
class AssociatedSolution:
    G: sp.Expr
    subsolver: str = ""


@dataclass(frozen=True)
class ExtensionODE:
    phi: sp.Expr  # in (x, GAMMA)
    method: str = ""


@dataclass(frozen=True)
class SResult:
    S: SFunction
    associated: AssociatedSolution
    extension: ExtensionODE
    integral: FirstIntegral


# -- the PDE for S ----------------------------------------------------------------


def _coefficients(system):
    f, g, h = system.components()
    a2 = f * g.diff(U) - g * f.diff(U)
    a1 = g * f.diff(Y) + f * h.diff(U) - f * g.diff(Y) - h * f.diff(U)
    a0 = f * h.diff(Y) - h * f.diff(Y)
    return f, g, h, a2, a1, a0


def _derive(p, f, g, h):
    return f * p.diff(X) + g * p.diff(Y) + h * p.diff(U)


def s_pde_residual(S: RatFunc | SFunction, system) -> MultiPoly:
    """Numerator of f D[S] - a2 S^2 - a1 S + a0 for S = A/B (times B^2)."""
    if isinstance(S, SFunction):
        S = S.value
    f, g, h, a2, a1, a0 = _coefficients(system)
    if f.is_zero():
        raise GuardViolation("f is identically zero")
    A, B = S.num.with_variables(BASE_VARS), S.den.with_variables(BASE_VARS)
    return f * (B * _derive(A, f, g, h) - A * _derive(B, f, g, h)) - A * A * a2 - A * B * a1 + B * B * a0


def check_guards(system) -> None:
    f, g, _h = system.components()
    if f.is_zero():
        raise GuardViolation("the S-function route needs f != 0")
    if (g - MultiPoly.var(U) * f).is_zero():
        log.warning("g - u f vanishes identically; continuing (advisory guard)")


def degree_cells(maxdeg: int) -> list:
    """(deg A, deg B) cells, grown by the larger of the two degrees."""
    cells = [(0, 0)]
    for d in range(1, maxdeg + 1):
        layer = [(0, d), (d, 0)]
        for k in range(1, d):
            layer += [(k, d), (d, k)]
        layer.append((d, d))
        cells += layer
    return cells


def _cell_solutions(system, da: int, db: int, budget: Budget) -> list:
    f, g, h, a2, a1, a0 = _coefficients(system)
    amonos = monomials_upto(3, da)
    bmonos = monomials_upto(3, db)
    out = []
    for lead in (m for m in bmonos if sum(m) == db):
        bfree = [m for m in bmonos if grlex(m) < grlex(lead)]
        names = [f"a{k}" for k in range(len(amonos))] + [f"b{k}" for k in range(len(bfree))]
        ring = PolyRing(["x", "y", "u"] + names, QQ_I, grlex)
        coeff_ring = PolyRing(names, QQ_I, grlex)
        gx = ring.gens[:3]
        unk = ring.gens[3:]

        def lift(p: MultiPoly):
            out_ = ring.zero
            for mon, c in p.terms.items():
                out_ += ring.from_dict({mon + (0,) * len(names): c})
            return out_

        def mono(m):
            return gx[0] ** m[0] * gx[1] ** m[1] * gx[2] ** m[2]

        A = sum((unk[k] * mono(m) for k, m in enumerate(amonos)), ring.zero)
        B = mono(lead) + sum((unk[len(amonos) + k] * mono(m) for k, m in enumerate(bfree)), ring.zero)
        F, G_, H = lift(f), lift(g), lift(h)

        def D(p):
            return F * p.diff(gx[0]) + G_ * p.diff(gx[1]) + H * p.diff(gx[2])

        res = F * (B * D(A) - A * D(B)) - A * A * lift(a2) - A * B * lift(a1) + B * B * lift(a0)
        eqs = coefficient_equations(res, 3, coeff_ring)
        solver = PolySystemSolver(coeff_ring, budget=budget)
        for sol in solver.solve(eqs):
            at = {m: sol[k] for k, m in enumerate(amonos) if sol[k]}
            bt = {lead: 1}
            bt.update({m: sol[len(amonos) + k] for k, m in enumerate(bfree) if sol[len(amonos) + k]})
            Apoly = MultiPoly.from_terms(at, BASE_VARS) if at else MultiPoly.constant(0)
            Bpoly = MultiPoly.from_terms(bt, BASE_VARS)
            out.append(RatFunc(Apoly, Bpoly))
    return out


def iter_sfunctions(system, maxdeg: int, budget: Budget | None = None) -> Iterator[SFunction]:
    """Distinct rational S with residual identically zero, in cell order."""
    if maxdeg < 0:
        raise ValueError("maxdeg must be non-negative")
    check_guards(system)
    budget = budget or Budget()
    seen = set()
    zero = RatFunc(MultiPoly.constant(0))
    if s_pde_residual(zero, system).is_zero():
        seen.add(zero)
        yield SFunction(zero)
    for da, db in degree_cells(maxdeg):
        for S in _cell_solutions(system, da, db, budget):
            if S in seen:
                continue
            seen.add(S)
            if not s_pde_residual(S, system).is_zero():
                log.warning("ansatz solution %s failed the exact residual re-check", S)
                continue
            yield SFunction(S)


def find_sfunction(system, maxdeg: int, budget: Budget | None = None) -> SFunction:
    for S in iter_sfunctions(system, maxdeg, budget):
        return S
    raise NotFound(f"no rational S-function with degrees <= {maxdeg}")


# -- associated ODE and extension -------------------------------------------------------


def solve_associated(S: SFunction | RatFunc) -> AssociatedSolution:
    """G constant along du/dy = -S, with x as a parameter."""
    value = S.value if isinstance(S, SFunction) else S
    G, name = solve_first_order(-value.as_expr(), Y, U, (X,))
    return AssociatedSolution(G, name)


def _solve_linear_for(N: MultiPoly, Dn: MultiPoly, v):
    """Solve N - gamma*Dn = 0 for v when it is linear in v; returns an expression or None."""
    expr = sp.expand(N.as_expr() - GAMMA * Dn.as_expr())
    if sp.degree(expr, v) != 1:
        return None
    a = expr.coeff(v, 1)
    b = expr.coeff(v, 0)
    return sp.cancel(-b / a)


def _rational_in(e, variables):
    try:
        return RatFunc.from_expr(e, variables)
    except Exception:
        return None


def _free_of_yu(R: RatFunc) -> bool:
    return not any(v in p.free_variables() for p in (R.num, R.den) for v in (Y, U))


def rewrite_in_gamma(phi: sp.Expr, G: sp.Expr) -> ExtensionODE:
    """Express phi (a function of x, y, u) as a function of (x, gamma) on G = gamma."""
    vars_g = (X, Y, U, GAMMA)
    Gr = _rational_in(G, BASE_VARS)
    phir = _rational_in(phi, BASE_VARS)
    if Gr is not None and phir is not None:
        for v in (U, Y):
            sol = _solve_linear_for(Gr.num, Gr.den, v)
            if sol is None:
                continue
            cand = _rational_in(phir.as_expr().subs(v, sol), vars_g)
            if cand is not None and _free_of_yu(cand):
                return ExtensionODE(cand.as_expr(), f"solve for {v}")
        # degree two in u: reduce numerator and denominator modulo N - gamma*Dn
        K = sp.Poly(Gr.num.as_expr() - GAMMA * Gr.den.as_expr(), U)
        if K.degree() == 2:
            rn = sp.Poly(phir.num.as_expr(), U).rem(K)
            rd = sp.Poly(phir.den.as_expr(), U).rem(K)
            a1, a0 = rn.coeff_monomial(U), rn.coeff_monomial(1)
            b1, b0 = rd.coeff_monomial(U), rd.coeff_monomial(1)
            if sp.cancel(a1 * b0 - a0 * b1) == 0:
                ratio = sp.cancel(a1 / b1) if b1 != 0 else sp.cancel(a0 / b0)
                cand = _rational_in(ratio, vars_g)
                if cand is not None and _free_of_yu(cand):
                    return ExtensionODE(cand.as_expr(), "reduction modulo G - gamma")
        raise NotReducible(f"D[G]/f = {phi} is not a function of (x, G)")
    # transcendental G: try a closed-form inverse in u, then y
    for v in (U, Y):
        try:
            sols = sp.solve(sp.Eq(G, GAMMA), v)
        except (NotImplementedError, ValueError):
            continue
        if len(sols) != 1:
            continue
        cand = sp.simplify(phi.subs(v, sols[0]))
        if not cand.has(Y) and not cand.has(U) and _rational_in(cand, vars_g) is not None:
            return ExtensionODE(sp.cancel(cand), f"inverse in {v}")
    raise NotReducible(f"D[G]/f = {phi} could not be rewritten in (x, G)")


def extend_invariant(assoc: AssociatedSolution | sp.Expr, system) -> FirstIntegral:
    """Turn G into a full first integral I = F(x, G) of the system."""
    G = assoc.G if isinstance(assoc, AssociatedSolution) else sp.sympify(assoc)
    I, _ext = _extend(G, system)
    return I


def _extend(G, system):
    f = system.f.as_expr()
    if f == 0:
        raise GuardViolation("f is identically zero")
    phi = sp.cancel(apply_derivation(G, system) / f) if not G.has(sp.Integral) else apply_derivation(G, system) / f
    if is_identically_zero(phi, BASE_VARS):
        ext = ExtensionODE(sp.Integer(0), "G already invariant")
        I = G
    else:
        ext = rewrite_in_gamma(phi, G)
        # Phi(x, G) must agree with D[G]/f on the whole space
        if not is_identically_zero(ext.phi.subs(GAMMA, G) - phi, BASE_VARS):
            raise NotReducible("the rewritten extension equation does not reproduce D[G]/f")
        F, _name = solve_first_order(ext.phi, X, GAMMA)
        I = F.subs(GAMMA, G)
    verdict = check_invariant(I, system)
    if not verdict:
        raise NonElementaryResidual(f"extended invariant failed verification: {I}")
    return FirstIntegral(I, "sfunction", {"G": G, "phi": ext.phi}), ext


# -- pipeline -------------------------------------------------------------------


def solve_s(system, maxdeg: int = 2, budget: Budget | None = None) -> SResult:
    """First verified, non-trivial invariant obtained from some S-function."""
    budget = budget or Budget()
    failures = []
    for S in iter_sfunctions(system, maxdeg, budget):
        budget.check_time()
        try:
            assoc = solve_associated(S)
            I, ext = _extend(assoc.G, system)
        except (AssociatedUnsolved, NotReducible, NonElementaryResidual, NotRationalError) as exc:
            failures.append((S, exc))
            log.debug("S = %s rejected: %s", S.as_expr(), exc)
            continue
        verdict = check_invariant(I.value, system)
        if verdict.degenerate or not is_nontrivial_for_ode(I.value, system):
            failures.append((S, "trivial on the ODE"))
            continue
        return SResult(S, assoc, ext, I)
    raise NotFound(f"no S-function up to degree {maxdeg} led to a first integral"
                   + (f" ({len(failures)} candidates rejected)" if failures else ""))


__all__ = [
    "SFunction", "AssociatedSolution", "ExtensionODE", "SResult", "GAMMA",
    "s_pde_residual", "check_guards", "degree_cells", "iter_sfunctions", "find_sfunction",
    "solve_associated", "rewrite_in_gamma", "extend_invariant", "solve_s",
    "SearchBudgetExceeded",
]
