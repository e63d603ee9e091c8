"""Darboux polynomials of D = f d/dx + g d/dy + h d/du.

The search fixes the leading (graded-lex) monomial of p, so p is monic, and
solves the bilinear coefficient equations of D[p] = q p with the case-split
solver, eliminating the cofactor coefficients first.  Every solution is
split into irreducible factors over QQ(i), and each factor is re-checked
exactly before it is returned.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

from sympy import QQ_I
from sympy.polys.orderings import grlex
from sympy.polys.rings import PolyRing

from .algebra.poly import BASE_VARS, MultiPoly, monomials_upto, sort_key
from .algebra.polysolve import Budget, PolySystemSolver
from .errors import DivisionError, SearchBudgetExceeded
from .reducer import System3D

log = logging.getLogger(__name__)


class DarbouxOperator:
    """The derivation f*d/dx + g*d/dy + h*d/du of a 3D system."""

    def __init__(self, system: System3D):
        self.system = system
        self.vars = BASE_VARS
        self._image_cache: dict = {}

    def __call__(self, p: MultiPoly) -> MultiPoly:
        return apply_D(self, p)

    @property
    def components(self):
        return self.system.f, self.system.g, self.system.h

    def monomial_image(self, mon: tuple) -> dict:
        """D[x^a y^b u^c] as an exponent -> coefficient dict (cached)."""
        if mon not in self._image_cache:
            p = MultiPoly.from_terms({mon: 1}, self.vars)
            self._image_cache[mon] = apply_D(self, p).terms
        return self._image_cache[mon]

    @property
    def cofactor_degree(self) -> int:
        return max(self.system.degree - 1, 0)


def apply_D(op: DarbouxOperator, p: MultiPoly) -> MultiPoly:
    f, g, h = op.components
    x, y, u = op.vars
    return f * p.diff(x) + g * p.diff(y) + h * p.diff(u)


@dataclass(frozen=True)
class DarbouxPair:
    p: MultiPoly
    q: MultiPoly

    def check(self, op: DarbouxOperator) -> bool:
        return (apply_D(op, self.p) - self.q * self.p).is_zero()


def cofactor(op: DarbouxOperator, p: MultiPoly) -> MultiPoly | None:
    """q with D[p] = q p, or None when p is not Darboux."""
    try:
        return apply_D(op, p).exact_div(p)
    except DivisionError:
        return None


def _leading_cases(degree: int) -> list:
    """Exponent vectors of exact total degree ``degree`` in descending grlex order."""
    return [m for m in monomials_upto(3, degree) if sum(m) == degree]


def _build(op: DarbouxOperator, lead: tuple, p_monos: list, q_monos: list, fixed: dict):
    """Coefficient equations of D[p] = q p with the listed unknown coefficients.

    ``fixed`` maps ("p" | "q", monomial) to known coefficients.
    """
    names = [f"a{k}" for k in range(len(p_monos))] + [f"b{k}" for k in range(len(q_monos))]
    ring = PolyRing(names, QQ_I, grlex)
    gens = ring.gens
    a_of = {m: gens[k] for k, m in enumerate(p_monos)}
    a_of[lead] = ring.one
    b_of = {m: gens[len(p_monos) + k] for k, m in enumerate(q_monos)}
    for (kind, m), value in fixed.items():
        (a_of if kind == "p" else b_of)[m] = ring(value)
    eqs: dict = {}
    for m, coeff in a_of.items():
        if not coeff:
            continue
        for mon, c in op.monomial_image(m).items():
            eqs[mon] = eqs.get(mon, ring.zero) + coeff * c
        for k, b in b_of.items():
            mon = tuple(i + j for i, j in zip(m, k))
            eqs[mon] = eqs.get(mon, ring.zero) - coeff * b
    # cofactor unknowns go first, then low-order p coefficients
    priority = list(range(len(p_monos), len(names))) + list(range(len(p_monos)))
    return ring, eqs, priority


def _solve_with_leading(op: DarbouxOperator, degree: int, lead: tuple, budget: Budget) -> list:
    """Monic Darboux polynomials of exact degree ``degree`` with leading monomial ``lead``.

    The equations are solved in stages of descending total degree: the top
    stage only involves the top homogeneous parts of p and q, and once those
    are settled each lower stage is close to linear in the new unknowns.
    """
    monos = monomials_upto(3, degree)
    free = [m for m in monos if grlex(m) < grlex(lead)]
    qmonos = monomials_upto(3, op.cofactor_degree)
    ring, eqs, priority = _build(op, lead, free, qmonos, {})
    levels: dict = {}
    for mon, e in eqs.items():
        if e:
            levels.setdefault(sum(mon), []).append(e)
    stages = [levels[k] for k in sorted(levels, reverse=True)]
    if not stages:
        return []
    solver = PolySystemSolver(ring, priority=priority, budget=budget)
    out = []
    for sol in solver.solve(stages[0], stages[1:]):
        terms = {lead: 1}
        for k, m in enumerate(free):
            if sol[k]:
                terms[m] = sol[k]
        out.append(MultiPoly.from_terms(terms, BASE_VARS))
    return out


def search_darboux(op: DarbouxOperator, maxdeg: int, budget: Budget | None = None,
                   partial: bool = False) -> tuple:
    """Return (pairs, complete).  With ``partial`` a blown budget keeps what was found."""
    if maxdeg < 1:
        raise ValueError("maxdeg must be at least 1")
    f, g, h = op.components
    if f.is_zero() and g.is_zero() and h.is_zero():
        raise ValueError("degenerate system: f = g = h = 0")
    budget = budget or Budget()
    found: dict = {}
    complete = True

    def accept(p: MultiPoly):
        if p.is_constant():
            return
        _unit, facs = p.factor()
        for fac, _mult in facs:
            fac = fac.monic()
            if fac in found:
                continue
            q = cofactor(op, fac)
            if q is None:
                log.warning("factor %s of a solution failed the exact re-check", fac)
                continue
            found[fac] = q

    try:
        for degree in range(1, maxdeg + 1):
            for lead in _leading_cases(degree):
                for p in _solve_with_leading(op, degree, lead, budget):
                    accept(p)
    except SearchBudgetExceeded:
        if not partial:
            raise
        complete = False
    pairs = [DarbouxPair(p, q) for p, q in found.items()]
    pairs.sort(key=lambda pr: sort_key(pr.p))
    return pairs, complete


def find_darboux(op: DarbouxOperator, maxdeg: int, budget: Budget | None = None) -> list:
    """All irreducible Darboux polynomials of degree <= maxdeg (monic), with cofactors."""
    pairs, _ = search_darboux(op, maxdeg, budget)
    return pairs
