"""Random 3D systems with a planted first integral (A/B) * exp(lam*x)."""
from __future__ import annotations

import random

import sympy as sp

from elemps.algebra.poly import BASE_VARS, MultiPoly, U, X, Y
from elemps.reducer import System3D
from sympy import QQ_I as QQ_dom

MONOMIALS = {
    1: [X, Y, U],
    2: [X**2, X * Y, X * U, Y**2, Y * U, U**2],
}


def random_poly(rng: random.Random, degree: int, terms: int = 3) -> sp.Expr:
    """A polynomial of exact total degree ``degree`` with small integer coefficients."""
    lead = rng.choice(MONOMIALS[degree])
    pool = [m for d in range(1, degree + 1) for m in MONOMIALS[d] if m != lead] + [sp.Integer(1)]
    extra = rng.sample(pool, min(terms - 1, len(pool)))
    return lead + sum(rng.choice([-3, -2, -1, 1, 2, 3]) * m for m in extra)


def planted_system(seed: int):
    """Return (system, planted invariant, [A, B]) for the given seed.

    With V = B^2 exp(-lam x) grad((A/B) exp(lam x)) and a linear vector W,
    the field V x W is orthogonal to grad I, so D[I] = 0.
    """
    rng = random.Random(seed)
    while True:
        da, db = rng.choice([(1, 1), (1, 2), (2, 1), (2, 2), (2, 0), (1, 0)])
        A = random_poly(rng, da)
        B = random_poly(rng, db) if db else sp.Integer(1)
        lam = rng.choice([0, 0, 1, -1, 2])
        if sp.gcd(A, B) != 1 or (db == 0 and lam == 0 and da == 1):
            continue
        V = [sp.expand((lam * A * B if v == X else 0) + sp.diff(A, v) * B - A * sp.diff(B, v)) for v in BASE_VARS]
        # a non-constant W keeps the system generic: a constant W would add the
        # linear first integral W.(x, y, u) and with it whole pencils of Darboux polynomials
        W = [rng.choice([-2, -1, 1, 2]) + rng.choice([-1, 1]) * rng.choice(BASE_VARS) for _ in range(3)]
        fgh = [sp.expand(V[1] * W[2] - V[2] * W[1]),
               sp.expand(V[2] * W[0] - V[0] * W[2]),
               sp.expand(V[0] * W[1] - V[1] * W[0])]
        if any(c == 0 for c in fgh):
            continue
        system = System3D.from_polys(*fgh)
        I = A / B * sp.exp(lam * X)
        return system, I, [MultiPoly.from_expr(A, BASE_VARS), MultiPoly.from_expr(B, BASE_VARS)]


def planted_factors(AB) -> list:
    """Monic irreducible factors of the planted numerator and denominator."""
    out = []
    for P in AB:
        if P.is_constant():
            continue
        for fac, _ in P.factor()[1]:
            fac = fac.monic()
            if fac not in out:
                out.append(fac)
    return out


def detected(target: MultiPoly, pairs, op) -> bool:
    """Is ``target`` a found Darboux polynomial, or in the span of found ones sharing its cofactor?

    Darboux polynomials with a common cofactor form a vector space; the search
    returns sampled members of such a family rather than every member.
    """
    from elemps.darboux import cofactor

    q = cofactor(op, target)
    if q is None:
        return False
    family = [pr.p for pr in pairs if pr.q == q]
    if target in family:
        return True
    if not family:
        return False
    monos = sorted({m for p in family + [target] for m in p.terms})
    cols = [[sp.sympify(QQ_dom.to_sympy(p.terms.get(m, QQ_dom.zero))) for m in monos] for p in family]
    M = sp.Matrix(cols).T
    rhs = sp.Matrix([QQ_dom.to_sympy(target.terms.get(m, QQ_dom.zero)) for m in monos])
    return M.rank() == M.row_join(rhs).rank()
