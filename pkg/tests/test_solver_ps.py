from fractions import Fraction

import pytest
import sympy as sp

from cases import ODES
from elemps.algebra.poly import BASE_VARS, MultiPoly, U, X, Y
from elemps.algebra.polysolve import Budget
from elemps.algebra.ratfunc import RatFunc
from elemps.darboux import DarbouxOperator, find_darboux
from elemps.errors import NonElementaryResidual
from elemps.parser import parse_ode
from elemps.quadrature import RSPair
from elemps.reducer import build_system
from elemps.solver_ps import (PSCandidate, compatibility_check, degree_schedule, leaf_candidates, list_candidates,
                              pdr_residuals, solve_ps_system)
from elemps.verifier import check_invariant, functionally_dependent


def _mp(e):
    return MultiPoly.from_expr(e, BASE_VARS)


@pytest.fixture(scope="module")
def log_shift():
    return build_system(parse_ode(ODES["log_shift"]))


def test_degree_schedule():
    assert degree_schedule(3, 2) == [(1, 1), (2, 2), (3, 2)]
    assert degree_schedule(1, 0) == [(1, 0)]


def test_known_candidate_solves_the_defining_equations(log_shift):
    pairs = find_darboux(DarbouxOperator(log_shift), 1)
    cands = list_candidates(log_shift, pairs, 0, 0)
    assert cands
    best = cands[0]
    n = [dict(best.exponents).get(pr.p, Fraction(0)) for pr in pairs]
    resP, resQ = pdr_residuals(log_shift, pairs, best.P, best.Q, n)
    assert resP.is_zero() and resQ.is_zero()


def test_compatibility_rejects_a_perturbed_pair(log_shift):
    pairs = find_darboux(DarbouxOperator(log_shift), 1)
    cand = next(c for c in list_candidates(log_shift, pairs, 0, 0) if compatibility_check(c, log_shift))
    rs = cand.rs()
    assert compatibility_check(rs, log_shift)
    bumped = RSPair(rs.r, rs.s + RatFunc(_mp(X)))
    assert not compatibility_check(bumped, log_shift)


def test_fractional_exponents_are_not_integrated():
    cand = PSCandidate(_mp(1), _mp(1), ((_mp(X), Fraction(1, 2)),))
    assert not cand.integer_exponents()
    with pytest.raises(NonElementaryResidual):
        cand.T()


def test_three_dimensional_mode(log_shift):
    res = solve_ps_system(log_shift, 2, 2, Budget.with_timeout(60))
    assert res.mode == "3d"
    assert check_invariant(res.integral.value, log_shift)
    x, y, u = X, Y, U
    reference = -sp.Rational(1, 9) * (u * x - 10 * sp.log(x + 4) * x - 5 * u - 40 * sp.log(x + 4) - 9 * y - 36) / (x + 4)
    # the 3D system has two independent integrals; they agree once u = ln(x - 5)
    assert functionally_dependent(res.integral.value, reference, log_shift.record)


def test_leaf_mode_for_a_function_of_x():
    system = build_system(parse_ode(ODES["exp_quadratic"]))
    assert system.record.depends_on_x_only
    res = solve_ps_system(system, 2, 2, Budget.with_timeout(60), modes=("leaf",))
    assert res.mode == "leaf"
    assert res.integral.value.has(sp.Integral)
    assert check_invariant(res.integral.value, system)


def test_leaf_candidates_have_integer_exponents_first():
    system = build_system(parse_ode(ODES["exp_quadratic"]))
    pairs = find_darboux(DarbouxOperator(system), 1)
    cands = leaf_candidates(system, pairs)
    assert cands
    assert all(n.denominator == 1 for _, n in cands[0].exponents)
