import sympy as sp
import pytest
from hypothesis import given, settings, strategies as st

from elemps.algebra.poly import BASE_VARS, MultiPoly, U, X, Y
from elemps.algebra.ratfunc import RatFunc
from elemps.errors import NonElementaryResidual
from elemps.quadrature import RSPair, integrate_rational, integrate_rational_parts, iterated_integral
from elemps.reducer import System3D


def _rf(e):
    return RatFunc.from_expr(e, BASE_VARS)


@pytest.mark.parametrize("expr, v", [
    (1 / X, X),
    (1 / (X**2 - 1), X),
    (1 / (X**2 + 1), X),  # splits over QQ(i)
    ((Y + 1) / (X * Y - 1), X),
    (X**3 / (X + Y) ** 2, X),
    (3 * U**2 - 2 * U, U),
    (1 / ((X - Y) * (X + 2 * Y) ** 3), Y),
])
def test_derivative_of_antiderivative(expr, v):
    F = integrate_rational(_rf(expr), v)
    assert sp.cancel(sp.diff(F, v) - expr) == 0


def test_logarithmic_part_is_reported():
    parts = integrate_rational_parts(_rf(2 * X / (X**2 - Y)), X)
    assert parts.logs
    assert not parts.integrals


_c = st.sampled_from([-2, -1, 1, 2, 3, sp.Rational(1, 3)])
_m = st.tuples(st.integers(0, 2), st.integers(0, 1), st.integers(0, 1))


@st.composite
def ratfuncs(draw):
    num = MultiPoly.from_terms(draw(st.dictionaries(_m, _c, min_size=1, max_size=3)), BASE_VARS)
    den = MultiPoly.from_terms(draw(st.dictionaries(_m, _c, min_size=1, max_size=3)), BASE_VARS)
    return RatFunc(num, den)


@settings(max_examples=80, deadline=None)
@given(ratfuncs(), st.sampled_from(BASE_VARS))
def test_round_trip_property(e, v):
    F = integrate_rational(e, v)
    assert sp.cancel(sp.diff(F, v) - e.as_expr()) == 0


def test_iterated_integral_of_a_gradient_pair():
    # x' = 1, y' = 0, u' = 0 has I = y; I_y = r f gives r = 1, s = 0
    system = System3D.from_polys(1, 0, 0)
    one, zero = _rf(1), _rf(0)
    I = iterated_integral(RSPair(one, zero), system)
    assert sp.simplify(I.value - Y) == 0


def test_iterated_integral_rejects_trivial_pair():
    system = System3D.from_polys(1, 0, 0)
    with pytest.raises(NonElementaryResidual):
        iterated_integral(RSPair(_rf(0), _rf(0)), system)


def test_incompatible_pair_is_detected():
    # r = x is not an integrating factor for this system: the second quadrature still sees x
    system = System3D.from_polys(1, Y, 0)
    with pytest.raises(NonElementaryResidual):
        iterated_integral(RSPair(_rf(X), _rf(0)), system)
