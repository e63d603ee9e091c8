import pytest
import sympy as sp

from elemps.algebra.poly import X
from elemps.errors import AssociatedUnsolved
from elemps.odes1 import SUBSOLVERS, solve_first_order

t, w = sp.symbols("t w")


def _constant_along(G, rhs):
    return sp.simplify(sp.diff(G, t) + rhs * sp.diff(G, w)) == 0 and sp.diff(G, w) != 0


@pytest.mark.parametrize("rhs, expected", [
    (w / t, "separable"),
    (w**2 - w, "separable"),
    ((t**2 + w**2) / (t * w), None),  # homogeneous, also exact after an integrating factor
    (t - w, "linear"),
    (-w / t + t**2, None),
    (w / t + w**2, None),  # Bernoulli
])
def test_subsolvers_return_a_verified_constant(rhs, expected):
    G, name = solve_first_order(rhs, t, w)
    assert _constant_along(G, rhs)
    if expected:
        assert name == expected


def test_parameters_are_carried_along():
    G, _ = solve_first_order(w * X / t, t, w, (X,))
    assert sp.simplify(sp.diff(G, t) + w * X / t * sp.diff(G, w)) == 0


def test_nonelementary_antiderivative_is_kept_as_an_integral():
    G, name = solve_first_order(2 * t * w + 1, t, w)
    assert name == "linear"
    assert G.has(sp.Integral)


def test_unsolvable_raises():
    with pytest.raises(AssociatedUnsolved):
        solve_first_order(w**3 + t, t, w)


def test_chain_order_is_configurable():
    names = [name for name, _ in SUBSOLVERS]
    assert names[0] == "separable"
    with pytest.raises(AssociatedUnsolved):
        solve_first_order(t - w, t, w, chain=[SUBSOLVERS[0]])
