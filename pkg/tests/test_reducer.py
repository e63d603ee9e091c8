import pytest
import sympy as sp

from cases import ODES, SYSTEMS
from elemps.algebra.poly import U, X, Y
from elemps.errors import MultipleTowersError, UnsupportedInputError
from elemps.parser import parse_ode
from elemps.reducer import (Method, Tag, build_system, classify, exponential_form, ratio_matches,
                            rewrite_to_single_u, system_summary)


def _proportional(system, expected):
    got = [p.as_expr() for p in system.components()]
    ratios = {sp.cancel(a / sp.expand(b)) for a, b in zip(got, expected)}
    return len(ratios) == 1 and not ratios.pop().free_symbols


@pytest.mark.parametrize("name", sorted(SYSTEMS))
def test_reference_systems(name):
    ode = parse_ode(ODES[name])
    system = build_system(ode)
    assert _proportional(system, SYSTEMS[name])
    assert ratio_matches(system, ode)


@pytest.mark.parametrize("name, tag", [
    ("log_shift", Tag.LOG_RATIONAL),
    ("exp_quadratic", Tag.EXP_POLY),
    ("exp_ratio", Tag.EXP_RATIONAL),
    ("log_product", Tag.LOG_RATIONAL),
])
def test_classification_tags(name, tag):
    assert classify(parse_ode(ODES[name])).tag == tag


def test_pure_rational_ode_uses_u_equal_x():
    system = build_system(parse_ode("diff(y(x),x) = (x - y(x))/x"))
    assert system.tag == Tag.RATIONAL
    assert system.record.original == X
    assert ratio_matches(system, parse_ode("diff(y(x),x) = (x - y(x))/x"))


def test_sin_and_cos_share_one_exponential_generator():
    system = build_system(parse_ode(ODES["sin_cos"]))
    assert system.record.original == sp.exp(sp.I * X)
    assert system.tag == Tag.TRIG


def test_self_generator_for_tan_under_method_one():
    system = build_system(parse_ode(ODES["tan_self"]), Method.TRIG_METHOD_1)
    assert system.record.original == sp.tan((X - Y) / (X * Y))
    assert system.method == Method.TRIG_METHOD_1


def test_commensurate_exponentials_share_one_generator():
    ode = rewrite_to_single_u(parse_ode("diff(y(x),x) = exp(2*x) + exp(x)"))
    assert sp.expand(ode.M - (sp.exp(X)**2 + sp.exp(X))) == 0
    system = build_system(parse_ode("diff(y(x),x) = exp(2*x) + exp(x)"))
    assert system.record.original == sp.exp(X)


def test_transcendental_constant_offsets_are_unsupported():
    # exp(2x + 1) = e * exp(x)^2 needs the constant e in the coefficient field
    with pytest.raises(UnsupportedInputError):
        build_system(parse_ode("diff(y(x),x) = exp(2*x+1) + exp(x)"))


@pytest.mark.parametrize("text", [
    "diff(y(x),x) = exp(x^2-1) + exp(x^3-1)*y(x)",
    "diff(y(x),x) = sin(x) + cos(x^2-x)*y(x)",
])
def test_incompatible_heads_raise_multiple_towers(text):
    with pytest.raises(MultipleTowersError) as info:
        build_system(parse_ode(text))
    assert isinstance(info.value, UnsupportedInputError)
    assert "MultipleTowersError" in str(info.value) or info.type.__name__ == "MultipleTowersError"


@pytest.mark.parametrize("head", [sp.sin, sp.cos, sp.tan, sp.sinh, sp.cosh, sp.tanh, sp.sec, sp.coth])
def test_exponential_forms_agree_numerically(head):
    t = sp.Symbol("t")
    a = sp.Rational(3, 7)
    trig = head in (sp.sin, sp.cos, sp.tan, sp.sec)
    value = sp.exp(sp.I * a) if trig else sp.exp(a)
    assert abs(complex(sp.N(exponential_form(head, t).subs(t, value) - head(a)))) < 1e-12


def test_system_summary_keys():
    summary = system_summary(build_system(parse_ode(ODES["log_shift"])))
    assert set(summary) == {"f", "g", "h", "u_definition"}
    assert summary["u_definition"] == "log(x - 5)"


def test_clearing_keeps_polynomial_components():
    system = build_system(parse_ode(ODES["exp_ratio"]))
    for p in system.components():
        assert p.free_variables() <= {X, Y, U}
