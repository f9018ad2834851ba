from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dgsym.symexpr import (SymExpr, VectorFieldSpec, lie_bracket, parse_expr,
                           parse_poly)

F = Fraction


def v(name, n=1):
    return SymExpr.var(n, name)


def c(value, n=1):
    return SymExpr.const(n, value)


# ---------------------------------------------------------------------------
# arithmetic and differentiation

def test_differentiate_power():
    e = v("x1") ** 2 * v("t")
    assert e.differentiate("x1") == 2 * v("x1") * v("t")


def test_differentiate_exponential():
    e = SymExpr.exp_rs(1, 2, 1)
    assert e.differentiate("r") == 2 * e
    assert e.differentiate("s") == e


def test_differentiate_mixed():
    e = v("x1") * SymExpr.exp_rs(1, 1, -1) + v("s") ** 2
    got = e.differentiate("s")
    want = -1 * v("x1") * SymExpr.exp_rs(1, 1, -1) + 2 * v("s")
    assert got == want


def test_is_zero():
    assert (v("x1") - v("x1")).is_zero
    assert (SymExpr.exp_rs(1, 1, 0) * SymExpr.exp_rs(1, 0, 1)
            - SymExpr.exp_rs(1, 1, 1)).is_zero
    assert not (2 * v("r") + v("s")).is_zero


def test_unknown_variable():
    with pytest.raises(KeyError):
        v("x1").differentiate("x2")
    with pytest.raises(KeyError):
        SymExpr.var(1, "y")


def test_pow_errors():
    with pytest.raises(ValueError):
        v("x1") ** -1


def test_evaluate_arrays():
    e = 3 * v("x1") ** 2 - F(1, 2) * v("s") + SymExpr.exp_rs(1, 1, 0)
    x = np.array([0.0, 1.0, 2.0])
    vals = {"x1": x, "t": 0.0, "r": np.log(2.0) * np.ones(3), "s": 4.0 * np.ones(3)}
    np.testing.assert_allclose(e.evaluate(vals), 3 * x ** 2 - 2.0 + 2.0)


# ---------------------------------------------------------------------------
# parser

def test_parse_round_trip_values():
    e = parse_expr("2*x1^2*t - 3/4*s + exp(2*r + s) - 1", 1)
    vals = {"x1": 2.0, "t": 3.0, "r": 0.1, "s": 0.2}
    want = 2 * 4 * 3 - 0.75 * 0.2 + np.exp(0.4) - 1
    assert abs(e.evaluate(vals) - want) < 1e-12


def test_parse_unary_minus_and_parens():
    e = parse_expr("-(x1 - 2)^2", 1)
    assert abs(e.evaluate({"x1": 5.0, "t": 0, "r": 0, "s": 0}) + 9.0) < 1e-14


def test_parse_exp_restrictions():
    with pytest.raises(ValueError):
        parse_expr("exp(x1)", 1)
    with pytest.raises(ValueError):
        parse_expr("exp(r^2)", 1)
    with pytest.raises(ValueError):
        parse_expr("exp(exp(r))", 1)
    with pytest.raises(ValueError):
        parse_expr("x1 +", 1)
    with pytest.raises(ValueError):
        parse_expr("x1 $ 2", 1)


def test_parse_poly():
    assert parse_poly("1 + z^2 - 3/2*z") == (F(1), F(-3, 2), F(1))
    assert parse_poly("z^3") == (F(0), F(0), F(0), F(1))
    with pytest.raises(ValueError):
        parse_poly("exp(z)")


# ---------------------------------------------------------------------------
# properties

terms = st.lists(
    st.tuples(
        st.fractions(min_value=-3, max_value=3, max_denominator=4),
        st.integers(min_value=0, max_value=2),
        st.integers(min_value=0, max_value=2),
        st.integers(min_value=0, max_value=2),
        st.fractions(min_value=-2, max_value=2, max_denominator=2),
    ),
    min_size=1, max_size=4)


def build(ts):
    e = SymExpr.zero(1)
    for coeff, px, pr, ps, a in ts:
        e = e + coeff * v("x1") ** px * v("r") ** pr * v("s") ** ps \
            * SymExpr.exp_rs(1, a, 0)
    return e


@given(terms)
@settings(max_examples=80, deadline=None)
def test_derivatives_commute(ts):
    e = build(ts) * v("t")
    assert e.differentiate("x1").differentiate("t") == \
        e.differentiate("t").differentiate("x1")
    assert e.differentiate("r").differentiate("s") == \
        e.differentiate("s").differentiate("r")


@given(terms)
@settings(max_examples=60, deadline=None)
def test_normalization_sound(ts):
    """Different construction orders reach the same normal form and value."""
    e1 = build(ts)
    e2 = build(list(reversed(ts)))
    assert e1 == e2
    rng = np.random.default_rng(0)
    for _ in range(5):
        vals = {"x1": rng.uniform(-2, 2), "t": rng.uniform(-2, 2),
                "r": rng.uniform(-1, 1), "s": rng.uniform(-1, 1)}
        assert abs(e1.evaluate(vals) - e2.evaluate(vals)) < 1e-9


def _field(phi, sigma, xi=None, tau=None, n=1):
    z = SymExpr.zero(n)
    return VectorFieldSpec(n=n, xi=tuple(xi or [z] * n), tau=tau or z,
                           phi=phi, sigma=sigma)


def test_bracket_antisymmetry_and_bilinearity():
    X = _field(v("r") * v("s"), SymExpr.exp_rs(1, 1, 0))
    Y = _field(v("s") ** 2, v("r"))
    Z = _field(c(1), v("s"))
    assert (lie_bracket(X, X)).is_zero
    assert (lie_bracket(X, Y) + lie_bracket(Y, X)).is_zero
    lhs = lie_bracket(X, Y + Z.scale(F(3, 2)))
    rhs = lie_bracket(X, Y) + lie_bracket(X, Z).scale(F(3, 2))
    assert (lhs - rhs).is_zero


def test_jacobi_identity():
    X = _field(v("r"), v("s"), xi=[v("x1")], tau=v("t"))
    Y = _field(v("s"), c(1), xi=[v("t")], tau=c(0, 1))
    Z = _field(SymExpr.exp_rs(1, 1, 1), v("r") * v("s"))
    total = lie_bracket(X, lie_bracket(Y, Z)) \
        + lie_bracket(Y, lie_bracket(Z, X)) \
        + lie_bracket(Z, lie_bracket(X, Y))
    assert total.is_zero


def test_bracket_arity_mismatch():
    with pytest.raises(ValueError):
        lie_bracket(_field(c(1), c(1)), _field(c(1, 2), c(1, 2), n=2))


def test_normalization_exact_at_rational_points():
    """Two construction orders agree exactly at 100 random rational points."""
    from fractions import Fraction as Q
    import random
    rng = random.Random(5)
    a = (3 * v("x1") ** 2 - Q(1, 3) * v("t")) * (v("r") + 2 * v("s"))
    b = v("r") * (3 * v("x1") ** 2) + 2 * v("s") * (3 * v("x1") ** 2) \
        - Q(1, 3) * v("t") * v("r") - Q(2, 3) * v("t") * v("s")
    assert a == b
    for _ in range(100):
        point = {name: Q(rng.randint(-9, 9), rng.randint(1, 9))
                 for name in ("x1", "t", "r", "s")}
        assert a.subs_rational(point) == b.subs_rational(point)
