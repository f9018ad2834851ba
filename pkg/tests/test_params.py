import json
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dgsym.params import (DGParams, GaugeElement, as_rational, canonical_gauge,
                          classify, compute_invariants, gauge_act_params,
                          gauge_compose, gauge_identity, gauge_inverse,
                          make_ehr_sub, make_exp_sub, make_fin_sub,
                          make_gal_sub, make_inf_sub, make_infa_sub, make_sym3,
                          predicate_report, rational_str, reference_points)

F = Fraction

rationals = st.fractions(min_value=-4, max_value=4, max_denominator=8)
nonzero = rationals.filter(lambda q: q != 0)


def generic_params(n=1):
    return st.builds(
        lambda nu1, nu2, mu0, mu1, mu2, mu3, mu4, mu5: DGParams(
            n=n, nu1=nu1, nu2=nu2, mu0=mu0, mu1=mu1, mu2=mu2, mu3=mu3,
            mu4=mu4, mu5=mu5),
        nonzero, *[rationals] * 7)


def subfamily_params():
    """Stratified strategy: generic points plus every subfamily."""
    return st.one_of(
        generic_params(),
        st.builds(lambda a, b, c, d, e: make_gal_sub(1, a, b, c, d, e),
                  nonzero, rationals, rationals, rationals, rationals),
        st.builds(lambda a, b, c: make_fin_sub(1, a, b, c),
                  nonzero, rationals, rationals),
        st.builds(lambda a, b, c: make_inf_sub(1, a, b, c),
                  nonzero, rationals, rationals),
        st.builds(lambda a, b: make_infa_sub(1, a, b), nonzero, rationals),
        st.builds(lambda a, b: make_sym3(1, a, b), nonzero, rationals),
        ehr_params(),
        exp_params(),
    )


def ehr_params():
    return st.builds(
        lambda nu1, nu2, mu2: (nu1, nu2, mu2),
        nonzero, rationals, rationals,
    ).filter(lambda t: t[2] != 2 * t[1] ** 2 / t[0]).map(
        lambda t: make_ehr_sub(1, *t))


def exp_params():
    return st.builds(
        lambda nu1, nu2, mu1, mu3: (nu1, nu2, mu1, mu3),
        nonzero, rationals, rationals, rationals,
    ).filter(lambda t: t[2] != 2 * t[1] and t[3] != -t[0]).map(
        lambda t: make_exp_sub(1, *t))


def gauges():
    return st.builds(GaugeElement, nonzero, rationals)


# ---------------------------------------------------------------------------
# rationals and construction

def test_as_rational():
    assert as_rational("3/4") == F(3, 4)
    assert as_rational(-2) == F(-2)
    assert as_rational(F(1, 3)) == F(1, 3)
    with pytest.raises(TypeError):
        as_rational(0.5)
    assert rational_str(F(-3, 7)) == "-3/7"
    assert rational_str(F(4)) == "4"


def test_invalid_params():
    with pytest.raises(ValueError):
        DGParams(n=1, nu1=0)
    with pytest.raises(ValueError):
        DGParams(n=0, nu1=1)
    with pytest.raises(ValueError):
        GaugeElement(0, 1)


def test_json_round_trip(tmp_path):
    p = reference_points()["linear-se"]
    path = tmp_path / "p.json"
    p.dump(path)
    assert DGParams.load(path) == p
    with pytest.raises(ValueError):
        DGParams.from_json_dict({"n": 1, "nu1": "1", "bogus": "2"})
    with pytest.raises(ValueError):
        DGParams.from_json_dict({"nu1": "1"})


# ---------------------------------------------------------------------------
# invariants

def test_invariants_trivial_point():
    p = DGParams(n=1, nu1=1)
    inv = compute_invariants(p)
    assert inv.as_tuple() == (F(0), F(0), F(0), F(1), F(0), F(0))


def test_invariants_linear_se_point():
    p = reference_points()["linear-se"]
    inv = compute_invariants(p)
    assert inv.iota1 == F(1, 2)
    assert (inv.iota2, inv.iota3, inv.iota4, inv.iota5) == (0, 0, 0, 0)


def test_invariants_sym1c_point():
    p = reference_points()["sym1c"]
    inv = compute_invariants(p)
    assert inv.iota1 == 1
    assert (inv.iota2, inv.iota3, inv.iota4, inv.iota5) == (0, 0, 0, 0)


# ---------------------------------------------------------------------------
# gauge group

def test_compose_example():
    g = gauge_compose(GaugeElement(2, 1), GaugeElement(3, 5))
    assert (g.Lambda, g.gamma) == (6, 11)


def test_identity_and_inverse():
    g = GaugeElement(-2, 7)
    e = gauge_identity()
    assert gauge_compose(g, e) == g
    assert gauge_compose(e, g) == g
    assert gauge_compose(g, gauge_inverse(g)) == e
    assert gauge_inverse(GaugeElement(2, 4)) == GaugeElement(F(1, 2), -2)
    assert gauge_inverse(GaugeElement(-1, 3)) == GaugeElement(-1, 3)


@given(gauges(), gauges(), gauges())
@settings(max_examples=60, deadline=None)
def test_associativity(g1, g2, g3):
    assert gauge_compose(gauge_compose(g1, g2), g3) == \
        gauge_compose(g1, gauge_compose(g2, g3))


def test_gauge_act_example():
    p = reference_points()["sym1c"]
    q = gauge_act_params(GaugeElement(2, 3), p)
    assert q.nu1 == F(1, 2)
    assert q.nu2 == F(-3, 4)
    assert q.mu1 == F(-3, 2)
    assert q.mu2 == F(17, 4)
    assert compute_invariants(q).iota1 == compute_invariants(p).iota1 == 1


def test_gauge_act_identity():
    p = reference_points()["generic"]
    assert gauge_act_params(gauge_identity(), p) == p


@given(gauges(), gauges(), generic_params())
@settings(max_examples=60, deadline=None)
def test_left_action_law(g1, g2, p):
    lhs = gauge_act_params(g1, gauge_act_params(g2, p))
    rhs = gauge_act_params(gauge_compose(g1, g2), p)
    assert lhs == rhs


@given(gauges(), subfamily_params())
@settings(max_examples=120, deadline=None)
def test_gauge_invariance(g, p):
    q = gauge_act_params(g, p)
    assert compute_invariants(q) == compute_invariants(p)
    assert classify(q).tag == classify(p).tag


@given(gauges(), exp_params())
@settings(max_examples=60, deadline=None)
def test_gauge_invariance_exp_subfamily(g, p):
    assert classify(p).tag in ("Sym4", "Sym0a")
    q = gauge_act_params(g, p)
    assert classify(q).tag == classify(p).tag


# ---------------------------------------------------------------------------
# canonical gauge

def test_canonical_gauge_examples():
    p = DGParams(n=1, nu1=1, mu2=F(1, 3))
    g, q = canonical_gauge(p)
    assert g == gauge_identity() and q == p

    p = reference_points()["linear-se"]
    g, q = canonical_gauge(p)
    assert (g.Lambda, g.gamma) == (-1, 0)
    assert q.nu1 == 1 and q.mu1 == 0


@given(generic_params())
@settings(max_examples=60, deadline=None)
def test_canonical_gauge_normalizes(p):
    _, q = canonical_gauge(p)
    assert q.nu1 == 1 and q.mu1 == 0
    assert compute_invariants(q) == compute_invariants(p)


# ---------------------------------------------------------------------------
# classification

def test_classify_examples(pts):
    assert classify(pts["linear-se"]).tag == "Sym1c"
    assert classify(pts["sym1b"]).tag == "Sym1b"
    # degenerate all-zero point: the affine predicate holds with mu3 = 0,
    # so the more symmetric class wins over the generic one
    assert classify(DGParams(n=1, nu1=1)).tag == "Sym2"


def test_classify_reference_points(pts):
    expected = {
        "linear-se": "Sym1c", "sym1b": "Sym1b", "sym1c": "Sym1c",
        "sym1b-nu2": "Sym1b", "sym1c-nu2": "Sym1c", "galsub": "Sym1",
        "finsub": "Sym2", "sym3": "Sym3", "sym3-nu2": "Sym3",
        "infsub": "Sym0a", "infasub": "Sym2a", "expsub": "Sym4",
        "expsub-nu2": "Sym4", "generic": "Sym0",
    }
    for key, tag in expected.items():
        assert classify(pts[key]).tag == tag, key


def test_predicate_report_exposed(pts):
    cls = classify(pts["sym3"])
    assert cls.predicates["GalSub"] and cls.predicates["FinSub"]
    assert not cls.predicates["EhrSub"]


@given(ehr_params())
@settings(max_examples=60, deadline=None)
def test_ehr_subfamily_invariant_form(p):
    inv = compute_invariants(p)
    assert inv.iota1 != 0
    assert (inv.iota2, inv.iota3, inv.iota4, inv.iota5) == (0, 0, 0, 0)
    assert classify(p).tag == ("Sym1b" if inv.iota1 < 0 else "Sym1c")


@given(st.builds(lambda a, b, c: make_inf_sub(1, a, b, c),
                 nonzero, rationals, rationals))
@settings(max_examples=60, deadline=None)
def test_inf_subfamily_invariant_form(p):
    inv = compute_invariants(p)
    assert inv.iota1 == 0 and inv.iota5 == 0
    assert inv.iota3 == -1
    assert inv.iota4 == inv.iota2


@given(st.builds(lambda a, b, c, d, e: make_gal_sub(1, a, b, c, d, e),
                 nonzero, rationals, rationals, rationals, rationals))
@settings(max_examples=60, deadline=None)
def test_gal_subfamily_invariant_form(p):
    inv = compute_invariants(p)
    assert inv.iota3 == 0 and inv.iota4 == 0


@given(st.builds(lambda a, b, c: make_fin_sub(1, a, b, c),
                 nonzero, rationals, rationals))
@settings(max_examples=60, deadline=None)
def test_fin_subfamily_invariant_form(p):
    inv = compute_invariants(p)
    assert (inv.iota1, inv.iota2, inv.iota4, inv.iota5) == (0, 0, 0, 0)


@given(exp_params())
@settings(max_examples=60, deadline=None)
def test_exp_subfamily_invariant_form(p):
    """Dual route: the raw conditions are equivalent to invariant relations."""
    i = compute_invariants(p)
    assert i.iota2 != 0 and i.iota3 != 0
    assert i.iota4 == (1 - i.iota3) * i.iota2 / 2
    assert i.iota1 == (i.iota3 ** 2 - 1) * i.iota2 ** 2 / (8 * i.iota3 ** 2)
    assert i.iota5 == i.iota1 * i.iota3


def test_exp_predicate_rejects_perturbation(pts):
    p = pts["expsub-nu2"]
    assert predicate_report(p)["ExpSub"]
    q = p.replace(mu2=p.mu2 + F(1, 1000))
    assert not predicate_report(q)["ExpSub"]


def classify_by_invariants(p):
    """Independent route: classify from the invariant coordinates alone."""
    i = compute_invariants(p)
    ehr = (i.iota2, i.iota3, i.iota4, i.iota5) == (0, 0, 0, 0) and i.iota1 != 0
    inf = i.iota1 == 0 and i.iota5 == 0 and i.iota3 == -1 and i.iota4 == i.iota2
    gal = i.iota3 == 0 and i.iota4 == 0
    fin = (i.iota1, i.iota2, i.iota4, i.iota5) == (0, 0, 0, 0)
    exp = (i.iota2 != 0 and i.iota3 != 0
           and i.iota4 == (1 - i.iota3) * i.iota2 / 2
           and i.iota1 == (i.iota3 ** 2 - 1) * i.iota2 ** 2 / (8 * i.iota3 ** 2)
           and i.iota5 == i.iota1 * i.iota3)
    if ehr:
        return "Sym1b" if i.iota1 < 0 else "Sym1c"
    if inf:
        return "Sym2a" if i.iota2 == 0 else "Sym0a"
    if gal and fin:
        return "Sym3"
    if gal:
        return "Sym1"
    if fin:
        return "Sym2"
    if exp:
        return "Sym4"
    return "Sym0"


@given(subfamily_params())
@settings(max_examples=150, deadline=None)
def test_classifier_agrees_with_invariant_route(p):
    assert classify(p).tag == classify_by_invariants(p)


@given(gauges(), subfamily_params())
@settings(max_examples=80, deadline=None)
def test_invariant_route_after_gauge(g, p):
    q = gauge_act_params(g, p)
    assert classify(q).tag == classify_by_invariants(q)
