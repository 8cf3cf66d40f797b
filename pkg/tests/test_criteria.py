import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aniso_bvp.criteria import (
    READINGS,
    ExponentCaseError,
    check_three_point_conditions,
    criteria_report,
    estimate_rprime_sprime,
    global_inf_vs_sup,
    lambda_star_anticoercive,
    lambda_star_coercive,
    lambda_star_mpa,
    min_on_ball_vs_global,
    radius_condition,
    rprime_lower_bound,
    size_exponent,
    sprime_upper_bound,
    verify_mpa_bound,
)
from aniso_bvp.energy import ProblemSpec, energy, functional_j
from aniso_bvp.nonlinearity import Nonlinearity, NodeFunction, Term
from aniso_bvp.sequence_space import ExponentProfile, modular, sup_norm

from conftest import random_term_nl

P2 = ExponentProfile.constant(2, 1)


def linear_nl(hyp, coeffs, q=1.0, T=1, terms=(Term(1.0, 0.0, 1),)):
    return Nonlinearity(tuple(NodeFunction(terms) for _ in range(T)), q=[q] * T, hypotheses={hyp: coeffs})


def test_coercive_threshold_value():
    lam = lambda_star_coercive(1, P2, linear_nl("H1", {"a": [1.0], "b": [0.0]}))
    # C1 = 1, c_2(1) = 1/2
    assert lam.value == pytest.approx(2.0, rel=1e-10) and not lam.all_lambda


def test_coercive_sentinel_and_errors():
    P4 = ExponentProfile.constant(4, 1)
    assert lambda_star_coercive(1, P4, linear_nl("H1", {"a": [1.0], "b": [0.0]})).all_lambda
    with pytest.raises(ExponentCaseError):
        lambda_star_coercive(1, P2, linear_nl("H1", {"a": [1.0], "b": [0.0]}, q=3.0))
    with pytest.raises(ValueError):
        lambda_star_coercive(1, P2, linear_nl("H3", {"c": [1.0]}))


def test_coercive_homogeneity():
    a = lambda_star_coercive(2, ExponentProfile.constant(2, 2), linear_nl("H1", {"a": [1.0, 3.0], "b": 0.0}, T=2))
    b = lambda_star_coercive(2, ExponentProfile.constant(2, 2), linear_nl("H1", {"a": [2.0, 6.0], "b": 0.0}, T=2))
    assert b.value == pytest.approx(a.value / 2, rel=1e-14)


def test_anticoercive_threshold():
    nl = linear_nl("H2", {"a1": [1.0], "b1": [0.0]})
    lam = lambda_star_anticoercive(1, P2, nl)
    # literal exponent 2/(3 - 1) = 1: (2/2) * 2 * 2^2 / (1 * 2^1)
    assert lam.value == pytest.approx(4.0)
    doubled = lambda_star_anticoercive(1, P2, linear_nl("H2", {"a1": [2.0], "b1": [0.0]}))
    assert doubled.value == pytest.approx(lam.value / 2, rel=1e-14)
    sentinel = lambda_star_anticoercive(1, P2, linear_nl("H2", {"a1": [1.0], "b1": [0.0]}, q=2.0))
    assert sentinel.all_lambda
    with pytest.raises(ExponentCaseError):
        lambda_star_anticoercive(1, ExponentProfile.constant(3, 1), nl)


def test_anticoercive_against_rays():
    # f = t: J(x) = x^2 - lam x^2/2 turns anti-coercive exactly past lam = 2
    nl = linear_nl("H2", {"a1": [1.0], "b1": [0.0]})
    spec = ProblemSpec(1, P2, nl, 1.0)
    lams = np.linspace(0.5, 10, 951)
    lead = [energy(spec.with_lambda(l), [0, 1e3, 0]) / 1e6 for l in lams]
    sampled = lams[np.argmax(np.array(lead) < 0)]
    assert sampled == pytest.approx(2.0, abs=0.02)
    for reading in READINGS:
        star = lambda_star_anticoercive(1, P2, nl, reading).value
        assert star >= sampled - 0.02
        above = spec.with_lambda(star * 1.01)
        assert energy(above, [0, 1e3, 0]) < energy(above, [0, 1e2, 0]) < energy(above, [0, 10, 0])


def test_size_exponent_readings():
    assert size_exponent(1.0, "literal") == 1.0
    assert size_exponent(1.0, "alt") == 0.5
    assert size_exponent(3.0, "derived") == -1.0
    with pytest.raises(ExponentCaseError):
        size_exponent(3.0, "literal")
    with pytest.raises(ValueError):
        size_exponent(1.0, "other")


def test_mpa_formula_properties():
    nl = linear_nl("H3", {"c": [2.0, 2.0]}, q=2.0, T=2, terms=(Term(2.0, 0.0, gamma=2.0),))
    P = ExponentProfile.constant(3, 2)
    zero = lambda_star_mpa(2, P, nl, 0.0)
    assert zero.value == pytest.approx((3 / 3) * 3 * 2**3 / (2 * 3**2.0))
    assert lambda_star_mpa(2, P, nl, -1.0).value > zero.value > lambda_star_mpa(2, P, nl, 0.5).value
    assert lambda_star_mpa(2, P, nl, 5.0).all_lambda
    with pytest.raises(ValueError):
        lambda_star_mpa(2, P, linear_nl("H3", {"c": [0.0, 1.0]}, q=2.0, T=2), 0.0)
    halved = lambda_star_mpa(2, P, linear_nl("H3", {"c": [4.0, 4.0]}, q=2.0, T=2), 0.0)
    assert halved.value == pytest.approx(zero.value / 2, rel=1e-14)


@pytest.mark.parametrize("M", [0.0, -1.0])
@pytest.mark.parametrize("reading", ["alt", "derived"])
def test_mpa_sphere_bound_holds(M, reading):
    nl = linear_nl("H3", {"c": [2.0, 2.0]}, q=2.0, T=2, terms=(Term(2.0, 0.0, gamma=2.0),))
    P = ExponentProfile.constant(3, 2)
    lam = lambda_star_mpa(2, P, nl, M, reading)
    assert verify_mpa_bound(2, P, nl, lam.value, M).passed


def test_mpa_literal_reading_counterexample():
    # the literal exponent gives a lambda too small for the sphere bound here
    nl = linear_nl("H3", {"c": [2.0, 2.0]}, q=2.0, T=2, terms=(Term(2.0, 0.0, gamma=2.0),))
    P = ExponentProfile.constant(3, 2)
    lam = lambda_star_mpa(2, P, nl, 0.0, "literal")
    check = verify_mpa_bound(2, P, nl, lam.value, 0.0)
    assert not check.passed and check.max_energy > 0.1 and check.witness is not None


def test_three_point_conditions_example(example):
    res = check_three_point_conditions(example.T, example.p, example.nl, 0.2, 3.0)
    c = res["conditions"]
    assert res["sup_ball"][0] == pytest.approx(0, abs=1e-10)
    assert res["sup_ball"][1] == pytest.approx(1e-4, abs=1e-10)
    assert res["sup_annulus"][1] == pytest.approx(0, abs=1e-10)
    assert res["sup_reals"][0] == math.inf
    assert c["global_sup_gap"].holds
    assert c["annulus_bound"].holds
    rows = c["annulus_bound"].values["per_node"]
    assert rows[0]["sup_annulus"] == pytest.approx(-0.03992) and rows[0]["bound"] == pytest.approx(-1e-4)
    # F(1,t)/t^4 -> 1/20: the tail condition genuinely fails for this f
    assert not c["tail_growth"].holds
    with pytest.raises(ValueError):
        check_three_point_conditions(example.T, example.p, example.nl, 3.0, 0.2)


def test_radius_bounds_example(example):
    assert rprime_lower_bound(1, 2, example.p) == pytest.approx(0.5 * (4 / 3) ** 0.2, rel=1e-15)
    assert sprime_upper_bound(1, 2, example.p) == pytest.approx(1.5 * 5**0.25, rel=1e-15)
    rc = radius_condition(1.0, 0.2, 3.0, 2, example.p)
    assert rc["holds"]
    assert rprime_lower_bound(0.36, 1, P2) == pytest.approx(0.3)
    with pytest.raises(ValueError):
        rprime_lower_bound(0.0, 1, P2)


def test_radii_closed_form():
    for r, s in ((0.3, 0.7), (1.0, 4.0), (2.0, 50.0)):
        rad = estimate_rprime_sprime(r, s, 1, P2)
        assert rad.r_prime == pytest.approx(math.sqrt(r), rel=1e-12)
        assert rad.s_prime == pytest.approx(math.sqrt(s), rel=1e-12)
    with pytest.raises(ValueError):
        estimate_rprime_sprime(2.0, 1.0, 1, P2)


def test_radii_definition_by_brute_force():
    # T = 2: scan a fine grid for inf ||u||_inf on {mu >= r} and sup on {mu <= s}
    p = ExponentProfile([4, 5, 4])
    r, s = 0.5, 3.0
    rad = estimate_rprime_sprime(r, s, 2, p)
    t = np.linspace(-3, 3, 1201)
    X, Y = np.meshgrid(t, t, indexing="ij")
    mu = np.abs(X) ** 4 / 4 + np.abs(Y - X) ** 5 / 5 + np.abs(Y) ** 4 / 4
    sup = np.maximum(np.abs(X), np.abs(Y))
    assert np.min(sup[mu >= r]) == pytest.approx(rad.r_prime, abs=6e-3)
    assert np.max(sup[mu <= s]) == pytest.approx(rad.s_prime, abs=6e-3)
    assert np.min(sup[mu >= r]) >= rad.r_prime - 1e-12
    assert np.max(sup[mu <= s]) <= rad.s_prime + 1e-12


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 5), st.floats(0.05, 5), st.floats(1.1, 10), st.integers(0, 1000))
def test_radii_respect_bounds(T, r, ratio, seed):
    p = ExponentProfile(np.random.default_rng(seed).uniform(1.5, 6, T + 1))
    rad = estimate_rprime_sprime(r, r * ratio, T, p)
    # the lower bound uses x^{1/p(k-1)} >= x^{1/p+}, true only for x = r p-/(T+1) >= 1
    if r * p.p_minus / (T + 1) >= 1:
        assert rad.r_prime >= rad.r_prime_lower_bound - 1e-8
    assert rad.s_prime <= rad.s_prime_upper_bound + 1e-8
    assert 0 < rad.r_prime <= rad.s_prime


def test_rprime_bound_counterexample_below_unit_base():
    p = ExponentProfile([4.36632759, 2.71404021, 1.68438086, 1.57437436, 5.15971608])
    u = np.concatenate(([0.0], 0.3873 * np.array([1, -1, 1, -1]), [0.0]))
    assert modular(u, p) >= 1.0
    assert sup_norm(u) < rprime_lower_bound(1.0, 4, p) - 0.01
    assert estimate_rprime_sprime(1.0, 2.0, 4, p).r_prime == pytest.approx(0.38724, abs=1e-5)


def test_radii_monotone():
    p = ExponentProfile([2, 3, 2.5, 4])
    rs = [0.1, 0.5, 1.0, 2.0, 8.0]
    est = [estimate_rprime_sprime(r, 2 * r, 3, p) for r in rs]
    assert all(b.r_prime >= a.r_prime for a, b in zip(est, est[1:]))
    assert all(b.s_prime >= a.s_prime for a, b in zip(est, est[1:]))


def test_box_infimum_examples(example):
    cmp = min_on_ball_vs_global(2, example.p, example.nl, 3.0)
    assert cmp.agree and cmp.formula == pytest.approx(-1e-4, abs=1e-12)
    neg = Nonlinearity((NodeFunction((Term(-1.0, 0.0, 1),)), NodeFunction((Term(-4.0, 0.0, 3),))))
    both = min_on_ball_vs_global(2, example.p, neg, 2.0)
    assert both.box_inf == pytest.approx(0, abs=1e-14) and both.formula == 0
    lin = Nonlinearity((NodeFunction((Term(1.0, 0.0, 1),)),))
    one = min_on_ball_vs_global(1, P2, lin, 1.0)
    assert one.box_inf == pytest.approx(-0.5, abs=1e-12) and one.formula == pytest.approx(-0.5, abs=1e-15)


def test_box_infimum_brute_force():
    rng = np.random.default_rng(4)
    for _ in range(10):
        T = int(rng.integers(1, 4))
        nl = random_term_nl(rng, T)
        spec = ProblemSpec(T, ExponentProfile.constant(2, T), nl)
        sigma = 1.5
        axis = np.linspace(-sigma, sigma, 121 if T < 3 else 41)
        best = min(functional_j(spec, np.array(x)) for x in itertools.product(axis, repeat=T))
        cmp = min_on_ball_vs_global(T, spec.p, nl, sigma)
        assert cmp.formula <= best + 1e-12
        assert best - cmp.formula < 0.5  # a coarse grid only approaches the infimum from above


def test_global_infimum(example):
    cmp = global_inf_vs_sup(example.nl)
    assert cmp.formula == -math.inf and cmp.agree
    bounded = Nonlinearity((NodeFunction((Term(-4.0, 0.1, 3),)), NodeFunction((Term(-1.0, 2.0, 1),))))
    cmp = global_inf_vs_sup(bounded)
    assert cmp.agree and cmp.formula == pytest.approx(-(1e-4 + 2.0), abs=1e-12)


def test_report(example):
    rep = criteria_report(example, 0.2, 3.0, c=1.0)
    assert rep["gaps"]["coercive_gap"] == 0 and rep["gaps"]["anticoercive_gap"] == 1
    assert rep["lambda_star"]["coercive"]["value"] > 0
    assert "unavailable" in rep["lambda_star"]["anticoercive"]
    assert rep["three_point"]["conditions"]["annulus_bound"]["holds"]
    assert rep["radius_condition"]["holds"] and rep["box_infimum"]["agree"]
    for entry in rep["lambda_star"].values():
        if entry.get("value") is not None:
            assert entry["value"] > 0 and entry["inputs"]
