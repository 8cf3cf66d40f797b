import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aniso_bvp.energy import (
    ProblemSpec,
    classify,
    composite_energy,
    energy,
    gradient,
    hessian_warnings,
    literal_residual,
    morse_class,
    numeric_hessian,
    phi,
    strong_residual,
    truncate_value,
    truncated_phi,
)
from aniso_bvp.nonlinearity import Nonlinearity
from aniso_bvp.sequence_space import ExponentProfile, Sequence, modular

from conftest import cubic_spec, fd_gradient, random_spec, zero_spec


def test_spec_validation(example_nl):
    with pytest.raises(ValueError):
        ProblemSpec(2, ExponentProfile([4, 5, 4]), example_nl, 0.0)
    with pytest.raises(ValueError):
        ProblemSpec(3, ExponentProfile([4, 5, 4, 4]), example_nl)
    with pytest.raises(ValueError):
        ProblemSpec(2, ExponentProfile([4, 5]), example_nl)


def test_energy_examples(example, cubic):
    assert energy(zero_spec(3), np.zeros(3)) == 0.0
    assert energy(example, [0, 0, 0, 0]) == 0.0
    for x in (-1.5, 0.2, 3.0):
        assert energy(cubic, [0, x, 0]) == pytest.approx(x * x - x**4 / 4, abs=1e-13)
    # 0.5 - (F(1,1) + F(2,1)) with F(1,1) = -0.95 and F(2,1) = 1e-4 - 0.9^4
    assert energy(example, [0, 1, 1, 0]) == pytest.approx(0.5 + 0.95 + 0.9**4 - 1e-4, abs=1e-14)
    assert round(energy(example, [0, 1, 1, 0]), 4) == 2.1060


def test_input_forms_agree(example):
    full, inner = [0, 0.3, -0.7, 0], [0.3, -0.7]
    assert energy(example, full) == energy(example, inner) == energy(example, Sequence(full))
    with pytest.raises(ValueError):
        energy(example, [0, 1, 2, 3, 0])


def test_gradient_examples(cubic):
    assert np.all(gradient(zero_spec(3), np.zeros(3)) == 0)
    assert gradient(zero_spec(1), [0, 1, 0]).tolist() == [2.0]
    assert gradient(cubic, [0, math.sqrt(2), 0])[0] == pytest.approx(0.0, abs=1e-14)


def test_residual_examples(cubic):
    assert np.all(strong_residual(zero_spec(2), np.zeros(2)) == 0)
    # printed sign convention: (g(1) - g(0)) - lam f = (-1 - 1) - 1
    assert literal_residual(cubic, [0, 1, 0]).tolist() == [-3.0]
    # Euler-Lagrange sign: -gradient = -(2 - 1)
    assert strong_residual(cubic, [0, 1, 0]).tolist() == [-1.0]


def test_phi_at_zero():
    for p in (1.2, 1.5, 2.0, 3.0):
        assert phi(np.array([0.0]), p)[0] == 0.0
    assert phi(np.array([-2.0]), 3.0)[0] == -4.0


def test_fuzzed_identities():
    rng = np.random.default_rng(7)
    for _ in range(300):
        spec = random_spec(rng, 1.2, 5.0)
        x = rng.uniform(-3, 3, spec.T)
        g, r = gradient(spec, x), strong_residual(spec, x)
        assert np.max(np.abs(g + r)) <= 1e-12 * max(1.0, np.max(np.abs(g)))
        assert composite_energy(spec, x) == pytest.approx(energy(spec, x), rel=1e-12, abs=1e-12)


def test_gradient_finite_differences():
    rng = np.random.default_rng(8)
    for _ in range(200):
        spec = random_spec(rng)
        x = rng.uniform(-3, 3, spec.T)
        g = gradient(spec, x)
        assert np.all(np.abs(g - fd_gradient(spec, x)) / np.maximum(1, np.abs(g)) < 1e-6)


def test_gradient_fd_with_small_exponents_away_from_kinks():
    rng = np.random.default_rng(9)
    checked = 0
    while checked < 100:
        spec = random_spec(rng, 1.2, 2.0)
        x = rng.uniform(-3, 3, spec.T)
        if np.min(np.abs(np.diff(spec.values(x)))) <= 1e-3:
            continue
        g = gradient(spec, x)
        assert np.all(np.abs(g - fd_gradient(spec, x)) / np.maximum(1, np.abs(g)) < 1e-5)
        checked += 1


def test_composite_matches_energy_example(example):
    assert composite_energy(example, [0, 1, 1, 0]) == pytest.approx(energy(example, [0, 1, 1, 0]), abs=1e-14)
    assert composite_energy(example, [0, 0, 0, 0]) == 0.0


def test_truncated_phi():
    p = ExponentProfile.constant(2, 1)
    assert truncated_phi([0, 0, 0], p, 0.5, 2.0) == 0.0
    # mu(0, x, 0) = x^2
    assert truncated_phi([0, math.sqrt(0.5), 0], p, 0.5, 2.0) == pytest.approx(0.5)
    assert truncated_phi([0, 2.0, 0], p, 0.5, 2.0) == pytest.approx(2.5)  # mu = 2s gives s + r
    with pytest.raises(ValueError):
        truncated_phi([0, 1, 0], p, 2.0, 2.0)


@given(st.floats(0.01, 5), st.floats(0.01, 5), st.floats(0, 20), st.floats(0, 20))
def test_truncation_lipschitz(r, ds, a, b):
    s = r + ds
    assert abs(truncate_value(a, r, s) - truncate_value(b, r, s)) <= abs(a - b) + 1e-12
    for knot in (r, s):
        assert truncate_value(knot - 1e-12, r, s) == pytest.approx(truncate_value(knot + 1e-12, r, s), abs=1e-10)


def test_hessian_and_classification(cubic):
    H0 = numeric_hessian(cubic, [0, 0, 0])
    assert H0[0, 0] == pytest.approx(2.0, abs=1e-6)
    assert classify(cubic, [0, 0, 0]).classification == "local-min"
    top = classify(cubic, [0, math.sqrt(2), 0])
    assert top.eigenvalues[0] == pytest.approx(-4.0, abs=1e-5)
    assert top.classification == "local-max" and top.morse_index == 1 and top.certified(1e-8)


def test_morse_labels():
    assert morse_class(np.array([1.0, 2.0])) == ("local-min", 0)
    assert morse_class(np.array([-1.0, 2.0])) == ("saddle", 1)
    assert morse_class(np.array([-1.0, -2.0])) == ("local-max", 2)
    assert morse_class(np.array([0.0, 2.0]))[0] == "degenerate"


def test_hessian_warning_only_for_small_p():
    assert hessian_warnings(zero_spec(2, p=2.0), [0, 0, 0, 0])
    assert not hessian_warnings(zero_spec(2, p=3.0), [0, 0, 0, 0])
    assert not hessian_warnings(zero_spec(2, p=2.0), [0, 1, 3, 0])


def test_classification_reflection_symmetric():
    spec = ProblemSpec(3, ExponentProfile([3, 4, 4, 3]), Nonlinearity(cubic_spec().nl.nodes * 3), 0.5)
    u = Sequence([0, 0.4, -1.1, 2.0, 0])
    a, b = classify(spec, u), classify(spec, u.reflected())
    assert a.classification == b.classification and a.energy == pytest.approx(b.energy, rel=1e-13)


def test_energy_zero_at_origin_when_F_vanishes():
    rng = np.random.default_rng(1)
    for _ in range(20):
        spec = random_spec(rng)
        assert energy(spec, np.zeros(spec.T)) == 0.0


def test_modular_consistent(example):
    u = [0, 0.5, -2.0, 0]
    assert modular(u, example.p) - energy(example, u) == pytest.approx(float(np.sum(example.nl.F_all(np.array([0.5, -2.0])))))


def test_critical_point_dict(cubic):
    d = classify(cubic, [0, 0, 0], provenance="unit").to_dict()
    assert d["u"] == [0, 0, 0] and d["provenance"] == "unit" and d["classification"] == "local-min"
