import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from vcausal.errors import OutOfValidityError, ValidationError
from vcausal.geometry import (DAY, ExperimentGeometry, OrthogonalityKind, PreferredFrame,
                              baseline_direction, coefficient_a, inaccessible_fraction,
                              orthogonality_times, velocity_dot_baseline)

DEG = math.pi / 180


def geom(gamma_deg=18.0):
    return ExperimentGeometry(1200.0, 0.00022, gamma_deg * DEG)


def sign_changes(pf, g, n=1_000_000):
    t = np.arange(n) * (DAY / n)
    f = velocity_dot_baseline(t, pf, g)
    s = np.sign(f)
    s_next = np.roll(s, -1)
    return t[np.flatnonzero(s * s_next < 0)], DAY / n


def test_baseline_east_west():
    assert np.allclose(baseline_direction(0.0, geom(0)), [1, 0, 0])
    assert np.allclose(baseline_direction(21600.0, geom(0)), [0, 1, 0], atol=1e-15)


@given(st.floats(0, DAY))
def test_baseline_axial_component(t):
    v = baseline_direction(t, geom(18))
    assert v[2] == pytest.approx(0.309017, abs=1e-6)
    assert np.linalg.norm(v) == pytest.approx(1.0, abs=1e-12)


def test_geometry_validation():
    with pytest.raises(ValidationError):
        ExperimentGeometry(0.0, 1e-3, 0.1)
    with pytest.raises(ValidationError):
        ExperimentGeometry(1.0, 2.0, 0.1)
    with pytest.raises(ValidationError):
        ExperimentGeometry(1.0, 1e-3, math.pi / 2)
    with pytest.raises(ValidationError):
        PreferredFrame(1.0, 0.3)
    with pytest.raises(ValidationError):
        PreferredFrame(0.1, 3.5)


def test_rho():
    assert geom().rho == pytest.approx(1.8333e-7, rel=1e-4)


def test_orthogonality_east_west():
    orth = orthogonality_times(PreferredFrame(1e-3, math.pi / 2, 0.0), geom(0))
    assert orth.kind is OrthogonalityKind.TWO_SOLUTIONS
    assert orth.times == pytest.approx((21600.0, 64800.0), abs=1e-9)


def test_orthogonality_none_below_gamma():
    orth = orthogonality_times(PreferredFrame(1e-3, 10 * DEG, 0.3), geom(18))
    assert orth.kind is OrthogonalityKind.NONE
    assert orth.times == ()


def test_orthogonality_none_above_pi_minus_gamma():
    orth = orthogonality_times(PreferredFrame(1e-3, 170 * DEG, 0.3), geom(18))
    assert orth.kind is OrthogonalityKind.NONE


def test_orthogonality_tangential():
    orth = orthogonality_times(PreferredFrame(1e-3, 18 * DEG, 0.4), geom(18))
    assert orth.kind is OrthogonalityKind.TANGENTIAL
    assert len(orth.times) == 1


def test_orthogonality_always():
    orth = orthogonality_times(PreferredFrame(1e-3, 0.0), geom(0))
    assert orth.kind is OrthogonalityKind.ALWAYS


def test_orthogonality_matches_scan():
    pf, g = PreferredFrame(1e-3, 60 * DEG, 0.7), geom(18)
    orth = orthogonality_times(pf, g)
    assert orth.kind is OrthogonalityKind.TWO_SOLUTIONS
    crossings, step = sign_changes(pf, g)
    assert len(crossings) == 2
    assert np.allclose(np.sort(crossings), orth.times, atol=step)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.0, math.pi), st.floats(0.0, 1.5), st.floats(0.0, 2 * math.pi))
def test_roots_are_zeros_and_sign_flips(chi, gamma, phi0):
    pf, g = PreferredFrame(0.01, chi, phi0), ExperimentGeometry(1.0, 1e-3, gamma)
    orth = orthogonality_times(pf, g)
    if orth.kind is not OrthogonalityKind.TWO_SOLUTIONS:
        return
    for t in orth.times:
        assert abs(velocity_dot_baseline(t, pf, g)) < 1e-12
        # the crossing slope can be tiny near tangency, so step proportionally
        before = velocity_dot_baseline(t - 1.0, pf, g)
        after = velocity_dot_baseline(t + 1.0, pf, g)
        if min(abs(before), abs(after)) > 1e-12:
            assert before * after < 0


@settings(max_examples=20, deadline=None)
@given(st.floats(0.0, math.pi), st.floats(0.0, 1.5), st.floats(0.0, 2 * math.pi))
def test_root_count_matches_scan(chi, gamma, phi0):
    pf, g = PreferredFrame(0.01, chi, phi0), ExperimentGeometry(1.0, 1e-3, gamma)
    orth = orthogonality_times(pf, g)
    if orth.kind is OrthogonalityKind.ALWAYS:
        return
    r = abs(math.sin(gamma) * math.cos(chi)) / max(math.cos(gamma) * math.sin(chi), 1e-300)
    if abs(r - 1.0) < 1e-6:
        return
    crossings, _ = sign_changes(pf, g, 100_000)
    expected = 2 if orth.kind is OrthogonalityKind.TWO_SOLUTIONS else 0
    assert len(crossings) == expected


def test_coefficient_a_examples():
    assert coefficient_a(math.pi / 2, 18 * DEG) == pytest.approx(0.951057, abs=1e-6)
    assert coefficient_a(18 * DEG, 18 * DEG) == pytest.approx(0.0, abs=1e-7)
    assert coefficient_a(math.pi / 2, 0.0) == 1.0


def test_coefficient_a_out_of_range():
    with pytest.raises(OutOfValidityError):
        coefficient_a(10 * DEG, 18 * DEG)
    with pytest.raises(OutOfValidityError):
        coefficient_a(170 * DEG, 18 * DEG)


@given(st.floats(0.0, 1.5), st.floats(0.0, 1.0))
def test_coefficient_a_symmetry_and_bounds(gamma, u):
    chi = gamma + u * (math.pi - 2 * gamma)
    a = coefficient_a(chi, gamma)
    assert 0.0 <= a <= math.cos(gamma) + 1e-15
    # sqrt of a rounding-level radicand at the edges: ~1e-8
    assert a == pytest.approx(coefficient_a(math.pi - chi, gamma), abs=1e-7)


@given(st.floats(0.0, 1.5))
def test_coefficient_a_monotone(gamma):
    chis = np.linspace(gamma, math.pi / 2, 200)
    values = [coefficient_a(c, gamma) for c in chis]
    assert np.all(np.diff(values) >= -1e-15)


def test_inaccessible_fraction_examples():
    assert inaccessible_fraction(18 * DEG) == pytest.approx(0.048943, abs=1e-6)
    assert inaccessible_fraction(18 * DEG) < 0.05
    assert inaccessible_fraction(0.0) == 0.0
    assert inaccessible_fraction(math.pi / 3) == pytest.approx(0.5, abs=1e-15)


@given(st.floats(0.0, 1.57))
def test_inaccessible_fraction_integral(gamma):
    integral, _ = quad(math.sin, 0.0, gamma, epsabs=1e-14)
    assert inaccessible_fraction(gamma) == pytest.approx(integral, abs=1e-10)


def test_inaccessible_fraction_monotone():
    values = [inaccessible_fraction(g) for g in np.linspace(0, 1.5, 300)]
    assert np.all(np.diff(values) > 0)
