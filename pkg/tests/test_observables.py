import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bellsim.core import ConfigurationError, PhasePoint, Site
from bellsim.fock import build_bell_state, exact_correlation
from bellsim.observables import (
    CorrelationEstimate,
    Histogram,
    accumulate,
    analyzer_angles,
    chsh_point,
    chsh_sample,
    chsh_terms,
    histogram1d,
    histogram2d,
    photon_number,
    rotate_site,
    spin_components,
    spin_variable,
    theoretical_delta,
)
from bellsim.sampler import sample_block
from conftest import within


@pytest.fixture(scope="module")
def bell_million():
    return sample_block(2024, 0, 1_000_000, 1)


def random_point(rng, n=None):
    shape = (4,) if n is None else (n, 4)
    return PhasePoint(
        alpha=rng.normal(size=shape) + 1j * rng.normal(size=shape),
        beta=rng.normal(size=shape) + 1j * rng.normal(size=shape),
    )


def test_rotation_identity_at_zero(rng):
    p = random_point(rng)
    a_par, b_par, a_perp, b_perp = rotate_site(p, Site.A, 0.0)
    assert (a_par, b_par, a_perp, b_perp) == (p.alpha[0], p.beta[0], p.alpha[1], p.beta[1])


def test_rotation_quarter_turn(rng):
    p = random_point(rng)
    a_par, b_par, a_perp, b_perp = rotate_site(p, "B", math.pi / 2)
    assert a_par == pytest.approx(p.alpha[3], abs=1e-15)
    assert a_perp == pytest.approx(-p.alpha[2], abs=1e-15)
    assert b_par == pytest.approx(p.beta[3], abs=1e-15)
    assert b_perp == pytest.approx(-p.beta[2], abs=1e-15)


def test_total_site_number_invariant_under_rotation(rng):
    p = random_point(rng, 1000)
    for site, (i, j) in ((Site.A, (0, 1)), (Site.B, (2, 3))):
        total = p.alpha[:, i] * p.beta[:, i] + p.alpha[:, j] * p.beta[:, j]
        for theta in rng.uniform(-3, 3, size=10):
            a_par, b_par, a_perp, b_perp = rotate_site(p, site, theta)
            rotated = photon_number(a_par, b_par) + photon_number(a_perp, b_perp)
            np.testing.assert_allclose(rotated, total, rtol=1e-12, atol=1e-12)


def test_photon_number_examples():
    assert photon_number(1, 1) == 1
    assert photon_number(1j, -1j) == 1


def test_spin_variable_single_photon_in_plus_channel():
    p = PhasePoint(alpha=[1, 0, 1, 0], beta=[1, 0, 1, 0])
    assert spin_variable(p, Site.A, 0.0) == 1


def test_spin_components_reproduce_rotation(rng):
    p = random_point(rng, 500)
    for site in Site:
        d, x = spin_components(p, site)
        for theta in (0.0, 0.3, -1.2, 2.0):
            direct = spin_variable(p, site, theta)
            fast = math.cos(2 * theta) * d + math.sin(2 * theta) * x
            np.testing.assert_allclose(fast, direct, rtol=1e-12, atol=1e-12)


def test_chsh_terms_use_fixed_angle_convention(rng):
    p = random_point(rng, 50)
    theta = 0.37
    ta, tap, tb, tbp = analyzer_angles(theta)
    assert (ta, tap, tb, tbp) == (0.0, 2 * theta, theta, -theta)
    a = spin_variable(p, Site.A, ta)
    ap = spin_variable(p, Site.A, tap)
    b = spin_variable(p, Site.B, tb)
    bp = spin_variable(p, Site.B, tbp)
    for got, want in zip(chsh_terms(p, theta), (a * b, ap * b, a * bp, ap * bp)):
        np.testing.assert_allclose(got, want, rtol=1e-12, atol=1e-12)
    np.testing.assert_allclose(
        chsh_sample(p, theta), 0.5 * (a * b + ap * b + a * bp - ap * bp) - 1, rtol=1e-12, atol=1e-12
    )


def test_analyzer_angles_at_pi_over_8():
    assert analyzer_angles(math.pi / 8) == pytest.approx((0, math.pi / 4, math.pi / 8, -math.pi / 8))


def test_photon_number_mean_over_bell_samples(bell_million):
    p = bell_million
    for m in range(4):
        est = accumulate(photon_number(p.alpha[:, m], p.beta[:, m]))
        assert within(est, 0.5) and est.z_imag() <= 3


@pytest.mark.parametrize("theta", [0.0, 0.4, 1.3])
def test_spin_mean_is_zero(bell_million, theta):
    for site in Site:
        est = accumulate(spin_variable(bell_million, site, theta))
        assert within(est, 0.0)


def test_spin_samples_leave_quantum_bounds(bell_million):
    s = spin_variable(bell_million, Site.A, 0.0)
    assert np.mean(np.abs(s.real) > 1) > 0


@pytest.mark.parametrize("theta", [0.0, math.pi / 4])
def test_chsh_sample_mean(bell_million, theta):
    est = accumulate(chsh_sample(bell_million, theta))
    assert within(est, theoretical_delta(theta))
    assert est.z_imag() <= 3


def test_chsh_at_pi_over_8_two_million():
    p = sample_block(2024, 0, 2_000_000, 1)
    point = chsh_point(p, math.pi / 8)
    assert within(point.delta, math.sqrt(2) - 1)


def test_theoretical_delta_values():
    assert theoretical_delta(math.pi / 8) == pytest.approx(math.sqrt(2) - 1, abs=1e-15)
    assert theoretical_delta(0.0) == 0.0
    assert theoretical_delta(math.pi / 4) == pytest.approx(-1.0, abs=1e-15)


def test_theoretical_delta_matches_fock_oracle():
    state = build_bell_state(1)
    for theta in np.linspace(0, math.pi / 2, 25):
        ta, tap, tb, tbp = analyzer_angles(theta)
        oracle = 0.5 * (
            exact_correlation(state, ta, tb)
            + exact_correlation(state, tap, tb)
            + exact_correlation(state, ta, tbp)
            - exact_correlation(state, tap, tbp)
        ) - 1
        assert theoretical_delta(theta) == pytest.approx(oracle, abs=1e-10)


# -- statistics -----------------------------------------------------------------


def test_accumulate_constant():
    est = accumulate(np.array([1.0, 1.0, 1.0]))
    assert est.mean == 1 and est.stderr_real == 0 and est.count == 3


def test_accumulate_two_values():
    est = accumulate([0.0, 2.0])
    assert est.mean == 1 and est.stderr_real == pytest.approx(1.0)


def test_stderr_undefined_below_two():
    assert accumulate([3.0]).stderr_real is None
    assert CorrelationEstimate().stderr_imag is None


def test_complex_stderr_parts():
    est = accumulate(np.array([0j, 2j]))
    assert est.stderr_real == 0 and est.stderr_imag == pytest.approx(1.0)


values = st.lists(
    st.complex_numbers(max_magnitude=1e3, allow_nan=False, allow_infinity=False), min_size=2, max_size=200
)


@settings(max_examples=200)
@given(values, st.data())
def test_merge_matches_single_pass(vals, data):
    arr = np.array(vals)
    cuts = sorted(data.draw(st.lists(st.integers(0, len(arr)), max_size=5)))
    parts = np.split(arr, cuts)
    merged = CorrelationEstimate()
    for part in parts:
        merged = merged.merge(CorrelationEstimate.from_values(part))
    single = CorrelationEstimate.from_values(arr)
    assert merged.count == single.count
    scale = max(np.abs(arr).max(), 1.0)
    assert abs(merged.mean - single.mean) <= 1e-12 * scale
    m2_scale = max(single.m2_real + single.m2_imag, scale**2 * 1e-3)
    assert abs(merged.m2_real - single.m2_real) <= 1e-12 * m2_scale * len(arr)
    assert abs(merged.m2_imag - single.m2_imag) <= 1e-12 * m2_scale * len(arr)


def test_merge_associative(rng):
    parts = [CorrelationEstimate.from_values(rng.normal(size=n) + 1j * rng.normal(size=n)) for n in (5, 17, 40)]
    left = parts[0].merge(parts[1]).merge(parts[2])
    right = parts[0].merge(parts[1].merge(parts[2]))
    assert left.count == right.count
    assert abs(left.mean - right.mean) <= 1e-12
    assert left.m2_real == pytest.approx(right.m2_real, rel=1e-12)


def test_accumulate_over_iterable_of_chunks(rng):
    x = rng.normal(size=1000)
    a = accumulate(x, chunk_size=64)
    b = accumulate(iter(np.array_split(x, 7)))
    c = accumulate(iter(x.tolist()))
    for est in (b, c):
        assert est.mean == pytest.approx(a.mean, rel=1e-12)
        assert est.stderr_real == pytest.approx(a.stderr_real, rel=1e-12)


# -- histograms -----------------------------------------------------------------


def test_single_point_at_center():
    h = histogram2d([0.0], [0.0])
    assert h.counts[50, 50] == 1 and h.counts.sum() == 1 and h.overflow == 0


def test_histogram_mass_conservation(rng):
    x = rng.normal(scale=3, size=10_000)
    y = rng.normal(scale=3, size=10_000)
    h = histogram2d(x, y, bins=(11, 13), range=((-2, 2), (-1, 1)))
    assert h.counts.sum() + h.overflow == 10_000
    assert h.total == 10_000
    inside = np.sum((np.abs(x) <= 2) & (np.abs(y) <= 1))
    assert h.counts.sum() == inside


def test_histogram_matches_numpy_inside(rng):
    x = rng.uniform(-1, 1, size=5000)
    h = histogram1d(x, bins=20, range=(-1, 1))
    ref, _ = np.histogram(x, bins=20, range=(-1, 1))
    np.testing.assert_array_equal(h.counts, ref)


def test_histogram_edges_and_flow():
    h = histogram1d([-5.0, 4.0, 5.0, np.nan], bins=4, range=(-4, 4))
    assert h.counts[-1] == 1  # upper edge belongs to the last bin
    assert h.flow_counts() == {"x_under": 1, "x_over": 2}
    np.testing.assert_allclose(h.edges[0], [-4, -2, 0, 2, 4])


def test_histogram_merge():
    a = histogram1d([0.1], bins=3, range=(0, 1))
    b = histogram1d([0.9, 2.0], bins=3, range=(0, 1))
    m = a.merge(b)
    assert m.counts.tolist() == [1, 0, 1] and m.overflow == 1
    with pytest.raises(ConfigurationError):
        a.merge(histogram1d([0.1], bins=4, range=(0, 1)))


@pytest.mark.parametrize("bins", [0, -3])
def test_nonpositive_bins_rejected(bins):
    with pytest.raises(ConfigurationError):
        Histogram((bins,), ((-1.0, 1.0),))


def test_bad_range_rejected():
    with pytest.raises(ConfigurationError):
        Histogram((10,), ((1.0, 1.0),))
    with pytest.raises(ConfigurationError):
        Histogram((10,), ((0.0, math.inf),))


def test_spin_histogram_has_mass_outside_bounds(bell_million):
    s = spin_variable(bell_million, Site.A, 0.0).real
    h = histogram1d(s)
    edges = h.edges[0]
    centers = 0.5 * (edges[1:] + edges[:-1])
    outside = h.counts[np.abs(centers) > 1.05].sum() + h.overflow
    assert outside > 0
