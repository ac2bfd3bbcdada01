import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bellsim import _fallback
from bellsim.core import (
    ConfigurationError,
    ModeIndex,
    PhasePoint,
    Polarization,
    RandomStream,
    Site,
    SumDiffPoint,
    draw_standard_complex,
    from_sum_diff,
    stream_keys,
    to_sum_diff,
    uniforms_at,
)


def test_to_sum_diff_classical_diagonal():
    s = to_sum_diff(PhasePoint(alpha=[1, 0, 0, 0], beta=[1, 0, 0, 0]))
    np.testing.assert_array_equal(s.plus, [1, 0, 0, 0])
    np.testing.assert_array_equal(s.minus, [0, 0, 0, 0])


def test_to_sum_diff_antisymmetric():
    s = to_sum_diff(PhasePoint(alpha=[1, 0, 0, 0], beta=[-1, 0, 0, 0]))
    np.testing.assert_array_equal(s.plus, [0, 0, 0, 0])
    np.testing.assert_array_equal(s.minus, [1, 0, 0, 0])


def test_from_sum_diff_examples():
    p = from_sum_diff(SumDiffPoint(plus=np.zeros(4), minus=np.zeros(4)))
    assert not p.alpha.any() and not p.beta.any()
    p = from_sum_diff(SumDiffPoint(plus=[1, 0, 0, 0], minus=np.zeros(4)))
    np.testing.assert_array_equal(p.alpha, [1, 0, 0, 0])
    np.testing.assert_array_equal(p.beta, [1, 0, 0, 0])


def test_beta_is_not_conjugated_on_storage():
    p = PhasePoint(alpha=[1j, 0, 0, 0], beta=[1j, 0, 0, 0])
    assert p.beta[0] == 1j
    s = to_sum_diff(p)
    assert s.plus[0] == 0 and s.minus[0] == 1j


finite = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False)
complex4 = st.lists(st.complex_numbers(max_magnitude=1e6, allow_nan=False, allow_infinity=False), min_size=4, max_size=4)


@settings(max_examples=200)
@given(complex4, complex4)
def test_round_trip_phase_point(a, b):
    p = PhasePoint(alpha=a, beta=b)
    q = from_sum_diff(to_sum_diff(p))
    scale = max(np.abs(p.alpha).max(), np.abs(p.beta).max(), 1e-300)
    assert np.abs(q.alpha - p.alpha).max() <= 1e-14 * scale
    assert np.abs(q.beta - p.beta).max() <= 1e-14 * scale


@settings(max_examples=200)
@given(complex4, complex4)
def test_round_trip_sum_diff(a, b):
    s = SumDiffPoint(plus=a, minus=b)
    t = to_sum_diff(from_sum_diff(s))
    scale = max(np.abs(s.plus).max(), np.abs(s.minus).max(), 1e-300)
    assert np.abs(t.plus - s.plus).max() <= 1e-14 * scale
    assert np.abs(t.minus - s.minus).max() <= 1e-14 * scale


def test_round_trip_1000_random_points(rng):
    a = rng.normal(size=(1000, 4)) + 1j * rng.normal(size=(1000, 4))
    b = rng.normal(size=(1000, 4)) + 1j * rng.normal(size=(1000, 4))
    q = from_sum_diff(to_sum_diff(PhasePoint(a, b)))
    np.testing.assert_allclose(q.alpha, a, rtol=1e-14, atol=1e-15)
    np.testing.assert_allclose(q.beta, b, rtol=1e-14, atol=1e-15)


def test_mode_index_order_and_labels():
    assert [m.label for m in ModeIndex] == ["A+", "A-", "B+", "B-"]
    assert [int(m) for m in ModeIndex] == [0, 1, 2, 3]
    assert ModeIndex.of(Site.B, Polarization.MINUS) is ModeIndex.B_MINUS
    assert ModeIndex.A_MINUS.site is Site.A
    assert ModeIndex.B_PLUS.polarization is Polarization.PLUS


def test_phase_point_rejects_bad_shapes():
    with pytest.raises(ValueError):
        PhasePoint(alpha=np.zeros(3), beta=np.zeros(3))
    with pytest.raises(ValueError):
        PhasePoint(alpha=np.zeros(4), beta=np.zeros((2, 4)))


def test_real_coordinates_order():
    p = PhasePoint(alpha=[1 + 2j, 3 + 4j, 5 + 6j, 7 + 8j], beta=[9 + 10j, 11 + 12j, 13 + 14j, 15 + 16j])
    np.testing.assert_array_equal(p.real_coordinates(), np.arange(1, 17))


def test_stream_depends_only_on_seed_and_index():
    a = RandomStream(7, 123)
    b = RandomStream(7, 123)
    assert [a.uniform() for _ in range(10)] == [b.uniform() for _ in range(10)]
    c = RandomStream(7, 124)
    d = RandomStream(8, 123)
    first = RandomStream(7, 123).uniform()
    assert c.uniform() != first and d.uniform() != first


def test_vectorised_uniforms_match_scalar_stream():
    idx = np.array([0, 5, 2**40, 2**64 - 1], dtype=np.uint64)
    keys = stream_keys(99, idx)
    for i, k in enumerate(idx):
        s = RandomStream(99, int(k))
        for j in range(5):
            assert uniforms_at(keys, j)[i] == s.uniform()


def test_uniforms_in_open_interval():
    u = uniforms_at(stream_keys(1, np.arange(100_000)), 0)
    assert u.min() > 0.0 and u.max() < 1.0
    assert abs(u.mean() - 0.5) < 4 * math.sqrt(1 / 12 / u.size)


def test_seed_must_fit_64_bits():
    with pytest.raises(ConfigurationError):
        RandomStream(-1, 0)
    with pytest.raises(ConfigurationError):
        RandomStream(2**64, 0)


def test_draw_standard_complex_scalar_matches_vectorised():
    keys = stream_keys(5, np.arange(50))
    vec = _fallback._complex_normal(keys, 0)
    for k in range(50):
        z = draw_standard_complex(RandomStream(5, k))
        assert z == pytest.approx(vec[k], rel=1e-14, abs=1e-15)


def test_draw_standard_complex_moments():
    # same algorithm as draw_standard_complex, vectorised over 10^6 substreams
    z = _fallback._complex_normal(stream_keys(2024, np.arange(1_000_000)), 0)
    n = z.size
    assert abs(np.mean(np.abs(z) ** 2) - 1.0) < 0.004
    for moment in (z, z**2):
        se_r = moment.real.std(ddof=1) / math.sqrt(n)
        se_i = moment.imag.std(ddof=1) / math.sqrt(n)
        assert abs(moment.real.mean()) < 3 * se_r
        assert abs(moment.imag.mean()) < 3 * se_i
    # variance 1/2 per quadrature
    assert abs(z.real.var() - 0.5) < 0.004 and abs(z.imag.var() - 0.5) < 0.004
