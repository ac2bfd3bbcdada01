"""Sampling the positive-P distribution of the N-pair Bell state.

In sum/difference coordinates the density is

    P(plus, minus) = |mu_A . mu_B|^(2N) exp(-|plus|^2 - |minus|^2)
                     / (pi^8 (N + 1) (N!)^2)

where ``mu_A = plus[0:2]``, ``mu_B = plus[2:4]`` and the dot is the
unconjugated bilinear product. ``minus`` is a product of complex Gaussians;
``plus`` is drawn either by an exact decomposition or by accept/reject
against a radial-Gamma proposal. The two samplers cross-check each other.

The functions here work one sample at a time on a :class:`RandomStream`.
:func:`sample_block` is the bulk entry point and dispatches to the compiled
kernel when available; both consume uniforms in the same slot order, so row
``k`` of a block equals ``sample_bell(RandomStream(seed, k), ...)``.

Uniform consumption per sample (``N`` = pair number):

* minus: 4 x (radius, phase)                                  -> 8
* exact plus: Gamma(N+2) radius, direction (4), Gamma(N+1) radius,
  phase, complex normal (2)                                   -> 2N + 10
* rejection plus, per attempt: Gamma(N+2), direction (4) for each site,
  then the acceptance uniform                                 -> 2N + 13
"""
from __future__ import annotations

import enum
import math

import numpy as np

from .core import (
    TWO_PI,
    ConfigurationError,
    PhasePoint,
    RandomStream,
    SumDiffPoint,
    draw_standard_complex,
    from_sum_diff,
)

MAX_PAIRS = 8
MINUS_SLOTS = 8


class SamplerKind(str, enum.Enum):
    EXACT = "exact"
    REJECTION = "rejection"


def check_pairs(n) -> int:
    if isinstance(n, bool) or int(n) != n:
        raise ConfigurationError(f"pair number must be an integer, got {n!r}")
    n = int(n)
    if not 1 <= n <= MAX_PAIRS:
        raise ConfigurationError(f"pair number must be in [1, {MAX_PAIRS}], got {n}")
    return n


def exact_slots(n: int) -> int:
    return 2 * n + 10


def rejection_slots(n: int) -> int:
    return 2 * n + 13


def sample_minus(rng: RandomStream) -> np.ndarray:
    return np.array([draw_standard_complex(rng) for _ in range(4)])


def _unit_direction(rng: RandomStream) -> tuple[complex, complex]:
    """Uniform direction on the unit sphere of C^2."""
    z1 = draw_standard_complex(rng)
    z2 = draw_standard_complex(rng)
    norm = math.sqrt(z1.real**2 + z1.imag**2 + z2.real**2 + z2.imag**2)
    return z1 / norm, z2 / norm


def sample_plus_exact(rng: RandomStream, n: int) -> np.ndarray:
    """Draw ``(mu_A, mu_B)`` exactly.

    ``|mu_A|^2 ~ Gamma(N+2)`` with a uniform direction ``e``. Given ``mu_A``,
    ``mu_B = z e* + w f`` with ``f = (-e2, e1)`` so that ``e . f = 0`` and
    ``mu_A . mu_B = |mu_A| z``; then ``|z|^2 ~ Gamma(N+1)`` with uniform phase
    and ``w`` is a standard complex normal.
    """
    while True:
        radius = math.sqrt(rng.gamma(n + 2))
        e1, e2 = _unit_direction(rng)
        if radius > 0.0:
            break
    z_radius = math.sqrt(rng.gamma(n + 1))
    phi = TWO_PI * rng.uniform()
    z = complex(z_radius * math.cos(phi), z_radius * math.sin(phi))
    w = draw_standard_complex(rng)
    mu_b1 = z * e1.conjugate() - w * e2
    mu_b2 = z * e2.conjugate() + w * e1
    return np.array([radius * e1, radius * e2, mu_b1, mu_b2])


def rejection_attempt(rng: RandomStream, n: int) -> tuple[np.ndarray, float, bool]:
    """One proposal of the rejection sampler: ``(mu, acceptance_ratio, accepted)``."""
    ra = math.sqrt(rng.gamma(n + 2))
    a1, a2 = _unit_direction(rng)
    rb = math.sqrt(rng.gamma(n + 2))
    b1, b2 = _unit_direction(rng)
    overlap = a1 * b1 + a2 * b2
    ratio = (overlap.real**2 + overlap.imag**2) ** n
    accepted = rng.uniform() < ratio
    return np.array([ra * a1, ra * a2, rb * b1, rb * b2]), ratio, accepted


def sample_plus_rejection(rng: RandomStream, n: int) -> np.ndarray:
    """Accept/reject ``(mu_A, mu_B)``.

    The proposal has independent radii ``r^2 ~ Gamma(N+2)`` and uniform
    directions, i.e. density proportional to ``(r_A r_B)^(2N) exp(-r_A^2 - r_B^2)``.
    It is accepted with probability ``|e_A . e_B|^(2N) <= 1`` (Cauchy-Schwarz).
    """
    while True:
        mu, _, accepted = rejection_attempt(rng, n)
        if accepted:
            return mu


def sample_bell(rng: RandomStream, n: int, kind: SamplerKind | str = SamplerKind.EXACT) -> PhasePoint:
    n = check_pairs(n)
    kind = SamplerKind(kind)
    minus = sample_minus(rng)
    if kind is SamplerKind.EXACT:
        plus = sample_plus_exact(rng, n)
    else:
        plus = sample_plus_rejection(rng, n)
    return from_sum_diff(SumDiffPoint(plus=plus, minus=minus))


def _bilinear(plus: np.ndarray) -> np.ndarray:
    return plus[..., 0] * plus[..., 2] + plus[..., 1] * plus[..., 3]


def _sq_norm(x: np.ndarray) -> np.ndarray:
    return np.sum(x.real**2 + x.imag**2, axis=-1)


def bell_density(s: SumDiffPoint, n: int):
    """Normalized Bell-state density in sum/difference coordinates."""
    n = check_pairs(n)
    dot = _bilinear(s.plus)
    dot_sq = dot.real**2 + dot.imag**2
    norm = math.pi**8 * (n + 1) * math.factorial(n) ** 2
    return dot_sq**n / norm * np.exp(-_sq_norm(s.plus) - _sq_norm(s.minus))


def proposal_density(s: SumDiffPoint, n: int):
    """Density of the rejection sampler's proposal times the Gaussian ``minus``."""
    n = check_pairs(n)
    site_norm = math.pi**2 * math.factorial(n + 1)
    ra2 = _sq_norm(s.plus[..., :2])
    rb2 = _sq_norm(s.plus[..., 2:])
    radial = (ra2 * rb2) ** n * np.exp(-ra2 - rb2) / site_norm**2
    return radial * np.exp(-_sq_norm(s.minus)) / math.pi**4


def sample_block(
    seed: int,
    start: int,
    count: int,
    n: int,
    kind: SamplerKind | str = SamplerKind.EXACT,
    backend=None,
) -> PhasePoint:
    """Samples ``start .. start+count-1`` as a stacked :class:`PhasePoint`."""
    from . import backend as _backend

    n = check_pairs(n)
    kind = SamplerKind(kind)
    if count < 0 or start < 0:
        raise ConfigurationError("start and count must be nonnegative")
    kernel = _backend.kernel if backend is None else backend
    alpha, beta = kernel.sample_block(int(seed), int(start), int(count), n, kind is SamplerKind.REJECTION)
    return PhasePoint(alpha=alpha, beta=beta)
