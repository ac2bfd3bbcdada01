"""Self-consistency checks run by ``bellsim validate``."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from . import _fallback
from .core import PhasePoint, SumDiffPoint, stream_keys, to_sum_diff, uniforms_at
from .fock import SUM_DIFF_JACOBIAN, build_bell_state, canonical_p_density, exact_correlation
from .observables import theoretical_delta
from .sampler import SamplerKind, bell_density, check_pairs, proposal_density
from .simulate import run_chsh, run_correlations, run_moments


@dataclass
class Check:
    name: str
    measured: float
    expected: float
    tolerance: float
    passed: bool
    detail: str = ""

    def to_dict(self) -> dict:
        return asdict(self)


def rejection_acceptance(seed: int, trials: int, n: int) -> tuple[float, float]:
    """Acceptance fraction and largest acceptance ratio over ``trials`` proposals.

    Uses the first proposal of each substream, i.e. exactly the draws the
    rejection kernel makes on its first attempt.
    """
    n = check_pairs(n)
    keys = stream_keys(seed, np.arange(trials, dtype=np.uint64))
    slot = 8 + (n + 2)
    a1, a2 = _fallback._direction(keys, slot)
    slot += 4 + (n + 2)
    b1, b2 = _fallback._direction(keys, slot)
    slot += 4
    overlap = a1 * b1 + a2 * b2
    ratio = (overlap.real**2 + overlap.imag**2) ** n
    accepted = uniforms_at(keys, slot) < ratio
    return float(accepted.mean()), float(ratio.max())


def draw_proposal(rng: np.random.Generator, size: int, n: int) -> SumDiffPoint:
    """Draws from :func:`bellsim.sampler.proposal_density` with numpy's generator."""

    def site():
        z = rng.normal(size=(size, 2)) + 1j * rng.normal(size=(size, 2))
        z /= np.linalg.norm(z, axis=1, keepdims=True)
        return np.sqrt(rng.gamma(n + 2, size=size))[:, None] * z

    plus = np.concatenate([site(), site()], axis=1)
    minus = (rng.normal(size=(size, 4)) + 1j * rng.normal(size=(size, 4))) / math.sqrt(2)
    return SumDiffPoint(plus=plus, minus=minus)


def check_density_consistency(seed: int, n: int, jacobian: float = SUM_DIFF_JACOBIAN, points: int = 100) -> Check:
    rng = np.random.default_rng([seed, n, 7])
    p = PhasePoint(
        alpha=rng.normal(size=(points, 4)) + 1j * rng.normal(size=(points, 4)),
        beta=rng.normal(size=(points, 4)) + 1j * rng.normal(size=(points, 4)),
    )
    lhs = jacobian * canonical_p_density(build_bell_state(n), p)
    rhs = bell_density(to_sum_diff(p), n)
    rel = float(np.max(np.abs(lhs - rhs) / np.abs(rhs)))
    return Check(f"density_consistency[N={n}]", rel, 0.0, 1e-10, rel <= 1e-10,
                 f"jacobian={jacobian}, {points} random points, max relative error")


def check_normalization(seed: int, n: int, samples: int, z_tol: float) -> Check:
    rng = np.random.default_rng([seed, n, 11])
    s = draw_proposal(rng, samples, n)
    w = bell_density(s, n) / proposal_density(s, n)
    mean = float(w.mean())
    se = float(w.std(ddof=1) / math.sqrt(samples))
    z = abs(mean - 1.0) / se
    return Check(f"normalization[N={n}]", mean, 1.0, z_tol * se, z <= z_tol,
                 f"importance sampling, stderr={se:.3g}, z={z:.2f}")


def check_sampler_equivalence(seed: int, n: int, samples: int, z_tol: float, workers: int = 1) -> list[Check]:
    exact = run_moments(seed, samples, n, SamplerKind.EXACT, workers)
    # disjoint substreams so the two runs are independent
    rej = run_moments(seed, samples, n, SamplerKind.REJECTION, workers, offset=samples)
    zs = []
    for group_e, group_r in zip(exact, rej):
        for e, r in zip(group_e, group_r):
            se = math.hypot(e.stderr_real, r.stderr_real)
            zs.append(abs(e.mean.real - r.mean.real) / se)
    zmax = max(zs)
    rate, ratio_max = rejection_acceptance(seed, samples, n)
    expected_rate = 1.0 / (n + 1)
    checks = [
        Check(f"sampler_moments[N={n}]", zmax, 0.0, z_tol, zmax <= z_tol,
              f"max z over {len(zs)} first/second moments of 16 real coordinates"),
        Check(f"acceptance_rate[N={n}]", rate, expected_rate, 0.01, abs(rate - expected_rate) <= 0.01,
              f"{samples} proposals"),
        Check(f"acceptance_ratio_bound[N={n}]", ratio_max, 1.0, 0.0, ratio_max <= 1.0,
              "largest acceptance ratio"),
    ]
    return checks


def random_angle_pairs(seed: int, count: int = 10) -> list[tuple[float, float]]:
    rng = np.random.default_rng([seed, 13])
    return [tuple(x) for x in rng.uniform(0.0, math.pi, size=(count, 2))]


def check_oracle_correlation(seed: int, n: int, samples: int, z_tol: float, workers: int = 1) -> Check:
    pairs = random_angle_pairs(seed)
    state = build_bell_state(n)
    ests = run_correlations(seed, samples, pairs, n, workers=workers)
    zs = [e.z_real(exact_correlation(state, ta, tb)) for e, (ta, tb) in zip(ests, pairs)]
    zmax = max(zs)
    return Check(f"oracle_correlation[N={n}]", zmax, 0.0, z_tol, zmax <= z_tol,
                 f"max z over {len(pairs)} random angle pairs")


def check_chsh_and_realness(seed: int, n: int, samples: int, z_tol: float, workers: int = 1) -> list[Check]:
    thetas = np.linspace(0.0, math.pi / 2, 5)
    points = run_chsh(seed, samples, thetas, n, workers=workers)
    z_imag = [p.delta.z_imag() for p in points] + [m.z_imag() for m in points[0].mode_numbers]
    checks = [
        Check(f"hermitian_realness[N={n}]", max(z_imag), 0.0, z_tol, max(z_imag) <= z_tol,
              "max |Im mean| / stderr over Delta and mode numbers"),
    ]
    z_num = max(m.z_real(n / 2) for m in points[0].mode_numbers)
    checks.append(Check(f"mode_numbers[N={n}]", z_num, 0.0, z_tol, z_num <= z_tol,
                        f"max z of <n_i> against {n / 2}"))
    if n == 1:
        z_delta = max(p.delta.z_real(theoretical_delta(p.theta)) for p in points)
        checks.append(Check("chsh_curve[N=1]", z_delta, 0.0, z_tol, z_delta <= z_tol,
                            "max z of Delta(theta) against the quantum prediction, 5 angles"))
    return checks


def run_validation(
    seed: int,
    samples: int = 200_000,
    pairs=(1, 2),
    jacobian: float = SUM_DIFF_JACOBIAN,
    z_tol: float = 4.0,
    workers: int = 1,
) -> list[Check]:
    checks: list[Check] = []
    for n in pairs:
        checks.append(check_density_consistency(seed, n, jacobian))
        checks.append(check_normalization(seed, n, samples, z_tol))
        checks.extend(check_sampler_equivalence(seed, n, samples, z_tol, workers))
        checks.append(check_oracle_correlation(seed, n, samples, z_tol, workers))
        checks.extend(check_chsh_and_realness(seed, n, samples, z_tol, workers))
    return checks
