"""Exact Fock-basis reference for the N-pair Bell state.

Independent of the samplers: the state is built by applying creation
operators to the vacuum, rotated polarization bases are handled by
re-expanding kets, and the canonical positive-P density is evaluated from
coherent-state overlaps.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from math import comb, factorial, sqrt

import numpy as np

from .core import ModeIndex, PhasePoint, Site, site_modes
from .sampler import check_pairs

FockOccupation = tuple  # (n_A+, n_A-, n_B+, n_B-)

# |d(alpha, beta) / d(plus, minus)| over four complex modes: 4 per mode
SUM_DIFF_JACOBIAN = 4**4


@dataclass(frozen=True)
class TruncatedState:
    """Sparse pure state: occupation tuple -> complex amplitude."""

    amplitudes: dict
    cutoff: int

    def norm_squared(self) -> float:
        return float(sum(abs(a) ** 2 for a in self.amplitudes.values()))

    def normalized(self) -> "TruncatedState":
        norm = sqrt(self.norm_squared())
        return TruncatedState({k: v / norm for k, v in self.amplitudes.items()}, self.cutoff)


def _apply_pair_creation(amplitudes: dict) -> dict:
    """Apply ``a+_A^dag a+_B^dag + a-_A^dag a-_B^dag`` using a^dag|n> = sqrt(n+1)|n+1>."""
    out: dict = {}
    for occ, amp in amplitudes.items():
        for i, j in ((0, 2), (1, 3)):
            new = list(occ)
            coef = sqrt(new[i] + 1) * sqrt(new[j] + 1)
            new[i] += 1
            new[j] += 1
            key = tuple(new)
            out[key] = out.get(key, 0.0) + coef * amp
    return {k: v for k, v in out.items() if v != 0}


def unnormalized_bell_state(n: int) -> TruncatedState:
    """``(a+_A^dag a+_B^dag + a-_A^dag a-_B^dag)^N |0>`` without normalization."""
    n = check_pairs(n)
    amps: dict = {(0, 0, 0, 0): 1.0 + 0j}
    for _ in range(n):
        amps = _apply_pair_creation(amps)
    return TruncatedState(amps, cutoff=n)


def build_bell_state(n: int) -> TruncatedState:
    return unnormalized_bell_state(n).normalized()


def exact_mean_number(state: TruncatedState, mode: ModeIndex | int) -> float:
    m = int(mode)
    return float(sum(occ[m] * abs(a) ** 2 for occ, a in state.amplitudes.items()))


def rotate_state(state: TruncatedState, site: Site | str, theta: float) -> TruncatedState:
    """Re-express the state in the polarization basis of a polarizer at ``theta``.

    With ``a_par = c a_+ + s a_-`` and ``a_perp = -s a_+ + c a_-`` the inverse
    gives ``a_+^dag = c p^dag - s q^dag`` and ``a_-^dag = s p^dag + c q^dag``.
    Each ket ``(a_+^dag)^k (a_-^dag)^l |0> / sqrt(k! l!)`` is expanded
    binomially; the result's site slots hold (parallel, perpendicular) counts.
    """
    i, j = site_modes(site)
    c, s = math.cos(theta), math.sin(theta)
    out: dict = {}
    for occ, amp in state.amplitudes.items():
        k, l = occ[i], occ[j]
        pre = amp / sqrt(factorial(k) * factorial(l))
        for r in range(k + 1):
            # (c p - s q)^k: r powers of p
            ck = comb(k, r) * c**r * (-s) ** (k - r)
            for t in range(l + 1):
                # (s p + c q)^l: t powers of p
                cl = comb(l, t) * s**t * c ** (l - t)
                n_par = r + t
                n_perp = (k - r) + (l - t)
                coef = pre * ck * cl * sqrt(factorial(n_par) * factorial(n_perp))
                new = list(occ)
                new[i], new[j] = n_par, n_perp
                key = tuple(new)
                out[key] = out.get(key, 0.0) + coef
    return TruncatedState(out, state.cutoff)


def exact_correlation(state: TruncatedState, theta_a: float, theta_b: float) -> float:
    """``<(n_par - n_perp)_A (n_par - n_perp)_B>`` with polarizers at the given angles."""
    rotated = rotate_state(rotate_state(state, Site.A, theta_a), Site.B, theta_b)
    return float(
        sum((occ[0] - occ[1]) * (occ[2] - occ[3]) * abs(a) ** 2 for occ, a in rotated.amplitudes.items())
    )


def exact_spin_mean(state: TruncatedState, site: Site | str, theta: float) -> float:
    i, j = site_modes(site)
    rotated = rotate_state(state, site, theta)
    return float(sum((occ[i] - occ[j]) * abs(a) ** 2 for occ, a in rotated.amplitudes.items()))


def coherent_overlap(state: TruncatedState, mu: np.ndarray):
    """``<mu|psi>`` for coherent amplitudes ``mu`` of shape ``(..., 4)``.

    Uses ``<mu|n> = exp(-|mu|^2/2) prod_k conj(mu_k)^n_k / sqrt(n_k!)``.
    """
    mu = np.asarray(mu, dtype=np.complex128)
    mc = np.conj(mu)
    total = np.zeros(mu.shape[:-1], dtype=np.complex128)
    for occ, amp in state.amplitudes.items():
        term = np.full(mu.shape[:-1], amp, dtype=np.complex128)
        for k, nk in enumerate(occ):
            if nk:
                term = term * mc[..., k] ** nk / sqrt(factorial(nk))
        total = total + term
    return np.exp(-0.5 * np.sum(np.abs(mu) ** 2, axis=-1)) * total


def canonical_p_density(state: TruncatedState, p: PhasePoint):
    """Canonical positive-P density of a pure state at ``(alpha, beta)``.

    ``(2 pi)^-8 exp(-|alpha - beta*|^2 / 4) |<mu|psi>|^2`` with
    ``mu = (alpha + beta*) / 2``; always nonnegative.
    """
    bc = np.conj(p.beta)
    mu = (p.alpha + bc) / 2
    gauss = np.exp(-np.sum(np.abs(p.alpha - bc) ** 2, axis=-1) / 4)
    overlap = coherent_overlap(state, mu)
    return gauss * np.abs(overlap) ** 2 / (2 * math.pi) ** 8
