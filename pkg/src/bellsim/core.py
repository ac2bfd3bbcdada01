"""Phase-space coordinates, mode indexing and counter-based random streams.

A sample of the doubled phase space is a pair ``(alpha, beta)`` of complex
4-vectors. ``beta`` is stored as drawn, never pre-conjugated; conjugation
happens inside :func:`to_sum_diff` / :func:`from_sum_diff`.

Random numbers come from a counter-based generator: the ``j``-th uniform of
substream ``k`` is a pure function of ``(seed, k, j)``. Every sample index
owns its own substream, so results never depend on how sample ranges are
split between workers.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Site",
    "Polarization",
    "ModeIndex",
    "PhasePoint",
    "SumDiffPoint",
    "RandomStream",
    "ConfigurationError",
    "to_sum_diff",
    "from_sum_diff",
    "draw_standard_complex",
    "stream_keys",
    "uniforms_at",
    "MASK64",
]

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_SEED_SALT = 0x2545F4914F6CDD1D
# (bits >> 11 + 0.5) * 2**-53 lies strictly inside (0, 1)
_U53 = 2.0**-53
TWO_PI = 2.0 * math.pi


class ConfigurationError(ValueError):
    """Invalid run parameters (pair number, bins, grid, ...)."""


class Site(enum.Enum):
    A = "A"
    B = "B"


class Polarization(enum.Enum):
    PLUS = "+"
    MINUS = "-"


class ModeIndex(enum.IntEnum):
    """The four optical modes, in serialization order (A+, A-, B+, B-)."""

    A_PLUS = 0
    A_MINUS = 1
    B_PLUS = 2
    B_MINUS = 3

    @property
    def site(self) -> Site:
        return Site.A if self < 2 else Site.B

    @property
    def polarization(self) -> Polarization:
        return Polarization.PLUS if self % 2 == 0 else Polarization.MINUS

    @property
    def label(self) -> str:
        return f"{self.site.value}{self.polarization.value}"

    @classmethod
    def of(cls, site: Site, polarization: Polarization) -> "ModeIndex":
        base = 0 if site is Site.A else 2
        return cls(base + (0 if polarization is Polarization.PLUS else 1))


def site_modes(site: Site | str) -> tuple[int, int]:
    """Column indices ``(plus, minus)`` of a site's two modes."""
    site = Site(site)
    return (0, 1) if site is Site.A else (2, 3)


def _as_modes(x) -> np.ndarray:
    arr = np.asarray(x, dtype=np.complex128)
    if arr.shape[-1:] != (4,):
        raise ValueError(f"expected trailing dimension 4, got shape {arr.shape}")
    return arr


@dataclass(frozen=True)
class PhasePoint:
    """Doubled phase-space point ``(alpha, beta)``.

    ``alpha`` and ``beta`` have shape ``(4,)`` for a single sample or
    ``(n, 4)`` for a stack of samples; mode order follows :class:`ModeIndex`.
    """

    alpha: np.ndarray
    beta: np.ndarray

    def __post_init__(self):
        alpha = _as_modes(self.alpha)
        beta = _as_modes(self.beta)
        if alpha.shape != beta.shape:
            raise ValueError("alpha and beta must have the same shape")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)

    def __len__(self) -> int:
        return 1 if self.alpha.ndim == 1 else self.alpha.shape[0]

    def is_finite(self) -> bool:
        return bool(np.isfinite(self.alpha).all() and np.isfinite(self.beta).all())

    def real_coordinates(self) -> np.ndarray:
        """The 16 real coordinates: re/im of alpha then beta, in mode order."""
        a = np.stack([self.alpha.real, self.alpha.imag], axis=-1)
        b = np.stack([self.beta.real, self.beta.imag], axis=-1)
        shape = self.alpha.shape[:-1] + (8,)
        return np.concatenate([a.reshape(shape), b.reshape(shape)], axis=-1)


@dataclass(frozen=True)
class SumDiffPoint:
    """Sum and difference coordinates ``plus = (alpha + beta*)/2``,
    ``minus = (alpha - beta*)/2``."""

    plus: np.ndarray
    minus: np.ndarray

    def __post_init__(self):
        plus = _as_modes(self.plus)
        minus = _as_modes(self.minus)
        if plus.shape != minus.shape:
            raise ValueError("plus and minus must have the same shape")
        object.__setattr__(self, "plus", plus)
        object.__setattr__(self, "minus", minus)


def to_sum_diff(p: PhasePoint) -> SumDiffPoint:
    bc = np.conj(p.beta)
    return SumDiffPoint(plus=(p.alpha + bc) / 2, minus=(p.alpha - bc) / 2)


def from_sum_diff(s: SumDiffPoint) -> PhasePoint:
    return PhasePoint(alpha=s.plus + s.minus, beta=np.conj(s.plus - s.minus))


# -- counter-based generator ---------------------------------------------------


def _mix64(z: int) -> int:
    z = ((z ^ (z >> 30)) * _MIX1) & MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & MASK64
    return z ^ (z >> 31)


def _check_seed(seed: int) -> int:
    seed = int(seed)
    if not 0 <= seed <= MASK64:
        raise ConfigurationError(f"seed must fit in 64 unsigned bits, got {seed}")
    return seed


def _stream_key(seed: int, index: int) -> int:
    return _mix64(_mix64((seed ^ _SEED_SALT) & MASK64) ^ _mix64((index + 1) & MASK64))


class RandomStream:
    """Substream ``index`` of the generator seeded with ``seed``.

    Uniform number ``j`` is ``mix64(key + (j + 1) * GOLDEN)`` mapped to the
    open interval (0, 1), where ``key`` depends only on ``(seed, index)``.
    The stream keeps a draw counter, so one instance must not be shared.
    """

    __slots__ = ("seed", "index", "_key", "_counter")

    def __init__(self, seed: int, index: int):
        self.seed = _check_seed(seed)
        self.index = int(index)
        if not 0 <= self.index <= MASK64:
            raise ConfigurationError("stream index must fit in 64 unsigned bits")
        self._key = _stream_key(self.seed, self.index)
        self._counter = 0

    @property
    def counter(self) -> int:
        return self._counter

    def uniform(self) -> float:
        self._counter += 1
        bits = _mix64((self._key + self._counter * GOLDEN) & MASK64)
        return ((bits >> 11) + 0.5) * _U53

    def exponential(self) -> float:
        return -math.log(self.uniform())

    def gamma(self, shape: int) -> float:
        """Gamma(shape, 1) for integer shape, as a sum of exponentials."""
        total = 0.0
        for _ in range(shape):
            total += -math.log(self.uniform())
        return total


def draw_standard_complex(rng: RandomStream) -> complex:
    """Complex normal with density ``exp(-|z|^2)/pi`` (variance 1/2 per part)."""
    r = math.sqrt(-math.log(rng.uniform()))
    phi = TWO_PI * rng.uniform()
    return complex(r * math.cos(phi), r * math.sin(phi))


# -- vectorised form, used by the pure-Python kernel --------------------------


def _mix64_array(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
    return z ^ (z >> np.uint64(31))


def stream_keys(seed: int, indices: np.ndarray) -> np.ndarray:
    """Per-substream keys for an array of sample indices."""
    seed = _check_seed(seed)
    idx = np.asarray(indices, dtype=np.uint64)
    with np.errstate(over="ignore"):
        seed_part = np.uint64(_mix64((seed ^ _SEED_SALT) & MASK64))
        return _mix64_array(seed_part ^ _mix64_array(idx + np.uint64(1)))


def uniforms_at(keys: np.ndarray, counter: int) -> np.ndarray:
    """Uniform number ``counter`` (0-based) of every stream in ``keys``."""
    step = np.uint64(((counter + 1) * GOLDEN) & MASK64)
    with np.errstate(over="ignore"):
        bits = _mix64_array(keys + step)
    return ((bits >> np.uint64(11)).astype(np.float64) + 0.5) * _U53
