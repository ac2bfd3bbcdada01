"""Polarizer rotations, phase-space photon numbers, CHSH estimators and statistics.

All per-sample functions accept a :class:`~bellsim.core.PhasePoint` holding
one sample or a stack, and broadcast over the leading axis.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .core import ConfigurationError, PhasePoint, Site, site_modes

__all__ = [
    "rotate_site",
    "photon_number",
    "spin_variable",
    "spin_components",
    "analyzer_angles",
    "chsh_terms",
    "chsh_sample",
    "theoretical_delta",
    "CorrelationEstimate",
    "accumulate",
    "Histogram",
    "histogram2d",
    "histogram1d",
    "ChshCurvePoint",
]


def rotate_site(p: PhasePoint, site: Site | str, theta: float):
    """Polarizer at angle ``theta``: returns ``(a_par, b_par, a_perp, b_perp)``.

    The same real rotation is applied to the alpha and beta halves.
    """
    i, j = site_modes(site)
    c, s = math.cos(theta), math.sin(theta)
    a_p, a_m = p.alpha[..., i], p.alpha[..., j]
    b_p, b_m = p.beta[..., i], p.beta[..., j]
    return (
        c * a_p + s * a_m,
        c * b_p + s * b_m,
        -s * a_p + c * a_m,
        -s * b_p + c * b_m,
    )


def photon_number(a, b):
    """Phase-space photon number ``a * b`` (no conjugation)."""
    return a * b


def spin_variable(p: PhasePoint, site: Site | str, theta: float):
    """Schwinger spin: parallel minus perpendicular photon number."""
    a_par, b_par, a_perp, b_perp = rotate_site(p, site, theta)
    return photon_number(a_par, b_par) - photon_number(a_perp, b_perp)


def spin_components(p: PhasePoint, site: Site | str):
    """``(D, X)`` with ``spin_variable(p, site, t) == cos(2t) D + sin(2t) X``.

    Lets an angle sweep reuse two complex arrays per site instead of
    re-rotating every sample for every angle.
    """
    i, j = site_modes(site)
    a_p, a_m = p.alpha[..., i], p.alpha[..., j]
    b_p, b_m = p.beta[..., i], p.beta[..., j]
    return a_p * b_p - a_m * b_m, a_p * b_m + a_m * b_p


def _spin_from_components(d, x, theta):
    return math.cos(2 * theta) * d + math.sin(2 * theta) * x


def analyzer_angles(theta: float) -> tuple[float, float, float, float]:
    """Analyzer settings ``(A, A', B, B')`` for relative angle ``theta``."""
    return 0.0, 2.0 * theta, theta, -theta


def chsh_terms(p: PhasePoint, theta: float, components=None):
    """Per-sample products ``(AB, A'B, AB', A'B')`` at relative angle ``theta``."""
    if components is None:
        components = spin_components(p, Site.A) + spin_components(p, Site.B)
    da, xa, db, xb = components
    ta, tap, tb, tbp = analyzer_angles(theta)
    a = _spin_from_components(da, xa, ta)
    ap = _spin_from_components(da, xa, tap)
    b = _spin_from_components(db, xb, tb)
    bp = _spin_from_components(db, xb, tbp)
    return a * b, ap * b, a * bp, ap * bp


def chsh_sample(p: PhasePoint, theta: float, components=None):
    """Per-sample CHSH estimator whose mean estimates ``Delta(theta)``."""
    ab, apb, abp, apbp = chsh_terms(p, theta, components)
    return 0.5 * (ab + apb + abp - apbp) - 1.0


def theoretical_delta(theta):
    """Quantum prediction ``(3 cos 2t - cos 6t)/2 - 1`` for the Bell state."""
    theta = np.asarray(theta, dtype=float)
    out = 0.5 * (3.0 * np.cos(2.0 * theta) - np.cos(6.0 * theta)) - 1.0
    return float(out) if out.ndim == 0 else out


# -- statistics -----------------------------------------------------------------


@dataclass(frozen=True)
class CorrelationEstimate:
    """Mergeable running mean of a complex estimator.

    ``m2_real`` / ``m2_imag`` are sums of squared deviations from the mean.
    """

    count: int = 0
    mean: complex = 0j
    m2_real: float = 0.0
    m2_imag: float = 0.0

    @classmethod
    def from_values(cls, values) -> "CorrelationEstimate":
        v = np.asarray(values, dtype=np.complex128).ravel()
        if v.size == 0:
            return cls()
        mean = complex(v.mean())
        m2_real = float(np.sum((v.real - mean.real) ** 2))
        m2_imag = float(np.sum((v.imag - mean.imag) ** 2))
        return cls(int(v.size), mean, m2_real, m2_imag)

    def merge(self, other: "CorrelationEstimate") -> "CorrelationEstimate":
        if other.count == 0:
            return self
        if self.count == 0:
            return other
        n = self.count + other.count
        delta = other.mean - self.mean
        weight = self.count * other.count / n
        return CorrelationEstimate(
            count=n,
            mean=self.mean + delta * (other.count / n),
            m2_real=self.m2_real + other.m2_real + delta.real**2 * weight,
            m2_imag=self.m2_imag + other.m2_imag + delta.imag**2 * weight,
        )

    def update(self, values) -> "CorrelationEstimate":
        return self.merge(CorrelationEstimate.from_values(values))

    __add__ = merge

    def _stderr(self, m2: float) -> float | None:
        if self.count < 2:
            return None
        return math.sqrt(m2 / (self.count - 1) / self.count)

    @property
    def stderr_real(self) -> float | None:
        return self._stderr(self.m2_real)

    @property
    def stderr_imag(self) -> float | None:
        return self._stderr(self.m2_imag)

    def z_real(self, expected: float) -> float:
        """Distance of the real mean from ``expected`` in standard errors."""
        return _z(self.mean.real - expected, self.stderr_real)

    def z_imag(self, expected: float = 0.0) -> float:
        return _z(self.mean.imag - expected, self.stderr_imag)

    def to_dict(self) -> dict:
        return {
            "count": self.count,
            "mean_real": self.mean.real,
            "mean_imag": self.mean.imag,
            "stderr_real": self.stderr_real,
            "stderr_imag": self.stderr_imag,
        }


def _z(diff: float, stderr: float | None) -> float:
    if stderr is None:
        return math.nan
    if stderr == 0.0:
        return 0.0 if diff == 0.0 else math.inf
    return abs(diff) / stderr


def accumulate(values, chunk_size: int = 1 << 16) -> CorrelationEstimate:
    """Single-pass estimate over an array or an iterable of scalars/arrays."""
    est = CorrelationEstimate()
    if isinstance(values, np.ndarray):
        flat = values.ravel()
        for lo in range(0, flat.size, chunk_size):
            est = est.update(flat[lo : lo + chunk_size])
        return est
    for item in values:
        est = est.update(np.atleast_1d(item))
    return est


# -- histograms -----------------------------------------------------------------


@dataclass
class Histogram:
    """1D or 2D histogram with explicit under/overflow cells.

    ``padded`` has ``bins + 2`` cells per axis; cell 0 collects values below
    the range and the last cell values above it. The upper range edge belongs
    to the last interior bin.
    """

    bins: tuple[int, ...]
    ranges: tuple[tuple[float, float], ...]
    padded: np.ndarray = field(default=None)

    def __post_init__(self):
        if len(self.bins) != len(self.ranges) or not 1 <= len(self.bins) <= 2:
            raise ConfigurationError("histogram needs one or two axes")
        for nb, (lo, hi) in zip(self.bins, self.ranges):
            if int(nb) != nb or nb < 1:
                raise ConfigurationError(f"bin count must be a positive integer, got {nb}")
            if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
                raise ConfigurationError(f"invalid histogram range ({lo}, {hi})")
        self.bins = tuple(int(b) for b in self.bins)
        self.ranges = tuple((float(lo), float(hi)) for lo, hi in self.ranges)
        if self.padded is None:
            self.padded = np.zeros(tuple(b + 2 for b in self.bins), dtype=np.int64)

    @property
    def edges(self) -> list[np.ndarray]:
        return [np.linspace(lo, hi, nb + 1) for nb, (lo, hi) in zip(self.bins, self.ranges)]

    def _cell(self, values, axis: int) -> np.ndarray:
        v = np.asarray(values, dtype=float).ravel()
        nb = self.bins[axis]
        lo, hi = self.ranges[axis]
        with np.errstate(invalid="ignore"):
            t = np.clip((v - lo) / (hi - lo) * nb, -1.0, nb + 0.5)
        # NaN goes to the overflow cell
        t = np.nan_to_num(t, nan=nb + 0.5)
        idx = np.floor(t).astype(np.int64) + 1
        return np.where(v == hi, nb, idx)

    def fill(self, x, y=None) -> "Histogram":
        cells = [self._cell(x, 0)]
        if len(self.bins) == 2:
            if y is None:
                raise ConfigurationError("2D histogram needs y values")
            cells.append(self._cell(y, 1))
            if cells[0].shape != cells[1].shape:
                raise ValueError("x and y must have the same length")
        flat = np.ravel_multi_index(tuple(cells), self.padded.shape)
        self.padded += np.bincount(flat, minlength=self.padded.size).reshape(self.padded.shape)
        return self

    def merge(self, other: "Histogram") -> "Histogram":
        if other.bins != self.bins or other.ranges != self.ranges:
            raise ConfigurationError("cannot merge histograms with different binning")
        return Histogram(self.bins, self.ranges, self.padded + other.padded)

    @property
    def counts(self) -> np.ndarray:
        inner = tuple(slice(1, -1) for _ in self.bins)
        return self.padded[inner]

    @property
    def overflow(self) -> int:
        return int(self.padded.sum() - self.counts.sum())

    @property
    def total(self) -> int:
        return int(self.padded.sum())

    def flow_counts(self) -> dict:
        names = "xy"
        out = {}
        for axis in range(len(self.bins)):
            moved = np.moveaxis(self.padded, axis, 0)
            out[f"{names[axis]}_under"] = int(moved[0].sum())
            out[f"{names[axis]}_over"] = int(moved[-1].sum())
        return out


def histogram2d(x, y, bins=(101, 101), range=((-4.0, 4.0), (-4.0, 4.0))) -> Histogram:
    if np.isscalar(bins):
        bins = (bins, bins)
    return Histogram(tuple(bins), tuple(range)).fill(x, y)


def histogram1d(x, bins=101, range=(-4.0, 4.0)) -> Histogram:
    return Histogram((bins,), (tuple(range),)).fill(x)


# -- sweep rows -----------------------------------------------------------------


@dataclass(frozen=True)
class ChshCurvePoint:
    """One angle of a CHSH sweep.

    ``correlations`` holds the estimates of ``(AB, A'B, AB', A'B')``;
    ``mode_numbers`` the photon-number estimates of the four modes.
    """

    theta: float
    delta: CorrelationEstimate
    correlations: tuple[CorrelationEstimate, ...]
    mode_numbers: tuple[CorrelationEstimate, ...] = ()

    @property
    def delta_mean(self) -> float:
        return self.delta.mean.real

    @property
    def delta_stderr(self) -> float | None:
        return self.delta.stderr_real

    @property
    def delta_imag_mean(self) -> float:
        return self.delta.mean.imag

    @property
    def delta_theory(self) -> float:
        return theoretical_delta(self.theta)


def chsh_point(p: PhasePoint, theta: float) -> ChshCurvePoint:
    """Convenience: a curve point from one stack of samples."""
    terms = chsh_terms(p, theta)
    return ChshCurvePoint(
        theta=theta,
        delta=accumulate(chsh_sample(p, theta)),
        correlations=tuple(accumulate(t) for t in terms),
        mode_numbers=tuple(accumulate(p.alpha[:, m] * p.beta[:, m]) for m in range(4)),
    )


def angle_pairs_correlation(p: PhasePoint, pairs: Sequence[tuple[float, float]]) -> list[CorrelationEstimate]:
    """Sampled ``<A(theta_A) B(theta_B)>`` for each angle pair."""
    da, xa = spin_components(p, Site.A)
    db, xb = spin_components(p, Site.B)
    return [
        accumulate(_spin_from_components(da, xa, ta) * _spin_from_components(db, xb, tb))
        for ta, tb in pairs
    ]
