"""Chunked, optionally parallel Monte Carlo runs.

Sample indices ``0 .. samples-1`` are cut into fixed-size chunks. Each chunk
is reduced to mergeable partial statistics, and partials are merged in chunk
order on the calling process. Chunk boundaries do not depend on the worker
count, so results are bit-identical for any ``workers``.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from functools import partial
from typing import Callable, Sequence

import numpy as np

from .core import ConfigurationError, PhasePoint, Site
from .observables import (
    ChshCurvePoint,
    CorrelationEstimate,
    Histogram,
    accumulate,
    chsh_terms,
    spin_components,
    spin_variable,
)
from .sampler import SamplerKind, check_pairs, sample_block

CHUNK_SIZE = 1 << 16


def chunk_ranges(samples: int, offset: int = 0, chunk_size: int = CHUNK_SIZE):
    return [(offset + lo, min(chunk_size, samples - lo)) for lo in range(0, samples, chunk_size)]


def merge_partials(a, b):
    """Merge nested lists/tuples of mergeable statistics elementwise."""
    if isinstance(a, (list, tuple)):
        return type(a)(merge_partials(x, y) for x, y in zip(a, b))
    return a.merge(b)


def _run_chunk(reducer, seed, n, kind, bounds):
    start, count = bounds
    return reducer(sample_block(seed, start, count, n, kind))


def map_reduce(
    reducer: Callable[[PhasePoint], object],
    seed: int,
    samples: int,
    n: int,
    kind: SamplerKind | str = SamplerKind.EXACT,
    workers: int = 1,
    offset: int = 0,
):
    """Apply ``reducer`` to every chunk of samples and merge the partials.

    ``reducer`` must be picklable (module-level function or ``functools.partial``)
    when ``workers > 1``.
    """
    n = check_pairs(n)
    kind = SamplerKind(kind)
    if samples < 1:
        raise ConfigurationError("samples must be >= 1")
    if workers < 1:
        raise ConfigurationError("workers must be >= 1")
    ranges = chunk_ranges(samples, offset)
    task = partial(_run_chunk, reducer, seed, n, kind)
    if workers == 1 or len(ranges) == 1:
        partials = map(task, ranges)
    else:
        pool = ProcessPoolExecutor(max_workers=min(workers, len(ranges)))
        with pool:
            partials = list(pool.map(task, ranges))
    result = None
    for part in partials:
        result = part if result is None else merge_partials(result, part)
    return result


# -- reducers ----------------------------------------------------------------------


def _chsh_reducer(thetas, p: PhasePoint):
    components = spin_components(p, Site.A) + spin_components(p, Site.B)
    per_theta = []
    for theta in thetas:
        ab, apb, abp, apbp = chsh_terms(p, theta, components)
        delta = 0.5 * (ab + apb + abp - apbp) - 1.0
        per_theta.append(
            [CorrelationEstimate.from_values(v) for v in (delta, ab, apb, abp, apbp)]
        )
    numbers = [CorrelationEstimate.from_values(p.alpha[:, m] * p.beta[:, m]) for m in range(4)]
    return [per_theta, numbers]


def run_chsh(
    seed: int,
    samples: int,
    thetas: Sequence[float],
    n: int = 1,
    kind: SamplerKind | str = SamplerKind.EXACT,
    workers: int = 1,
) -> list[ChshCurvePoint]:
    """CHSH sweep: one ensemble of ``samples`` draws, evaluated at every angle."""
    thetas = [float(t) for t in thetas]
    per_theta, numbers = map_reduce(partial(_chsh_reducer, thetas), seed, samples, n, kind, workers)
    return [
        ChshCurvePoint(theta=t, delta=est[0], correlations=tuple(est[1:]), mode_numbers=tuple(numbers))
        for t, est in zip(thetas, per_theta)
    ]


def _pairs_reducer(pairs, p: PhasePoint):
    da, xa = spin_components(p, Site.A)
    db, xb = spin_components(p, Site.B)
    out = []
    for ta, tb in pairs:
        a = math.cos(2 * ta) * da + math.sin(2 * ta) * xa
        b = math.cos(2 * tb) * db + math.sin(2 * tb) * xb
        out.append(CorrelationEstimate.from_values(a * b))
    return out


def run_correlations(seed, samples, pairs, n=1, kind=SamplerKind.EXACT, workers=1) -> list[CorrelationEstimate]:
    """Sampled ``<A(theta_A) B(theta_B)>`` for each ``(theta_A, theta_B)`` pair."""
    pairs = [(float(a), float(b)) for a, b in pairs]
    return map_reduce(partial(_pairs_reducer, pairs), seed, samples, n, kind, workers)


def _numbers_reducer(p: PhasePoint):
    return [CorrelationEstimate.from_values(p.alpha[:, m] * p.beta[:, m]) for m in range(4)]


def run_mode_numbers(seed, samples, n=1, kind=SamplerKind.EXACT, workers=1) -> list[CorrelationEstimate]:
    return map_reduce(_numbers_reducer, seed, samples, n, kind, workers)


def _moments_reducer(p: PhasePoint):
    x = p.real_coordinates()
    first = [CorrelationEstimate.from_values(x[:, i]) for i in range(16)]
    second = [
        CorrelationEstimate.from_values(x[:, i] * x[:, j]) for i in range(16) for j in range(i, 16)
    ]
    return [first, second]


def run_moments(seed, samples, n=1, kind=SamplerKind.EXACT, workers=1, offset=0):
    """First moments (16) and second moments (136, i <= j) of the real coordinates."""
    return map_reduce(_moments_reducer, seed, samples, n, kind, workers, offset)


# -- histogram variables -------------------------------------------------------------


def variable_values(p: PhasePoint, var: dict):
    """Complex per-sample values of a histogram variable descriptor.

    ``{"kind": "spin", "site": "A", "theta": t}`` or
    ``{"kind": "corr", "theta_a": ta, "theta_b": tb}`` (product of spins) or
    ``{"kind": "number", "mode": m}``.
    """
    kind = var["kind"]
    if kind == "spin":
        return spin_variable(p, Site(var["site"]), var["theta"])
    if kind == "corr":
        return spin_variable(p, Site.A, var["theta_a"]) * spin_variable(p, Site.B, var["theta_b"])
    if kind == "number":
        m = int(var["mode"])
        return p.alpha[:, m] * p.beta[:, m]
    raise ConfigurationError(f"unknown variable kind {kind!r}")


def _hist_reducer(variables, bins, ranges, p: PhasePoint):
    values = [variable_values(p, v) for v in variables]
    hist = Histogram(tuple(bins), tuple(ranges)).fill(*[v.real for v in values])
    stats = [CorrelationEstimate.from_values(v) for v in values]
    outside = [_Count(int(np.count_nonzero(np.abs(v.real) > 1.0)), v.size) for v in values]
    return [hist, stats, outside]


class _Count:
    __slots__ = ("hits", "total")

    def __init__(self, hits, total):
        self.hits, self.total = hits, total

    def merge(self, other):
        return _Count(self.hits + other.hits, self.total + other.total)

    @property
    def fraction(self):
        return self.hits / self.total if self.total else math.nan


def run_histogram(seed, samples, variables, bins, ranges, n=1, kind=SamplerKind.EXACT, workers=1):
    """Histogram of the real parts of one or two variables.

    Returns ``(histogram, estimates, out_of_bounds_fractions)``; the last item
    is the fraction of samples with ``|Re v| > 1`` per variable.
    """
    if len(variables) not in (1, 2):
        raise ConfigurationError("select one or two histogram variables")
    Histogram(tuple(bins), tuple(ranges))  # validate before sampling
    hist, stats, outside = map_reduce(
        partial(_hist_reducer, list(variables), tuple(bins), tuple(ranges)), seed, samples, n, kind, workers
    )
    return hist, stats, [c.fraction for c in outside]
