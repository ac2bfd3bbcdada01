"""Pure-Python (numpy) sampling kernel.

Vectorised over sample indices; consumes uniforms in exactly the slot order of
the scalar samplers in :mod:`bellsim.sampler`, so each row matches the
corresponding scalar draw up to floating-point rounding of libm calls.
"""
from __future__ import annotations

import numpy as np

from .core import TWO_PI, stream_keys, uniforms_at

NAME = "python"


def _gamma(keys, slot, shape):
    total = np.zeros(keys.shape[0])
    for i in range(shape):
        total += -np.log(uniforms_at(keys, slot + i))
    return total


def _complex_normal(keys, slot):
    r = np.sqrt(-np.log(uniforms_at(keys, slot)))
    phi = TWO_PI * uniforms_at(keys, slot + 1)
    return r * np.cos(phi) + 1j * (r * np.sin(phi))


def _direction(keys, slot):
    z1 = _complex_normal(keys, slot)
    z2 = _complex_normal(keys, slot + 2)
    norm = np.sqrt(z1.real**2 + z1.imag**2 + z2.real**2 + z2.imag**2)
    return z1 / norm, z2 / norm


def _plus_exact(keys, slot, n):
    out = np.empty((keys.shape[0], 4), dtype=np.complex128)
    radius = np.sqrt(_gamma(keys, slot, n + 2))
    slot += n + 2
    e1, e2 = _direction(keys, slot)
    slot += 4
    z_radius = np.sqrt(_gamma(keys, slot, n + 1))
    slot += n + 1
    phi = TWO_PI * uniforms_at(keys, slot)
    slot += 1
    z = z_radius * np.cos(phi) + 1j * (z_radius * np.sin(phi))
    w = _complex_normal(keys, slot)
    out[:, 0] = radius * e1
    out[:, 1] = radius * e2
    out[:, 2] = z * np.conj(e1) - w * e2
    out[:, 3] = z * np.conj(e2) + w * e1
    return out


def _plus_rejection(keys, slot, n):
    out = np.empty((keys.shape[0], 4), dtype=np.complex128)
    pending = np.arange(keys.shape[0])
    attempt_slots = 2 * n + 13
    while pending.size:
        k = keys[pending]
        s = slot
        ra = np.sqrt(_gamma(k, s, n + 2))
        s += n + 2
        a1, a2 = _direction(k, s)
        s += 4
        rb = np.sqrt(_gamma(k, s, n + 2))
        s += n + 2
        b1, b2 = _direction(k, s)
        s += 4
        overlap = a1 * b1 + a2 * b2
        ratio = (overlap.real**2 + overlap.imag**2) ** n
        accepted = uniforms_at(k, s) < ratio
        rows = pending[accepted]
        out[rows, 0] = ra[accepted] * a1[accepted]
        out[rows, 1] = ra[accepted] * a2[accepted]
        out[rows, 2] = rb[accepted] * b1[accepted]
        out[rows, 3] = rb[accepted] * b2[accepted]
        pending = pending[~accepted]
        slot += attempt_slots
    return out


def sample_block(seed: int, start: int, count: int, n: int, rejection: bool):
    """Return ``(alpha, beta)`` arrays of shape ``(count, 4)``."""
    keys = stream_keys(seed, np.arange(start, start + count, dtype=np.uint64))
    minus = np.empty((count, 4), dtype=np.complex128)
    for mode in range(4):
        minus[:, mode] = _complex_normal(keys, 2 * mode)
    if rejection:
        plus = _plus_rejection(keys, 8, n)
    else:
        plus = _plus_exact(keys, 8, n)
    return plus + minus, np.conj(plus - minus)
