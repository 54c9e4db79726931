"""Closed-form curve families used by scenarios, tests and the CLI."""
from __future__ import annotations

import numpy as np

from .geometry import TWO_PI, PeriodicCurve

KEYHOLE_NECK = np.pi / 2


def flat(n: int = 64) -> PeriodicCurve:
    return PeriodicCurve.flat(n)


def sinusoid(n: int = 64, amplitude: float = 0.2, mode: int = 1, phase: float = 0.0) -> PeriodicCurve:
    return PeriodicCurve.from_function(
        lambda a: np.column_stack([np.zeros_like(a), amplitude * np.sin(mode * a + phase)]), n)


def keyhole_offsets(alpha, d: float, depth: float = 1.0):
    """Offsets of the keyhole trough whose neck walls sit exactly ``d`` apart.

    ``x(alpha) = alpha - (pi/2) sin alpha + (1/2) sin 2 alpha + (d/2) sin alpha`` has
    ``x(pi/2) = d/2`` and ``x'(pi/2) = 0``, and is odd, so the points
    ``alpha = +-pi/2`` face each other across a gap of width ``d`` with vertical
    tangents.  ``y = depth (1 + cos alpha) / 2`` is even and strictly monotone on
    ``(0, pi)``, so each wall is a graph over height.  The cap hangs into the
    lower (viscous) fluid, so the gap between the walls belongs to the upper fluid.
    """
    a = np.asarray(alpha, dtype=float)
    w1 = -(np.pi / 2) * np.sin(a) + 0.5 * np.sin(2 * a) + 0.5 * d * np.sin(a)
    w2 = 0.5 * depth * (1.0 + np.cos(a))
    return np.stack([w1, w2], axis=-1)


def keyhole_point(alpha, d: float, depth: float = 1.0, order: int = 0):
    """Closed-form ``z`` (or derivative) of the keyhole family at any alpha."""
    a = np.asarray(alpha, dtype=float)
    s, c = np.sin(a), np.cos(a)
    s2, c2 = np.sin(2 * a), np.cos(2 * a)
    k = np.pi / 2 - d / 2
    if order == 0:
        x = a - k * s + 0.5 * s2
        y = 0.5 * depth * (1 + c)
    elif order == 1:
        x = 1 - k * c + c2
        y = -0.5 * depth * s
    elif order == 2:
        x = k * s - 2 * s2
        y = -0.5 * depth * c
    else:
        raise ValueError("order must be 0, 1 or 2")
    return np.stack([x, y], axis=-1)


def keyhole(n: int = 256, d: float = 1e-2, depth: float = 1.0, **placement) -> PeriodicCurve:
    """Symmetric splash family; the closest pair is ``(-pi/2, pi/2)`` at distance ``d``."""
    return PeriodicCurve.from_function(lambda a: keyhole_offsets(a, d, depth), n, **placement)


def keyhole_pair():
    """Literal parameters of the neck pair; the first is the left wall."""
    return -np.pi / 2, np.pi / 2


def stretched(n: int = 64, eps: float = 0.3, lift: float = 0.0) -> PeriodicCurve:
    """``z = (alpha + eps sin alpha, lift cos alpha)``; chord-arc minimum on the diagonal."""
    return PeriodicCurve.from_function(
        lambda a: np.column_stack([eps * np.sin(a), lift * np.cos(a)]), n)


def _smooth_step(t):
    t = np.clip(t, 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        a = np.where(t > 0, np.exp(-1.0 / np.where(t > 0, t, 1.0)), 0.0)
        b = np.where(t < 1, np.exp(-1.0 / np.where(t < 1, 1.0 - t, 1.0)), 0.0)
    return a / (a + b)


def circular_dimple(n: int = 1024, radius: float = 1.0, core: float = 0.4) -> PeriodicCurve:
    """Flat curve carrying an exact circular arc of ``radius`` for ``|alpha - pi| <= core``.

    The arc is blended to zero by a C-infinity cutoff over ``core < |alpha - pi| < 2 core``.
    """
    if 2 * core >= radius:
        raise ValueError("need 2*core < radius")

    def offsets(a):
        s = a - np.pi
        chi = 1.0 - _smooth_step((np.abs(s) - core) / core)
        arc = radius - np.sqrt(np.clip(radius ** 2 - s ** 2, 0.0, None))
        return np.column_stack([np.zeros_like(a), chi * arc])

    return PeriodicCurve.from_function(offsets, n)


def crossing_sinusoid(n: int = 64) -> PeriodicCurve:
    """``z = (alpha, 0.5 sin 2 alpha)``: the chord from alpha=0 to alpha=pi meets the curve at pi/2."""
    return PeriodicCurve.from_function(
        lambda a: np.column_stack([np.zeros_like(a), 0.5 * np.sin(2 * a)]), n)


__all__ = [
    "flat", "sinusoid", "keyhole", "keyhole_offsets", "keyhole_point", "keyhole_pair",
    "stretched", "circular_dimple", "crossing_sinusoid", "KEYHOLE_NECK", "TWO_PI",
]
