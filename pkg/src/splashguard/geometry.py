"""Periodic interface curves, spectral derivatives and chord-arc functionals.

A curve is stored through its periodic offset ``w(alpha) = z(alpha) - (alpha, 0)``
sampled on the uniform grid ``alpha_j = 2*pi*j/n``.  An optional rigid
placement ``z -> Q z + b`` (a proper rotation plus a translation) lets rigid
motions act on a curve without touching the offsets, so every diagnostic can
be checked for equivariance exactly.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numpy.typing import NDArray
from scipy.optimize import minimize, minimize_scalar

from .errors import InvalidCurve

FloatArray = NDArray[np.float64]
TWO_PI = 2.0 * np.pi
MIN_SAMPLES = 16
_EVAL_CHUNK = 2048


def rotation(theta: float) -> FloatArray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


def perp(v):
    """``(x1, x2) -> (-x2, x1)`` along the last axis."""
    v = np.asarray(v, dtype=float)
    return np.stack([-v[..., 1], v[..., 0]], axis=-1)


def spectral_derivative(samples: np.ndarray, order: int = 1) -> np.ndarray:
    """Trigonometric derivative of 2*pi-periodic samples along axis 0.

    The Nyquist mode is dropped for odd orders, which keeps real data real.
    """
    samples = np.asarray(samples, dtype=float)
    n = samples.shape[0]
    if order == 0:
        return samples.copy()
    k = np.fft.fftfreq(n, d=1.0 / n)
    mult = (1j * k) ** order
    if order % 2 == 1:
        mult[n // 2] = 0.0
    shape = (n,) + (1,) * (samples.ndim - 1)
    coef = np.fft.fft(samples, axis=0)
    return np.real(np.fft.ifft(coef * mult.reshape(shape), axis=0))


class TrigInterpolant:
    """Evaluate the trigonometric interpolant of periodic samples anywhere.

    The Nyquist coefficient is split evenly between +n/2 and -n/2 so the
    interpolant is real and its derivatives are consistent with
    :func:`spectral_derivative` on the grid.
    """

    def __init__(self, samples):
        samples = np.asarray(samples, dtype=float)
        self.scalar = samples.ndim == 1
        data = samples.reshape(samples.shape[0], -1)
        n = data.shape[0]
        c = np.fft.fft(data, axis=0) / n
        half = n // 2
        k = np.concatenate([np.arange(half), [half, -half], np.arange(-half + 1, 0)])
        coef = np.concatenate([c[:half], 0.5 * c[half:half + 1], 0.5 * c[half:half + 1], c[half + 1:]])
        self.k = k.astype(float)
        self.coef = coef
        self.n = n

    def __call__(self, alpha, order: int = 0) -> np.ndarray:
        alpha = np.asarray(alpha, dtype=float)
        flat = alpha.ravel()
        fac = (1j * self.k) ** order
        out = np.empty((flat.size, self.coef.shape[1]))
        for start in range(0, flat.size, _EVAL_CHUNK):
            a = flat[start:start + _EVAL_CHUNK]
            phase = np.exp(1j * np.outer(a, self.k)) * fac
            out[start:start + _EVAL_CHUNK] = np.real(phase @ self.coef)
        if self.scalar:
            return out[:, 0].reshape(alpha.shape)
        return out.reshape(alpha.shape + (self.coef.shape[1],))

    def difference(self, alpha, base) -> np.ndarray:
        """``f(alpha) - f(base)`` without cancellation when the two are close."""
        alpha, base = np.broadcast_arrays(np.asarray(alpha, dtype=float), np.asarray(base, dtype=float))
        a, b = alpha.ravel(), base.ravel()
        out = np.empty((a.size, self.coef.shape[1]))
        for start in range(0, a.size, _EVAL_CHUNK):
            sl = slice(start, start + _EVAL_CHUNK)
            x = np.outer(a[sl] - b[sl], self.k)
            # exp(ix) - 1 written to keep relative accuracy for small x
            em1 = -2.0 * np.sin(0.5 * x) ** 2 + 1j * np.sin(x)
            phase = np.exp(1j * np.outer(b[sl], self.k)) * em1
            out[sl] = np.real(phase @ self.coef)
        if self.scalar:
            return out[:, 0].reshape(alpha.shape)
        return out.reshape(alpha.shape + (self.coef.shape[1],))


class PeriodicCurve:
    """Sampled 2*pi-periodic interface ``z(alpha) = Q[(alpha, 0) + w(alpha)] + b``."""

    def __init__(self, offsets, *, angle: float = 0.0, shift=(0.0, 0.0)):
        w = np.array(offsets, dtype=float)
        if w.ndim != 2 or w.shape[1] != 2:
            raise InvalidCurve("offsets must have shape (n, 2)")
        n = w.shape[0]
        if n < MIN_SAMPLES:
            raise InvalidCurve(f"need at least {MIN_SAMPLES} samples, got {n}")
        if n & (n - 1):
            raise InvalidCurve(f"n_samples must be a power of two, got {n}")
        if not np.isfinite(w).all():
            raise InvalidCurve("offsets contain non-finite values")
        w.setflags(write=False)
        self.offsets = w
        self.n_samples = n
        self.angle = float(angle)
        self.Q = rotation(self.angle)
        self.shift = np.array(shift, dtype=float)
        self.alpha = TWO_PI * np.arange(n) / n
        self.h = TWO_PI / n
        self._interp = TrigInterpolant(w)
        local = np.column_stack([self.alpha, np.zeros(n)]) + w
        self.z = self._place(local)
        w1 = spectral_derivative(w, 1)
        w2 = spectral_derivative(w, 2)
        self.z_alpha = (w1 + np.array([1.0, 0.0])) @ self.Q.T
        self.z_alphaalpha = w2 @ self.Q.T
        for arr in (self.z, self.z_alpha, self.z_alphaalpha):
            arr.setflags(write=False)

    # construction helpers -------------------------------------------------
    @classmethod
    def from_function(cls, offset_fn, n: int, **placement) -> "PeriodicCurve":
        alpha = TWO_PI * np.arange(n) / n
        return cls(np.asarray(offset_fn(alpha), dtype=float).reshape(n, 2), **placement)

    @classmethod
    def flat(cls, n: int = 64, **placement) -> "PeriodicCurve":
        return cls(np.zeros((n, 2)), **placement)

    def moved(self, theta: float = 0.0, translation=(0.0, 0.0)) -> "PeriodicCurve":
        """Apply the rigid motion ``x -> R(theta) x + translation`` to the curve."""
        Rm = rotation(theta)
        return PeriodicCurve(self.offsets, angle=self.angle + theta,
                             shift=Rm @ self.shift + np.asarray(translation, dtype=float))

    def with_offsets(self, offsets) -> "PeriodicCurve":
        return PeriodicCurve(offsets, angle=self.angle, shift=self.shift)

    # evaluation -----------------------------------------------------------
    @property
    def period_vector(self) -> FloatArray:
        return self.Q @ np.array([TWO_PI, 0.0])

    def _place(self, local):
        return local @ self.Q.T + self.shift

    def eval(self, alpha, order: int = 0) -> np.ndarray:
        """``z`` or its ``order``-th alpha-derivative at arbitrary parameters."""
        alpha = np.asarray(alpha, dtype=float)
        w = self._interp(alpha, order)
        if order == 0:
            local = w + np.stack([alpha, np.zeros_like(alpha)], axis=-1)
            return self._place(local)
        if order == 1:
            w = w + np.array([1.0, 0.0])
        return w @ self.Q.T

    def chord(self, alpha, beta) -> np.ndarray:
        """``z(alpha) - z(beta)``, accurate to relative round-off for close parameters."""
        alpha, beta = np.broadcast_arrays(np.asarray(alpha, dtype=float), np.asarray(beta, dtype=float))
        dw = self._interp.difference(alpha, beta)
        local = dw + np.stack([alpha - beta, np.zeros_like(alpha)], axis=-1)
        return local @ self.Q.T

    def speed(self) -> FloatArray:
        return np.hypot(self.z_alpha[:, 0], self.z_alpha[:, 1])

    def min_speed(self) -> float:
        return float(self.speed().min())

    def check_speed(self, A: float) -> bool:
        """True when ``min |z_alpha| >= 1/A`` on the grid."""
        return self.min_speed() >= 1.0 / A

    def __repr__(self):
        return f"PeriodicCurve(n_samples={self.n_samples}, angle={self.angle:g})"


@dataclass(frozen=True)
class ChordArcReport:
    ca_value: float
    argmin_pair: tuple
    fz_at_argmin: float
    on_diagonal: bool


def _representatives(alpha: float, beta: float):
    """Shifts ``beta + 2*pi*k`` lying within one period of ``alpha``."""
    k0 = np.round((alpha - beta) / TWO_PI)
    reps = []
    for k in (k0 - 1, k0, k0 + 1):
        b = beta + TWO_PI * k
        if abs(alpha - b) <= TWO_PI * (1 + 1e-12):
            reps.append(b)
    return reps


def chord_arc_F(curve: PeriodicCurve, alpha: float, beta: float) -> float:
    """Chord-arc quotient, minimised over the periodic representatives of ``beta``."""
    alpha = float(alpha)
    best = np.inf
    for b in _representatives(alpha, float(beta)):
        gap = abs(alpha - b)
        if gap <= 1e-14 * max(1.0, abs(alpha)):
            val = float(np.linalg.norm(curve.eval(alpha, 1)))
        else:
            val = float(np.linalg.norm(curve.eval(alpha) - curve.eval(b)) / gap)
        best = min(best, val)
    return best


def _pair_table(z: np.ndarray, period: np.ndarray, k: int) -> np.ndarray:
    """``z(alpha_j + k h)`` for every node ``j``, images included."""
    n = z.shape[0]
    idx = np.arange(n) + k
    wraps = idx // n
    return z[idx % n] + wraps[:, None] * period


def grid_chord_arc(curve: PeriodicCurve):
    """Discrete minimum of F over all node pairs; returns (value, j, k)."""
    n, h = curve.n_samples, curve.h
    z, P = curve.z, curve.period_vector
    speeds = curve.speed()
    j0 = int(np.argmin(speeds))
    best = (float(speeds[j0]), j0, 0)
    for k in range(1, n + 1):
        zk = _pair_table(z, P, k)
        F = np.hypot(*(zk - z).T) / (k * h)
        j = int(np.argmin(F))
        if F[j] < best[0]:
            best = (float(F[j]), j, k)
    return best


def chord_arc_min(curve: PeriodicCurve) -> ChordArcReport:
    """Infimum of F over one period, refined below grid resolution."""
    h = curve.h
    value, j, k = grid_chord_arc(curve)
    a0 = curve.alpha[j]

    if k == 0:
        res = minimize_scalar(lambda a: np.linalg.norm(curve.eval(a, 1)),
                              bounds=(a0 - 2 * h, a0 + 2 * h), method="bounded",
                              options={"xatol": 1e-13})
        if res.fun < value:
            return ChordArcReport(float(res.fun), (float(res.x), float(res.x)), float(res.fun), True)
        return ChordArcReport(value, (a0, a0), value, True)

    def F(x):
        a, delta = x
        if delta <= 1e-12:
            return float(np.linalg.norm(curve.eval(a, 1)))
        return float(np.linalg.norm(curve.eval(a + delta) - curve.eval(a)) / delta)

    d0 = k * h
    bounds = [(a0 - 2 * h, a0 + 2 * h), (max(d0 - 2 * h, 1e-12), min(d0 + 2 * h, TWO_PI))]
    res = minimize(F, x0=[a0, d0], method="Powell", bounds=bounds,
                   options={"xtol": 1e-13, "ftol": 1e-15, "maxfev": 20000})
    a, delta = (float(res.x[0]), float(res.x[1])) if res.fun < value else (a0, d0)
    fval = min(float(res.fun), value)
    on_diag = delta < 1e-8
    return ChordArcReport(fval, (a, a + delta), fval, on_diag)


def normal(curve: PeriodicCurve, alpha) -> np.ndarray:
    """``n = -(z_alpha)^perp``."""
    return -perp(curve.eval(alpha, 1))


def curvature(curve: PeriodicCurve, alpha) -> np.ndarray:
    d1 = curve.eval(alpha, 1)
    d2 = curve.eval(alpha, 2)
    num = d1[..., 0] * d2[..., 1] - d1[..., 1] * d2[..., 0]
    return num / np.hypot(d1[..., 0], d1[..., 1]) ** 3


def grid_curvature(curve: PeriodicCurve) -> FloatArray:
    d1, d2 = curve.z_alpha, curve.z_alphaalpha
    return (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]) / curve.speed() ** 3


def c_norm(curve: PeriodicCurve, order: int = 4) -> float:
    """``sum_{m<=order} sup |d^m w|`` of the offsets ``z - (alpha, 0)``."""
    total = 0.0
    for m in range(order + 1):
        total += float(np.abs(spectral_derivative(curve.offsets, m)).max())
    return total


# serialization ------------------------------------------------------------
def write_curve(curve: PeriodicCurve, path) -> None:
    lines = [str(curve.n_samples)]
    if curve.angle != 0.0 or np.any(curve.shift != 0.0):
        lines.append(f"# placement {float(curve.angle)!r} {float(curve.shift[0])!r} {float(curve.shift[1])!r}")
    for a, (w1, w2) in zip(curve.alpha, curve.offsets):
        lines.append(f"{float(a)!r} {float(w1)!r} {float(w2)!r}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_curve(path) -> PeriodicCurve:
    text = Path(path).read_text().splitlines()
    rows, placement, n = [], {}, None
    for raw in text:
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            parts = line[1:].split()
            if parts and parts[0] == "placement":
                placement = {"angle": float(parts[1]), "shift": (float(parts[2]), float(parts[3]))}
            continue
        if n is None:
            n = int(line)
            continue
        rows.append([float(v) for v in line.split()])
    data = np.array(rows)
    if n is None or data.shape != (n, 3):
        raise InvalidCurve(f"{path}: expected {n} rows of 'alpha w1 w2'")
    expected = TWO_PI * np.arange(n) / n
    if not np.allclose(data[:, 0], expected, atol=1e-12):
        raise InvalidCurve(f"{path}: alpha column is not the uniform grid")
    return PeriodicCurve(data[:, 1:], **placement)
