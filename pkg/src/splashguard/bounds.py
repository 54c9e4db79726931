"""Quantitative checks near a splash: velocity differences, d|log d| envelopes,
the graph operators of the sheet estimate, and the log-Gronwall closure.
"""
from __future__ import annotations

import csv
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DomainError, InconsistentRepresentations
from .families import _smooth_step
from .geometry import TWO_PI
from .kernels import (BetweenGraphs, BulkVorticity, CellQuadrature, birkhoff_rott_refined,
                      interface_velocity, rectangle_kernel_integral, sheet_local_term)
from .splash import SplashFrame

DUAL_ROUTE_RTOL = 1e-6


def thread_limit() -> int:
    env = os.environ.get("SPLASHGUARD_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return max(1, os.cpu_count() or 1)


# ---------------------------------------------------------------------------
# approach rate
# ---------------------------------------------------------------------------
def dtilde_from_velocities(z1, z2, u1, u2) -> float:
    """``-2 D~^2 (z1 - z2).(u1 - u2)`` with ``D~ = |z1 - z2|^-2``."""
    dz = np.asarray(z1, dtype=float) - np.asarray(z2, dtype=float)
    D = 1.0 / float(dz @ dz)
    return -2.0 * D * D * float(dz @ (np.asarray(u1, dtype=float) - np.asarray(u2, dtype=float)))


def dtilde_derivative(state, omega_v: Optional[BulkVorticity], alpha1, alpha2, *,
                      refined: bool = True, normalization: str = "paper") -> float:
    curve = state.curve
    u = [interface_velocity(state, omega_v, a, refined=refined, normalization=normalization).value
         for a in (alpha1, alpha2)]
    return dtilde_from_velocities(curve.eval(alpha1), curve.eval(alpha2), u[0], u[1])


# ---------------------------------------------------------------------------
# graded frame grid
# ---------------------------------------------------------------------------
def graded_cells(d: float, window: float, n_core: int = 32):
    """Square cells centred on the frame origin, refined toward the two approach points.

    The core ``[-d, d]^2`` uses cells of size ``d / n_core``; each surrounding
    ring doubles both its half-side and the cell size.  Cells are clipped to
    ``[-window, window]^2``.
    """
    if not 0 < d < window:
        raise ValueError("need 0 < d < window")
    h = d / n_core
    m = 2 * n_core
    idx = np.arange(m)
    cx, cy = np.meshgrid(-d + (idx + 0.5) * h, -d + (idx + 0.5) * h)
    centers = [np.column_stack([cx.ravel(), cy.ravel()])]
    halves = [np.full((m * m, 2), 0.5 * h)]
    S = d
    while S < window:
        S, h = 2 * S, 2 * h
        c1 = -S + (idx + 0.5) * h
        gx, gy = np.meshgrid(c1, c1)
        ring = (np.abs(gx) > S / 2) | (np.abs(gy) > S / 2)
        centers.append(np.column_stack([gx[ring], gy[ring]]))
        halves.append(np.full((int(ring.sum()), 2), 0.5 * h))
    c = np.concatenate(centers)
    hf = np.concatenate(halves)
    lo = np.maximum(c - hf, -window)
    hi = np.minimum(c + hf, window)
    keep = np.all(hi > lo, axis=1)
    return 0.5 * (lo + hi)[keep], 0.5 * (hi - lo)[keep]


def _same_frame(region, frame) -> bool:
    return (isinstance(region, BetweenGraphs) and np.allclose(region.Q, frame.Q, atol=1e-14)
            and np.allclose(region.translation, frame.translation, atol=1e-14))


def frame_strength(frame: SplashFrame, omega_v: BulkVorticity, centers, half, subsample: int = 4):
    """Cell-averaged vorticity times coverage on frame-aligned cells."""
    region = omega_v.region
    if omega_v.kind == "analytic" and _same_frame(region, frame):
        world = frame.R(centers)
        x0, x1, y0, y1 = omega_v.bounds
        inb = (world[:, 0] >= x0) & (world[:, 0] <= x1) & (world[:, 1] >= y0) & (world[:, 1] <= y1)
        val = np.asarray(omega_v.func(world), dtype=float) * np.ones(len(world))
        return np.where(inb, val, 0.0) * region.frame_coverage(centers, half)
    off = (np.arange(subsample) + 0.5) / subsample * 2 - 1
    ox, oy = np.meshgrid(off, off)
    o = np.stack([ox.ravel(), oy.ravel()], axis=-1)
    sub = centers[:, None, :] + o[None] * half[:, None, :]
    vals = omega_v(frame.R(sub.reshape(-1, 2))).reshape(len(centers), -1)
    return vals.mean(axis=1)


@dataclass(frozen=True)
class SplashCells:
    """Frame-coordinate quadrature cells for one frame and bulk field."""

    frame: SplashFrame
    quad: CellQuadrature

    @classmethod
    def build(cls, frame: SplashFrame, omega_v: BulkVorticity, window: Optional[float] = None,
              n_core: int = 32):
        L = min(frame.half_width, frame.half_height) if window is None else float(window)
        centers, half = graded_cells(frame.d, L, n_core)
        s = frame_strength(frame, omega_v, centers, half)
        keep = s != 0.0
        return cls(frame, CellQuadrature(centers[keep], half[keep], s[keep], frame.Q, frame.translation))

    def approach_points(self):
        d = self.frame.d
        return np.array([0.0, -d / 2]), np.array([0.0, d / 2])

    def route_a_cells(self) -> np.ndarray:
        """Per-cell contributions to ``int h_d``, computed in frame coordinates.

        Cells far from both approach points use the closed-form ``h_d``; a cell
        near either point uses the exact rectangle integral for that point.
        """
        q, d = self.quad, self.frame.d
        y1, y2 = q.centers[:, 0], q.centers[:, 1]
        contrib = q.strength * q.area * 2 * d * y1 * y2 / (
            (y1 ** 2 + (d / 2 - y2) ** 2) * (y1 ** 2 + (d / 2 + y2) ** 2))
        p1, p2 = self.approach_points()
        n1, n2 = q.near_mask(p1), q.near_mask(p2)
        fix = np.flatnonzero(n1 | n2)
        if fix.size:
            c, hf, s, a = q.centers[fix], q.half[fix], q.strength[fix], q.area[fix]
            parts = []
            for p, near in ((p1, n1[fix]), (p2, n2[fix])):
                r = p - c
                mid = a / np.einsum("ij,ij->i", r, r) * r[:, 0]
                if near.any():
                    mid[near] = rectangle_kernel_integral(p, c[near], hf[near])[:, 1]
                parts.append(mid)
            contrib[fix] = s * (parts[0] - parts[1])
        return contrib

    def route_b(self, normalization: str = "paper") -> float:
        """Same quantity through world-frame Biot-Savart at the two interface points."""
        f = self.frame
        u = self.quad.velocity(np.array([f.z1, f.z2]), normalization)
        return float(np.dot(u[0] - u[1], f.e))


@dataclass(frozen=True)
class VDifference:
    value: float
    direct: float
    near: float
    far: float
    n_cells: int


def v_difference(frame: SplashFrame, omega_v: BulkVorticity, *, window: Optional[float] = None,
                 n_core: int = 32, near_radius: float = 0.25, rtol: float = DUAL_ROUTE_RTOL,
                 normalization: str = "paper") -> VDifference:
    """``(V1 - V2) . e_2`` in frame coordinates, cross-checked by a world-frame evaluation.

    ``near``/``far`` split the integral by whether a cell centre lies within
    ``near_radius * d`` of an approach point.
    """
    cells = SplashCells.build(frame, omega_v, window, n_core)
    fac = 1.0 if normalization == "paper" else 1.0 / TWO_PI
    contrib = fac * cells.route_a_cells()
    value = float(contrib.sum())
    direct = cells.route_b(normalization)
    # a cancelling integral is compared against the size of its summands
    scale = max(abs(value), abs(direct), 1e-9 * float(np.abs(contrib).sum()), 1e-300)
    if abs(value - direct) > rtol * scale:
        raise InconsistentRepresentations(
            f"frame route {value:.16g} vs world route {direct:.16g} (rel {abs(value - direct) / scale:.2e})")
    p1, p2 = cells.approach_points()
    c = cells.quad.centers
    r = near_radius * frame.d
    near = (np.hypot(*(c - p1).T) < r) | (np.hypot(*(c - p2).T) < r)
    near_part = float(contrib[near].sum())
    return VDifference(value, direct, near_part, value - near_part, len(c))


def near_far_split(frame: SplashFrame, omega_v: BulkVorticity, **kw):
    res = v_difference(frame, omega_v, **kw)
    return res.near, res.far


def w_difference(frame: SplashFrame, state, *, order: int = 16) -> float:
    """``(W1 - W2) . e_2`` for the sheet part of the velocity (local term plus Birkhoff-Rott)."""
    curve, omega = state.curve, np.asarray(state.omega, dtype=float)
    a1, a2 = frame.alpha1, frame.alpha2
    u = []
    for a, partner in ((a1, a2), (a2, a1)):
        br = birkhoff_rott_refined(curve, omega, a, focus=partner, order=order)
        u.append(br + sheet_local_term(curve, omega, a))
    return float(np.dot(u[0] - u[1], frame.e))


# ---------------------------------------------------------------------------
# graph operators of the sheet estimate
# ---------------------------------------------------------------------------
CUTOFF_DESCRIPTION = "psi_r = 1 on |x| <= r/2, 0 on |x| >= r, exp(-1/t) smooth transition"


def cutoff(x, r: float) -> np.ndarray:
    """C-infinity bump: 1 on ``|x| <= r/2``, 0 on ``|x| >= r``."""
    t = (np.abs(np.asarray(x, dtype=float)) - 0.5 * r) / (0.5 * r)
    return 1.0 - _smooth_step(t)


def phi0(alpha, eps: float) -> np.ndarray:
    """Unit-mass smooth bump supported in ``(-sqrt(eps), sqrt(eps))``."""
    w = np.sqrt(eps)
    x = np.asarray(alpha, dtype=float) / w
    inside = np.abs(x) < 1
    out = np.zeros_like(x)
    out[inside] = np.exp(-1.0 / (1.0 - x[inside] ** 2))
    # int_{-1}^{1} exp(-1/(1-x^2)) dx
    return out / (0.443993816168079 * w)


@dataclass(frozen=True)
class GraphOperators:
    """Discrete kernels of the Poisson-type operator ``M`` and its Hilbert-type companion ``H``.

    Grid: ``n + 1`` uniform nodes on ``[-2r, 2r]`` with ``r = sqrt(eps)/64``,
    trapezoid weights ``w``.  Matrices act as ``(M omega)_i = sum_j M_ij omega_j``
    with quadrature weights folded in; ``kernel_M``/``kernel_H`` hold the bare
    kernel values (``kernel_H`` zero on the diagonal).
    """

    eps: float
    r: float
    alpha: np.ndarray
    weights: np.ndarray
    gap: np.ndarray
    M: np.ndarray
    H: np.ndarray
    kernel_M: np.ndarray = field(repr=False, default=None)
    kernel_H: np.ndarray = field(repr=False, default=None)

    @classmethod
    def build(cls, eps: float, f: Optional[Callable] = None, g: Optional[Callable] = None, n: int = 512):
        if not eps > 0:
            raise ValueError("eps must be positive")
        if n % 2:
            raise ValueError("n must be even so the grid contains 0")
        r = np.sqrt(eps) / 64.0
        a = np.linspace(-2 * r, 2 * r, n + 1)
        w = np.full(n + 1, a[1] - a[0])
        w[0] = w[-1] = 0.5 * (a[1] - a[0])
        fa = np.zeros_like(a) if f is None else np.asarray(f(a), dtype=float)
        ga = np.zeros_like(a) if g is None else np.asarray(g(a), dtype=float)
        gap = 2 * eps + fa + ga
        diff = a[:, None] - a[None, :]
        cut = cutoff(a, r)[:, None] * cutoff(diff, r)
        G = gap[:, None]
        K = G / (diff ** 2 + G ** 2) * cut / TWO_PI
        with np.errstate(divide="ignore", invalid="ignore"):
            KH = np.where(diff != 0, G ** 2 / (diff * (diff ** 2 + G ** 2)), 0.0) * cut / TWO_PI
        # principal value by symmetric pairs at odd offsets (weight 2h), diagonal excluded;
        # its discrete symbol stays flat up to Nyquist, so the operator norm converges
        k = np.arange(n + 1)
        odd = (k[:, None] - k[None, :]) % 2 == 1
        wh = np.where(odd, 2.0 * (a[1] - a[0]), 0.0)
        return cls(eps, r, a, w, gap, K * w[None, :], KH * wh, K, KH)

    @classmethod
    def from_frame(cls, frame: SplashFrame, n: int = 512):
        eps = 0.5 * frame.d
        if 2 * np.sqrt(eps) / 64.0 > frame.half_width:
            raise ValueError("frame window is narrower than the operator support")
        return cls.build(eps, lambda a: -frame.f1(a) - eps, lambda a: frame.f2(a) - eps, n)

    def _samples(self, omega):
        return np.asarray(omega(self.alpha) if callable(omega) else omega, dtype=float)

    def apply_M(self, omega) -> np.ndarray:
        return self.M @ self._samples(omega)

    def apply_H(self, omega) -> np.ndarray:
        return self.H @ self._samples(omega)

    def adjoint(self, A: np.ndarray) -> np.ndarray:
        """Adjoint against the trapezoid inner product: ``W^-1 A^T W``."""
        return (A.T * self.weights[None, :]) / self.weights[:, None]

    def operator_norm(self, A: np.ndarray) -> float:
        s = np.sqrt(self.weights)
        return float(np.linalg.norm(s[:, None] * A / s[None, :], 2))

    def test_function_image(self, phi=None) -> np.ndarray:
        """``(1 + 4 (M*)^2) phi`` on the grid (``phi`` defaults to the unit bump)."""
        p = phi0(self.alpha, self.eps) if phi is None else self._samples(phi)
        Ms = self.adjoint(self.M)
        return p + 4.0 * Ms @ (Ms @ p)


def poisson_mass(eps: float, gap: Optional[float] = None) -> float:
    """Reference ``(M 1)(0)`` for flat graphs by adaptive quadrature."""
    from scipy.integrate import quad

    r = np.sqrt(eps) / 64.0
    G = 2 * eps if gap is None else gap
    val, _ = quad(lambda b: G / (b * b + G * G) * float(cutoff(b, r)) / TWO_PI, -r, r,
                  points=[0.0, -r / 2, r / 2], limit=400, epsabs=1e-15, epsrel=1e-13)
    return float(val)


# ---------------------------------------------------------------------------
# log-Gronwall closure
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class GronwallResult:
    numeric: float
    closed_form: float
    crude_envelope: float
    steps: int


def gronwall_integrate(D0: float, C: float, dt: float, step: float = 1e-4) -> GronwallResult:
    """RK4 for ``D' = C D log D`` over ``[0, dt]``, integrated in ``log D``.

    Exact solution ``log D(t) = e^{Ct} log D0``; the crude envelope is ``D0 exp(exp(C dt))``.
    """
    if not D0 > 1:
        raise DomainError(f"D0 must exceed 1 (got {D0})")
    if not C > 0 or dt < 0:
        raise DomainError("need C > 0 and dt >= 0")
    m = max(1, int(np.ceil(dt / step)))
    hstep = dt / m
    y = np.log(D0)  # (log D)' = C log D
    for _ in range(m):
        k1 = C * y
        k2 = C * (y + 0.5 * hstep * k1)
        k3 = C * (y + 0.5 * hstep * k2)
        k4 = C * (y + hstep * k3)
        y += hstep / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    return GronwallResult(float(np.exp(y)), float(np.exp(np.log(D0) * np.exp(C * dt))),
                          float(D0 * np.exp(np.exp(C * dt))), m)


@dataclass(frozen=True)
class GronwallTrace:
    """Recorded ``D`` (sup of inverse-square separation) and ``D~`` (at the tracked pair)."""

    times: np.ndarray
    D: np.ndarray
    Dtilde: np.ndarray
    C: Optional[float] = None
    eps1: float = 0.1
    derivative: np.ndarray = field(default=None)

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        D = np.asarray(self.D, dtype=float)
        Dt = np.asarray(self.Dtilde, dtype=float)
        if not (t.shape == D.shape == Dt.shape) or t.ndim != 1 or len(t) < 2:
            raise ValueError("times, D and Dtilde must be 1-d of equal length >= 2")
        if np.any(np.diff(t) <= 0):
            raise ValueError("times must increase")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "D", D)
        object.__setattr__(self, "Dtilde", Dt)
        if self.derivative is None:
            object.__setattr__(self, "derivative", np.gradient(D, t))

    def sup_consistent(self, rtol: float = 1e-9) -> bool:
        return bool(np.all(self.Dtilde <= self.D * (1 + rtol)))

    def fitted_C(self) -> float:
        """Smallest ``C`` for which consecutive samples satisfy the discrete inequality."""
        c = _interval_rates(self.times, self.D)
        return float(np.nanmax(c)) if np.isfinite(c).any() else 0.0

    def closure_bound(self, C: Optional[float] = None) -> float:
        C = self.resolved_C() if C is None else C
        D0 = self.D[0]
        span = self.times[-1] - self.times[0]
        if D0 <= 1:
            return float(D0) if C == 0 else float(np.exp(np.exp(C * span)) * D0)
        return float(np.exp(np.log(D0) * np.exp(C * span)))

    def resolved_C(self) -> float:
        return float(self.C) if self.C is not None else max(self.fitted_C(), 0.0)


def _dlogd_integrals(t, D):
    g = D * np.log(D)
    return 0.5 * (g[1:] + g[:-1]) * np.diff(t)


def _interval_rates(t, D):
    """Per-interval ``(D_k - D_{k-1}) / int D log D`` on intervals where ``D > e``."""
    ok = (D[1:] > np.e) & (D[:-1] > np.e)
    with np.errstate(divide="ignore", invalid="ignore"):
        rates = np.diff(D) / _dlogd_integrals(t, np.maximum(D, 1.0))
    return np.where(ok, rates, np.nan)


@dataclass(frozen=True)
class Certificate:
    passed: bool
    violations: list
    C: float
    D_final: float
    envelope: float
    crude_envelope: float
    margin: float
    ca_lower_bound: float
    c0: float
    contradiction: bool

    def to_dict(self) -> dict:
        return {k: (list(map(int, v)) if k == "violations" else v) for k, v in self.__dict__.items()}


def splash_certificate(trace: GronwallTrace, eps4: float, K: float = 2.0, rtol: float = 1e-9) -> Certificate:
    """Discrete integral-inequality check plus the envelope chain and implied chord-arc bound.

    The inequality ``D(s) <= D(r) + C int_r^s D log D`` is checked on every
    consecutive pair with both samples above ``e``; an index is flagged when the
    increment exceeds the trapezoid integral by more than ``rtol`` relative.
    """
    t, D = trace.times, trace.D
    C = trace.resolved_C()
    inc = np.diff(D)
    allowed = C * _dlogd_integrals(t, np.maximum(D, 1.0))
    active = (D[1:] > np.e) & (D[:-1] > np.e)
    bad = active & (inc > allowed + rtol * D[1:])
    violations = [int(k) + 1 for k in np.flatnonzero(bad)]
    env = trace.closure_bound(C)
    span = t[-1] - t[0]
    crude = float(D[0] * np.exp(np.exp(C * span)))
    D_end = float(D[-1])
    margin = (env - D_end) / env
    chain = D_end <= env * (1 + rtol)
    eps1 = trace.eps1
    ca_lb = float(min(eps1, eps1 / np.sqrt(env)))
    c0 = ca_lb / eps4
    return Certificate(not violations and chain, violations, float(C), D_end, float(env), crude,
                       float(margin), ca_lb, float(c0), bool(ca_lb > eps4 / K))


# ---------------------------------------------------------------------------
# d-sweeps
# ---------------------------------------------------------------------------
REPORT_HEADER = ("d", "v_diff", "w_diff", "ratio_v", "ratio_w", "I_near", "I_far")
ENVELOPE_SLOPE_FLOOR = -0.05


def envelope_slope(d_values, ratios, decades: float = 2.0) -> float:
    """Least-squares slope of ``ratios`` against ``log d`` over the smallest ``decades`` of d."""
    d = np.asarray(d_values, dtype=float)
    r = np.asarray(ratios, dtype=float)
    sel = d <= d.min() * 10 ** decades * (1 + 1e-12)
    if sel.sum() < 2:
        raise ValueError("need at least two sweep points in the fitting window")
    return float(np.polyfit(np.log(d[sel]), r[sel], 1)[0])


@dataclass(frozen=True)
class SweepEntry:
    d: float
    v: VDifference
    w: float


@dataclass(frozen=True)
class BoundReport:
    d_values: np.ndarray
    v_diff: np.ndarray
    w_diff: np.ndarray
    near_far_parts: np.ndarray
    direct_v: np.ndarray
    cutoff: str = CUTOFF_DESCRIPTION

    @property
    def log_scale(self) -> np.ndarray:
        return self.d_values * np.abs(np.log(self.d_values))

    @property
    def ratio_v(self) -> np.ndarray:
        return self.v_diff / self.log_scale

    @property
    def ratio_w(self) -> np.ndarray:
        return self.w_diff / self.log_scale

    @property
    def envelope_ratios(self) -> np.ndarray:
        return np.column_stack([self.ratio_v, self.ratio_w])

    @property
    def fitted_C(self) -> tuple:
        return float(self.ratio_v.max()), float(self.ratio_w.max())

    def near_ratio(self) -> np.ndarray:
        return np.abs(self.near_far_parts[:, 0]) / self.d_values

    def far_ratio(self, c: float = 0.25) -> np.ndarray:
        return np.abs(self.near_far_parts[:, 1]) / (self.d_values * np.abs(np.log(c * self.d_values)))

    def summary(self) -> dict:
        near = self.near_ratio()
        med = float(np.median(near))
        out = {
            "fitted_C_v": self.fitted_C[0],
            "fitted_C_w": self.fitted_C[1],
            "near_ratio_median": med,
            "near_ratio_spread": float(max(near.max() / med, med / near.min())) if med > 0 else None,
            "far_ratio_log_d_max": float((np.abs(self.near_far_parts[:, 1]) / self.log_scale).max()),
            "far_ratio_log_cd_max": float(self.far_ratio().max()),
            "cutoff": self.cutoff,
        }
        if len(self.d_values) >= 2:
            out["slope_v"] = envelope_slope(self.d_values, self.ratio_v)
            out["slope_w"] = envelope_slope(self.d_values, self.ratio_w)
            out["envelope_ok"] = bool(min(out["slope_v"], out["slope_w"]) >= ENVELOPE_SLOPE_FLOOR)
        return out

    def to_csv(self, path) -> None:
        with Path(path).open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(REPORT_HEADER)
            for i, d in enumerate(self.d_values):
                w.writerow([repr(float(x)) for x in (d, self.v_diff[i], self.w_diff[i], self.ratio_v[i],
                                                     self.ratio_w[i], *self.near_far_parts[i])])

    def write_json(self, path) -> None:
        Path(path).write_text(json.dumps(self.summary(), indent=2))


def default_d_values(lo_exp: int = -5, hi_exp: int = -1, per_decade: int = 2) -> np.ndarray:
    k = np.arange(hi_exp * per_decade, lo_exp * per_decade - 1, -1)
    return 10.0 ** (k / per_decade)


def d_sweep(case: Callable, d_values: Sequence[float], threads: Optional[int] = None) -> BoundReport:
    """Evaluate ``case(d) -> (frame, omega_v, state)`` over ``d_values`` concurrently."""
    d_values = np.sort(np.asarray(d_values, dtype=float))[::-1]
    if np.any(d_values <= 0) or np.any(d_values >= 1):
        raise ValueError("sweep values must lie in (0, 1)")

    def one(d):
        frame, omega_v, state = case(float(d))
        return SweepEntry(float(d), v_difference(frame, omega_v), w_difference(frame, state))

    with ThreadPoolExecutor(max_workers=min(threads or thread_limit(), len(d_values))) as pool:
        entries = list(pool.map(one, d_values))
    return BoundReport(d_values,
                       np.array([abs(e.v.value) for e in entries]),
                       np.array([abs(e.w) for e in entries]),
                       np.array([[e.v.near, e.v.far] for e in entries]),
                       np.array([e.v.direct for e in entries]))


def keyhole_case(d: float, n: int = 256, window: float = 0.25, bulk_h: float = 0.01):
    """Default sweep member: keyhole splash curve, unit bulk vorticity on the left half of
    the lower fluid region, and a non-symmetric interface vorticity."""
    from .dynamics import SheetState
    from .families import keyhole, keyhole_pair
    from .splash import build_splash_frame

    curve = keyhole(n, d)
    a1, a2 = keyhole_pair()
    frame = build_splash_frame(curve, a1, a2, half_width=window)
    region = BetweenGraphs.in_frame(frame, lower=lambda r: np.full_like(r, -window), upper=frame.f1,
                                    rho_range=(-window, 0.0))
    # world box holding the rotated window
    cx, cy = frame.translation
    reach = window * np.sqrt(2.0)
    omega_v = BulkVorticity.analytic("unit_left_lower", lambda p: np.ones(len(p)),
                                     bounds=(cx - reach, cx + reach, cy - reach, cy + reach), h=bulk_h,
                                     region=region)
    a = curve.alpha
    state = SheetState(curve, 1.0 + 0.5 * np.sin(a) + 0.25 * np.cos(2 * a))
    return frame, omega_v, state
