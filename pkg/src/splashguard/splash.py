"""Splash candidates: closest approach pair, side conditions and the rigid splash frame."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import BarycentricInterpolator
from scipy.optimize import minimize

from .errors import GraphExtractionFailed, NoSplashCandidate, OutsideWindow
from .geometry import TWO_PI, PeriodicCurve, chord_arc_min

DEFAULT_EPS = {"eps1": 0.1, "eps2": 0.05, "eps4": 0.05, "eps5": 0.2}
NEWTON_TOL = 1e-12


# ---------------------------------------------------------------------------
# closest pair
# ---------------------------------------------------------------------------
def _sqdist_parts(curve, a, delta):
    b = a + delta
    dz = curve.eval(a) - curve.eval(b)
    za, zb = curve.eval(a, 1), curve.eval(b, 1)
    zaa, zbb = curve.eval(a, 2), curve.eval(b, 2)
    return dz, za, zb, zaa, zbb


def _sqdist(x, curve):
    dz = curve.eval(x[0]) - curve.eval(x[0] + x[1])
    return float(dz @ dz)


def _sqdist_grad(x, curve):
    dz, za, zb, _, _ = _sqdist_parts(curve, x[0], x[1])
    return np.array([2 * dz @ (za - zb), -2 * dz @ zb])


def _sqdist_hess(x, curve):
    dz, za, zb, zaa, zbb = _sqdist_parts(curve, x[0], x[1])
    t = za - zb
    haa = 2 * (t @ t + dz @ (zaa - zbb))
    had = 2 * (-(zb @ t) - dz @ zbb)
    hdd = 2 * (zb @ zb - dz @ zbb)
    return np.array([[haa, had], [had, hdd]])


def grid_closest_pair(curve: PeriodicCurve, eps1: float):
    """Grid minimiser of ``|z(a) - z(a + delta)|`` over ``eps1 <= delta <= 1/eps1``."""
    n, h = curve.n_samples, curve.h
    kmin = max(1, int(np.ceil(eps1 / h - 1e-12)))
    kmax = int(np.floor(1.0 / (eps1 * h) + 1e-12))
    z = curve.z
    P = curve.period_vector
    best = (np.inf, 0, 0)
    chunk = max(1, 4_000_000 // n)
    for k0 in range(kmin, kmax + 1, chunk):
        ks = np.arange(k0, min(kmax, k0 + chunk - 1) + 1)
        idx = np.arange(n)[:, None] + ks[None, :]
        wrap = idx // n
        partner = z[idx % n] + wrap[..., None] * P
        dist = np.linalg.norm(z[:, None, :] - partner, axis=-1)
        j, k = np.unravel_index(int(np.argmin(dist)), dist.shape)
        if dist[j, k] < best[0]:
            best = (float(dist[j, k]), int(j), int(ks[k]))
    return best


def find_closest_pair(curve: PeriodicCurve, eps1: float = DEFAULT_EPS["eps1"],
                      eps2: float = DEFAULT_EPS["eps2"], check_ca: bool = True):
    """``(alpha1, alpha2, d)`` minimising ``|z(a1) - z(a2)|`` with ``eps1 <= a2 - a1 <= 1/eps1``.

    ``alpha1`` lies in ``[0, 2 pi)``; ``alpha2`` is literal (not reduced), so
    ``z(alpha2)`` is the actual partner point.
    """
    if check_ca:
        ca = chord_arc_min(curve).ca_value
        if ca > eps2:
            raise NoSplashCandidate(f"chord-arc value {ca:.4g} exceeds threshold {eps2:g}")
    dist, j, k = grid_closest_pair(curve, eps1)
    x0 = np.array([curve.alpha[j], k * curve.h])
    res = minimize(_sqdist, x0, args=(curve,), jac=_sqdist_grad, hess=_sqdist_hess,
                   method="trust-exact", options={"gtol": 1e-15})
    x = res.x if res.fun <= dist ** 2 else x0
    lo, hi = eps1, 1.0 / eps1
    if not lo <= x[1] <= hi:
        x = x0
    a1 = float(np.mod(x[0], TWO_PI))
    a2 = a1 + float(x[1])
    d = float(np.linalg.norm(curve.eval(a1) - curve.eval(a2)))
    return a1, a2, d


@dataclass(frozen=True)
class PairReport:
    orth1: float
    orth2: float
    tangent_dot: float
    segment_clear: bool
    tol: float = 1e-8

    @property
    def opposing(self) -> bool:
        return self.tangent_dot < 0

    @property
    def ok(self) -> bool:
        return self.orth1 < self.tol and self.orth2 < self.tol and self.opposing and self.segment_clear


def _segment_hits(p, q, poly):
    """Interior intersections of segment ``p q`` with polyline segments."""
    a, b = poly[:-1], poly[1:]
    r = q - p
    s = b - a
    denom = r[0] * s[:, 1] - r[1] * s[:, 0]
    ap = a - p
    with np.errstate(divide="ignore", invalid="ignore"):
        lam = (ap[:, 0] * s[:, 1] - ap[:, 1] * s[:, 0]) / denom
        mu = (ap[:, 0] * r[1] - ap[:, 1] * r[0]) / denom
    edge = 1e-9
    hit = (denom != 0) & (lam > edge) & (lam < 1 - edge) & (mu >= 0) & (mu <= 1)
    return np.flatnonzero(hit)


def verify_pair_conditions(curve: PeriodicCurve, alpha1, alpha2, *, oversample: int = 32,
                           tol: float = 1e-8) -> PairReport:
    z1, z2 = curve.eval(alpha1), curve.eval(alpha2)
    t1, t2 = curve.eval(alpha1, 1), curve.eval(alpha2, 1)
    dz = z1 - z2
    lo = min(alpha1, alpha2) - TWO_PI
    hi = max(alpha1, alpha2) + TWO_PI
    m = int(oversample * curve.n_samples * (hi - lo) / TWO_PI)
    poly = curve.eval(np.linspace(lo, hi, m + 1))
    clear = _segment_hits(z1, z2, poly).size == 0
    return PairReport(abs(float(dz @ t1)), abs(float(dz @ t2)), float(t1 @ t2), clear, tol)


# ---------------------------------------------------------------------------
# splash frame
# ---------------------------------------------------------------------------
def frame_rotation(e) -> np.ndarray:
    """Proper rotation with ``Q e_2 = e``."""
    e = np.asarray(e, dtype=float)
    return np.array([[e[1], e[0]], [-e[0], e[1]]])


def chebyshev_nodes(half_width: float, n_nodes: int) -> np.ndarray:
    if n_nodes % 2 == 0:
        n_nodes += 1
    k = np.arange(n_nodes)
    nodes = -half_width * np.cos(np.pi * k / (n_nodes - 1))
    nodes[n_nodes // 2] = 0.0
    return nodes


@dataclass
class SplashFrame:
    """Rigid frame ``R(y) = Q y + translation`` and local graphs of the two approach arcs.

    ``rho`` are Chebyshev nodes on ``I0 = [-half_width, half_width]``; ``f``,
    ``beta`` and their rho-derivatives are sampled there (row 0 is the lower arc).
    """

    alpha1: float
    alpha2: float
    d: float
    e: np.ndarray
    Q: np.ndarray
    translation: np.ndarray
    eps5: float
    half_width: float
    half_height: float
    rho: np.ndarray
    f: np.ndarray
    f_prime: np.ndarray
    beta: Optional[np.ndarray] = None
    beta_prime: Optional[np.ndarray] = None
    curve: Optional[PeriodicCurve] = field(default=None, repr=False)
    _interp: dict = field(default_factory=dict, repr=False)

    # graph access ------------------------------------------------------------
    def _fn(self, key, i):
        k = (key, i)
        if k not in self._interp:
            self._interp[k] = BarycentricInterpolator(self.rho, getattr(self, key)[i])
        return self._interp[k]

    def f1(self, rho):
        return self._fn("f", 0)(np.asarray(rho, dtype=float))

    def f2(self, rho):
        return self._fn("f", 1)(np.asarray(rho, dtype=float))

    def graph(self, i: int) -> Callable:
        return self.f1 if i == 1 else self.f2

    def beta_fn(self, i: int) -> Callable:
        if self.beta is None:
            raise ValueError("frame was built from graphs and carries no reparameterisation")
        return self._fn("beta", i - 1)

    # rigid map ---------------------------------------------------------------
    def R(self, y) -> np.ndarray:
        return np.asarray(y, dtype=float) @ self.Q.T + self.translation

    def R_inv(self, x) -> np.ndarray:
        return (np.asarray(x, dtype=float) - self.translation) @ self.Q

    @property
    def z1(self):
        return self.R(np.array([0.0, -self.d / 2]))

    @property
    def z2(self):
        return self.R(np.array([0.0, self.d / 2]))

    @classmethod
    def from_graphs(cls, d, f1, f2, half_width, *, half_height=None, Q=None, translation=(0.0, 0.0),
                    f1_prime=None, f2_prime=None, n_nodes: int = 65, eps5: float = DEFAULT_EPS["eps5"]):
        """Synthetic frame from closed-form graphs (no curve behind it)."""
        rho = chebyshev_nodes(half_width, n_nodes)
        Q = np.eye(2) if Q is None else np.asarray(Q, dtype=float)
        f = np.array([f1(rho), f2(rho)], dtype=float)
        if f1_prime is None or f2_prime is None:
            fp = np.array([BarycentricInterpolator(rho, fi).derivative(rho) for fi in f])
        else:
            fp = np.array([f1_prime(rho), f2_prime(rho)], dtype=float)
        return cls(0.0, 0.0, float(d), Q[:, 1].copy(), Q, np.asarray(translation, dtype=float), eps5,
                   float(half_width), float(half_height or max(eps5 ** 2, half_width)), rho, f, fp)

    def to_dict(self) -> dict:
        out = {"alpha1": self.alpha1, "alpha2": self.alpha2, "d": self.d,
               "Q": self.Q.tolist(), "translation": self.translation.tolist(),
               "eps5": self.eps5, "half_width": self.half_width, "half_height": self.half_height,
               "rho": self.rho.tolist(), "f1": self.f[0].tolist(), "f2": self.f[1].tolist()}
        if self.beta is not None:
            out["beta1"] = self.beta[0].tolist()
            out["beta2"] = self.beta[1].tolist()
        return out

    def write_json(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2))


def _extract_graph(curve, Q, b, alpha_i, rho_nodes):
    """Newton continuation of ``[Q^T (z(alpha_i + beta) - b)]_1 = rho`` from ``rho = 0``."""
    n = len(rho_nodes)
    beta = np.zeros(n)
    i0 = int(np.argmin(np.abs(rho_nodes)))
    if abs(rho_nodes[i0]) > 0:
        raise ValueError("rho nodes must include 0")
    slope0 = float((Q.T @ curve.eval(alpha_i, 1))[0])
    if abs(slope0) < 1e-10:
        raise GraphExtractionFailed("tangent is vertical in the frame at the approach point")
    sign = np.sign(slope0)

    def solve(target, guess):
        bt = guess
        for _ in range(60):
            loc = Q.T @ (curve.eval(alpha_i + bt) - b)
            slope = float((Q.T @ curve.eval(alpha_i + bt, 1))[0])
            if np.sign(slope) != sign or abs(slope) < 1e-10:
                raise GraphExtractionFailed(f"tangent turns vertical near rho={target:.3g}")
            step = (loc[0] - target) / slope
            bt -= step
            if abs(step) < NEWTON_TOL:
                return bt
        raise GraphExtractionFailed(f"Newton did not converge at rho={target:.3g}")

    for order in (range(i0 + 1, n), range(i0 - 1, -1, -1)):
        prev = i0
        for i in order:
            beta[i] = solve(rho_nodes[i], beta[prev])
            lo, hi = sorted((beta[prev], beta[i]))
            probe = Q.T @ curve.eval(alpha_i + np.linspace(lo, hi, 16), 1).T
            if np.any(np.sign(probe[0]) != sign):
                raise GraphExtractionFailed("frame abscissa is not monotone along the arc")
            prev = i
    pts = curve.eval(alpha_i + beta)
    zp = curve.eval(alpha_i + beta, 1)
    loc = (pts - b) @ Q
    dl = zp @ Q
    return loc[:, 1], dl[:, 1] / dl[:, 0], beta, 1.0 / dl[:, 0]


def build_splash_frame(curve: PeriodicCurve, alpha1, alpha2, eps5: float = DEFAULT_EPS["eps5"], *,
                       half_width: Optional[float] = None, n_nodes: int = 65) -> SplashFrame:
    z1, z2 = curve.eval(alpha1), curve.eval(alpha2)
    d = float(np.linalg.norm(z2 - z1))
    if d == 0:
        raise GraphExtractionFailed("approach points coincide")
    e = (z2 - z1) / d
    Q = frame_rotation(e)
    b = 0.5 * (z1 + z2)
    L = eps5 ** 4 if half_width is None else float(half_width)
    rho = chebyshev_nodes(L, n_nodes)
    rows = [_extract_graph(curve, Q, b, a, rho) for a in (alpha1, alpha2)]
    f = np.array([r[0] for r in rows])
    fp = np.array([r[1] for r in rows])
    beta = np.array([r[2] for r in rows])
    bp = np.array([r[3] for r in rows])
    return SplashFrame(float(alpha1), float(alpha2), d, e, Q, b, eps5, L,
                       max(eps5 ** 2, L), rho, f, fp, beta, bp, curve)


def frame_invariants(frame: SplashFrame, n_check: int = 257) -> dict:
    """Residuals of the frame conclusions; each entry should be ~0 (or True)."""
    d = frame.d
    out = {
        "R_lower": float(np.linalg.norm(frame.R([0.0, -d / 2]) - (frame.curve.eval(frame.alpha1)
                                                                   if frame.curve else frame.z1))),
        "f1_at_0": abs(float(frame.f1(0.0)) + d / 2),
        "f2_at_0": abs(float(frame.f2(0.0)) - d / 2),
        "f1_prime_at_0": abs(float(np.interp(0.0, frame.rho, frame.f_prime[0]))),
        "f2_prime_at_0": abs(float(np.interp(0.0, frame.rho, frame.f_prime[1]))),
    }
    rho = np.linspace(-frame.half_width, frame.half_width, n_check)
    out["gap_deficit"] = float(max(0.0, d - np.min(frame.f2(rho) - frame.f1(rho))))
    if frame.curve is not None and frame.beta is not None:
        out["R_upper"] = float(np.linalg.norm(frame.R([0.0, d / 2]) - frame.curve.eval(frame.alpha2)))
        out["R_mid"] = float(np.linalg.norm(frame.R([0.0, 0.0])
                                            - 0.5 * (frame.curve.eval(frame.alpha1) + frame.curve.eval(frame.alpha2))))
        out["beta1_at_0"] = abs(float(frame.beta_fn(1)(0.0)))
        out["beta2_at_0"] = abs(float(frame.beta_fn(2)(0.0)))
        out["beta_prime_product_max"] = float(np.max(frame.beta_prime[0] * frame.beta_prime[1]))
        err = 0.0
        for i, a in ((1, frame.alpha1), (2, frame.alpha2)):
            lhs = frame.R(np.column_stack([rho, frame.graph(i)(rho)]))
            rhs = frame.curve.eval(a + frame.beta_fn(i)(rho))
            err = max(err, float(np.abs(lhs - rhs).max()))
        out["intertwining"] = err
    return out


REGIONS = ("A1", "A2", "A3")


def classify_regions(frame: SplashFrame, probe, tie_tol: float = 1e-12) -> str:
    """Region tag of a world point: ``A1`` (y <= f1), ``A2`` (f1 < y < f2) or ``A3`` (y >= f2).

    Points within ``tie_tol`` of a graph count as on it, so round-off in the
    rigid map cannot move a boundary probe off its closed side.
    """
    rho, y = frame.R_inv(np.asarray(probe, dtype=float))
    if abs(rho) > frame.half_width or abs(y) > frame.half_height:
        raise OutsideWindow(f"probe at frame coordinates ({rho:.3g}, {y:.3g}) is outside the window")
    f1, f2 = float(frame.f1(rho)), float(frame.f2(rho))
    if y <= f1 + tie_tol:
        return "A1"
    if y >= f2 - tie_tol:
        return "A3"
    return "A2"


def invariants_ok(inv: dict, tol: float = 1e-6) -> bool:
    """All residual entries below ``tol`` and the reparameterisations orientation-reversing."""
    for key, val in inv.items():
        if key == "beta_prime_product_max":
            if not val < 0:
                return False
        elif not val < tol:
            return False
    return True


def separation_stability(times, zeta, A: float, rtol: float = 1e-9) -> list:
    """Pairs ``(s, t)`` of sample indices violating ``zeta_s <= zeta_t + A int_s^t zeta``.

    The integral is the trapezoid rule on the recorded samples; an empty list
    means the backward Gronwall bound holds on the whole trajectory.
    """
    t = np.asarray(times, dtype=float)
    z = np.asarray(zeta, dtype=float)
    if t.shape != z.shape or np.any(np.diff(t) <= 0):
        raise ValueError("need matching samples on a strictly increasing time grid")
    cum = np.concatenate([[0.0], np.cumsum(0.5 * np.diff(t) * (z[1:] + z[:-1]))])
    slack = z[None, :] + A * (cum[None, :] - cum[:, None]) - z[:, None]
    later = np.triu(np.ones_like(slack, dtype=bool), k=1)
    bad = later & (slack < -rtol * max(1.0, float(np.abs(z).max())))
    return [(int(s), int(u)) for s, u in zip(*np.nonzero(bad))]
