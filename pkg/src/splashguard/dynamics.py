"""Sheet state, interface vorticity evolution law and the tangential momentum identities."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

import numpy as np

from .errors import NonIntegerPowerOfSigned
from .geometry import PeriodicCurve, spectral_derivative


@dataclass(frozen=True)
class FluidParams:
    rho_e: float = 1.0
    rho_ns: float = 1.0
    nu_ns: float = 0.1
    g: float = 1.0
    sigma: float = 0.0
    A: float = 10.0
    T: float = 1.0

    def __post_init__(self):
        for name in ("rho_e", "rho_ns", "nu_ns", "g", "A", "T"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if self.sigma < 0:
            raise ValueError(f"sigma must be nonnegative, got {self.sigma}")


@dataclass(frozen=True)
class SheetState:
    """Interface curve, interface vorticity samples and time."""

    curve: PeriodicCurve
    omega: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        om = np.array(self.omega, dtype=float).reshape(-1)
        if om.shape != (self.curve.n_samples,):
            raise ValueError(f"omega has {om.size} samples, curve has {self.curve.n_samples}")
        if not np.isfinite(om).all():
            raise ValueError("omega must be finite")
        om.setflags(write=False)
        object.__setattr__(self, "omega", om)

    @property
    def sup_omega(self) -> float:
        return float(np.abs(self.omega).max())

    def replace(self, **kw) -> "SheetState":
        data = {"curve": self.curve, "omega": self.omega, "t": self.t}
        data.update(kw)
        return SheetState(**data)


@dataclass(frozen=True)
class TimeDerivative:
    """Time-derivative samples tagged with how they were obtained."""

    values: np.ndarray
    source: str = "analytic"


TimeInput = Union[np.ndarray, TimeDerivative]


def _values(dt_term: TimeInput) -> np.ndarray:
    return np.asarray(dt_term.values if isinstance(dt_term, TimeDerivative) else dt_term, dtype=float)


def fd4_time_derivative(samples, dt: float) -> TimeDerivative:
    """Fourth-order centred difference from samples at ``t-2dt, t-dt, t+dt, t+2dt``.

    ``samples`` may hold 4 entries (the centre omitted) or 5 (centre ignored).
    """
    s = [np.asarray(x, dtype=float) for x in samples]
    if len(s) == 5:
        s = [s[0], s[1], s[3], s[4]]
    if len(s) != 4:
        raise ValueError("need 4 or 5 samples")
    m2, m1, p1, p2 = s
    return TimeDerivative((m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * dt), "fd4")


def _dot(a, b):
    return np.einsum("ij,ij->i", np.asarray(a, dtype=float), np.asarray(b, dtype=float))


def _d(x):
    return spectral_derivative(np.asarray(x, dtype=float), 1)


def sheet_vorticity(u, v, curve: PeriodicCurve) -> np.ndarray:
    """``omega_Gamma = (u - v) . z_alpha`` pointwise."""
    u, v = np.asarray(u, dtype=float), np.asarray(v, dtype=float)
    if u.shape != curve.z_alpha.shape or v.shape != curve.z_alpha.shape:
        raise ValueError("velocity samples must match the curve grid")
    return _dot(u - v, curve.z_alpha)


def euler_tangential_residual(state: SheetState, u, z_t, p, params: FluidParams,
                              dt_u_dot_zalpha: TimeInput) -> np.ndarray:
    """``d_t(u.z_a) - d_a(u.z_t) + d_a|u|^2/2 + d_a p / rho_E + g d_a z_2`` on the grid."""
    za = state.curve.z_alpha
    return (_values(dt_u_dot_zalpha) - _d(_dot(u, z_t)) + 0.5 * _d(_dot(u, u))
            + _d(p) / params.rho_e + params.g * za[:, 1])


def ns_tangential_residual(state: SheetState, v, z_t, q, lap_v, params: FluidParams,
                           dt_v_dot_zalpha: TimeInput) -> np.ndarray:
    """Viscous analogue: adds ``-(nu/rho_NS) (lap v) . z_a`` and uses ``rho_NS``."""
    za = state.curve.z_alpha
    return (_values(dt_v_dot_zalpha) - _d(_dot(v, z_t)) + 0.5 * _d(_dot(v, v))
            + _d(q) / params.rho_ns + params.g * za[:, 1]
            - params.nu_ns / params.rho_ns * _dot(lap_v, za))


def flux_F(state: SheetState, v, z_t) -> np.ndarray:
    za = state.curve.z_alpha
    speed2 = _dot(za, za)
    return (_dot(za, z_t) - _dot(v, za)) / speed2 * state.omega


def omega_gamma_rhs(state: SheetState, v, z_t, G, lap_v, params: FluidParams) -> np.ndarray:
    """``-d_a[omega^2/|z_a|^2]/2 + d_a F + G - (nu/rho_E)(lap v).z_a``."""
    za = state.curve.z_alpha
    speed2 = _dot(za, za)
    burgers = -0.5 * _d(state.omega ** 2 / speed2)
    n = state.curve.n_samples
    G = np.zeros(n) if G is None else np.broadcast_to(np.asarray(G, dtype=float), (n,))
    lap = np.zeros((n, 2)) if lap_v is None else np.asarray(lap_v, dtype=float)
    return burgers + _d(flux_F(state, v, z_t)) + G - params.nu_ns / params.rho_e * _dot(lap, za)


def flux_terms(state: SheetState, v, z_t) -> np.ndarray:
    """The exact-derivative part of the evolution law; integrates to zero over a period."""
    za = state.curve.z_alpha
    return -0.5 * _d(state.omega ** 2 / _dot(za, za)) + _d(flux_F(state, v, z_t))


def assemble_G(curve: PeriodicCurve, v, z_t, p, q, params: FluidParams,
               dt_v_dot_zalpha: TimeInput) -> np.ndarray:
    """Forcing ``G`` from analytic interface data of both fluids."""
    r = params.rho_ns / params.rho_e
    za = curve.z_alpha
    return ((1.0 - r) * _d(_dot(v, z_t))
            + 0.5 * (r - 1.0) * _d(_dot(v, v))
            - _d(np.asarray(q, dtype=float) - np.asarray(p, dtype=float)) / params.rho_e
            - (1.0 - r) * (_values(dt_v_dot_zalpha) + params.g * za[:, 1]))


def lp_monitor(state: SheetState, p: float) -> float:
    """``I = int omega^p / |z_a|^(p-1) da`` (trapezoid); sign kept as written."""
    if not p > 1:
        raise ValueError("p must exceed 1")
    om = state.omega
    even = float(p).is_integer() and int(p) % 2 == 0
    if (om < 0).any() and not even:
        raise NonIntegerPowerOfSigned(f"omega changes sign and p={p} is not an even integer")
    speed = state.curve.speed()
    return float(state.curve.h * np.sum(om ** p / speed ** (p - 1)))


@dataclass(frozen=True)
class EnvelopeReport:
    passed: np.ndarray
    envelope: float
    max_ratio: float
    first_violation: int

    @property
    def ok(self) -> bool:
        return bool(self.passed.all())


def gronwall_bound_check(times, I_series, p: float, C: float, T: float) -> EnvelopeReport:
    """Compare ``I(t)`` against ``I(0) exp(C p (T + 1))``."""
    times = np.asarray(times, dtype=float)
    I_series = np.asarray(I_series, dtype=float)
    if np.any(np.diff(times) <= 0):
        raise ValueError("time grid must be strictly increasing")
    env = I_series[0] * np.exp(C * p * (T + 1.0))
    passed = I_series <= env
    ratio = I_series / env if env > 0 else np.where(I_series > 0, np.inf, 0.0)
    bad = np.flatnonzero(~passed)
    return EnvelopeReport(passed, float(env), float(np.max(ratio)), int(bad[0]) if bad.size else -1)


MONITOR_HEADER = ("t", "I_p", "CA", "sup_omega")


@dataclass
class MonitorSeries:
    rows: list = field(default_factory=list)

    def append(self, t, I_p, ca, sup_omega):
        if self.rows and t <= self.rows[-1][0]:
            raise ValueError("monitor times must increase")
        self.rows.append((float(t), float(I_p), float(ca), float(sup_omega)))

    def to_csv(self, path) -> None:
        with Path(path).open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(MONITOR_HEADER)
            for row in self.rows:
                w.writerow([repr(x) for x in row])
