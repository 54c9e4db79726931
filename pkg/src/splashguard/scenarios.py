"""Scenario library, manufactured solutions, kinematic stepping and run traces."""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from . import families
from .bounds import GronwallTrace
from .dynamics import FluidParams, SheetState, lp_monitor
from .errors import NoSplashCandidate, StepRejected
from .geometry import PeriodicCurve, c_norm, chord_arc_min
from .kernels import BulkVorticity, interface_velocity
from .recovery import AdmissibilityReport, AdmissibilitySnapshot, check_weak_admissibility
from .splash import DEFAULT_EPS, find_closest_pair

CA_FLOOR = 1e-6
TRACE_HEADER = ("t", "CA", "D", "Dtilde", "sup_omega", "I_p")


# ---------------------------------------------------------------------------
# manufactured exact solutions
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class ManufacturedInterface:
    """Interface samples of an exact two-dimensional flow at one instant."""

    state: SheetState
    velocity: np.ndarray
    z_t: np.ndarray
    pressure: np.ndarray
    dt_velocity_dot_zalpha: np.ndarray
    lap_velocity: Optional[np.ndarray] = None


def taylor_green_interface(n: int, t: float, params: FluidParams) -> ManufacturedInterface:
    """Decaying Taylor-Green flow with the material line that starts on ``y = 0``.

    ``v = E (sin x cos y, -cos x sin y)``, ``E = exp(-2 k t)``, ``k = nu/rho``;
    the line stays on ``y = 0`` and moves by ``tan(X/2) = e^s tan(alpha/2)``.
    """
    k = params.nu_ns / params.rho_ns
    E = np.exp(-2 * k * t)
    s = (1 - E) / (2 * k)
    alpha = 2 * np.pi * np.arange(n) / n
    X = 2 * np.arctan2(np.exp(s) * np.sin(alpha / 2), np.cos(alpha / 2))
    X = alpha + np.angle(np.exp(1j * (X - alpha)))  # continuous branch
    X_a = np.exp(s) / (np.cos(alpha / 2) ** 2 + np.exp(2 * s) * np.sin(alpha / 2) ** 2)
    curve = PeriodicCurve(np.column_stack([X - alpha, np.zeros(n)]))
    v = np.column_stack([E * np.sin(X), np.zeros(n)])
    q = params.rho_ns * (np.cos(2 * X) + 1.0) / 4 * E ** 2
    dt_term = 2 * np.sin(X) * np.cos(X) * X_a * E ** 2 - 2 * k * np.sin(X) * X_a * E
    state = SheetState(curve, np.zeros(n), t)
    return ManufacturedInterface(state, v, v.copy(), q, dt_term, -2.0 * v)


def euler_wave_interface(n: int, t: float, params: FluidParams, amplitude: float = 0.1) -> ManufacturedInterface:
    """Potential flow ``phi = e^y cos(x - t)`` on the graph ``y = a sin(alpha + t)``.

    Pressure from Bernoulli; the tangential identity holds for any ``z_t``.
    """
    alpha = 2 * np.pi * np.arange(n) / n
    Y = amplitude * np.sin(alpha + t)
    Ya = amplitude * np.cos(alpha + t)
    eY = np.exp(Y)
    curve = PeriodicCurve(np.column_stack([np.zeros(n), Y]))
    u = np.column_stack([-eY * np.sin(alpha - t), eY * np.cos(alpha - t)])
    z_t = np.column_stack([np.zeros(n), Ya])
    p = -params.rho_e * (eY * np.sin(alpha - t) + 0.5 * eY ** 2 + params.g * Y)
    # d/dt of u . z_alpha = e^Y [-sin(alpha - t) + cos(alpha - t) Y_a] with Y_t = Y_a
    dt_term = eY * ((Ya ** 2 + 1.0 - Y) * np.cos(alpha - t))
    return ManufacturedInterface(SheetState(curve, np.zeros(n), t), u, z_t, p, dt_term)


# ---------------------------------------------------------------------------
# admissibility
# ---------------------------------------------------------------------------
def admissibility_snapshot(state: SheetState, omega_v: Optional[BulkVorticity], *,
                           v0_c3: float = 0.0, vtilde_c3: Optional[float] = None) -> AdmissibilitySnapshot:
    """Spatial norms of the current snapshot (the time parts of the C^4 norm are not seen here)."""
    u = interface_velocity(state, omega_v).value
    return AdmissibilitySnapshot(
        ca0=chord_arc_min(state.curve).ca_value,
        u_sup0=float(np.abs(u).max()),
        v0_c3=float(v0_c3),
        z_c4=c_norm(state.curve, 4),
        min_speed=state.curve.min_speed(),
        vtilde_c3=vtilde_c3,
    )


def check_admissible(state: SheetState, omega_v: Optional[BulkVorticity], params: FluidParams, *,
                     bulk_c2: float = 0.0, v0_c3: float = 0.0,
                     snapshot: Optional[AdmissibilitySnapshot] = None) -> AdmissibilityReport:
    """Clauses of full admissibility: the weak clauses plus the bulk C^2 bound."""
    snap = snapshot or admissibility_snapshot(state, omega_v, v0_c3=v0_c3)
    clauses = dict(check_weak_admissibility(snap, params.A).clauses)
    clauses["bulk_c2"] = bool(bulk_c2 <= params.A)
    return AdmissibilityReport(clauses)


# ---------------------------------------------------------------------------
# kinematic stepping
# ---------------------------------------------------------------------------
def _velocity(state: SheetState, omega_v, refined: bool) -> np.ndarray:
    return interface_velocity(state, omega_v, refined=refined).value


def _stage(state: SheetState, w, omega, t, A):
    curve = state.curve.with_offsets(w)
    if A is not None and curve.min_speed() < 1.0 / A:
        raise StepRejected(f"|z_alpha| fell below 1/A={1.0 / A:g}", t)
    return SheetState(curve, omega, t)


def step_kinematic(state: SheetState, omega_v: Optional[BulkVorticity], dt: float, *,
                   omega_rate: Optional[Callable] = None, ca_floor: float = CA_FLOOR,
                   A: Optional[float] = None, refined: bool = False) -> SheetState:
    """One RK4 step of ``z_t = u~`` (full-velocity transport).

    ``omega_rate(state) -> d omega/dt`` advances the interface vorticity; without
    it the vorticity samples are frozen.
    """
    curve = state.curve
    Qt = curve.Q.T  # world velocity -> offset velocity
    w0 = np.array(curve.offsets)
    om0 = np.array(state.omega)
    t0 = state.t

    def rates(st):
        wdot = _velocity(st, omega_v, refined) @ Qt.T
        odot = np.zeros_like(om0) if omega_rate is None else np.asarray(omega_rate(st), dtype=float)
        return wdot, odot

    k1 = rates(state)
    s2 = _stage(state, w0 + 0.5 * dt * k1[0], om0 + 0.5 * dt * k1[1], t0 + 0.5 * dt, A)
    k2 = rates(s2)
    s3 = _stage(state, w0 + 0.5 * dt * k2[0], om0 + 0.5 * dt * k2[1], t0 + 0.5 * dt, A)
    k3 = rates(s3)
    s4 = _stage(state, w0 + dt * k3[0], om0 + dt * k3[1], t0 + dt, A)
    k4 = rates(s4)
    w = w0 + dt / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
    om = om0 + dt / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
    out = _stage(state, w, om, t0 + dt, A)
    ca = chord_arc_min(out.curve).ca_value
    if ca < ca_floor:
        raise StepRejected(f"chord-arc {ca:.3g} below floor {ca_floor:g}", t0 + dt)
    return out


# ---------------------------------------------------------------------------
# scenarios and runs
# ---------------------------------------------------------------------------
@dataclass
class Scenario:
    """A runnable configuration.

    ``mode="kinematic"`` steps ``z_t = u~``; ``mode="prescribed"`` samples the
    analytic ``curve_at(t)`` family (and ``omega_at(t, curve)`` if given).
    """

    name: str
    make_state: Callable[[], SheetState]
    omega_v: Optional[BulkVorticity] = None
    params: FluidParams = field(default_factory=FluidParams)
    dt: float = 1e-2
    steps: int = 10
    mode: str = "kinematic"
    curve_at: Optional[Callable] = None
    omega_at: Optional[Callable] = None
    omega_rate: Optional[Callable] = None
    eps: dict = field(default_factory=lambda: dict(DEFAULT_EPS))
    ca_floor: float = CA_FLOOR
    p: float = 2.0
    bulk_c2: float = 0.0
    v0_c3: float = 0.0
    admissibility: str = "full"
    refined: bool = False

    def __post_init__(self):
        if self.mode not in ("kinematic", "prescribed"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode == "prescribed" and self.curve_at is None:
            raise ValueError("prescribed mode needs curve_at")
        if not self.dt > 0 or self.steps < 0:
            raise ValueError("need dt > 0 and steps >= 0")


@dataclass(frozen=True)
class TraceRow:
    t: float
    state: SheetState
    ca: float
    D: float
    Dtilde: float
    sup_omega: float
    I_p: float


@dataclass
class RunTrace:
    scenario: str
    rows: list = field(default_factory=list)
    pair: Optional[tuple] = None
    aborted: Optional[str] = None

    def append(self, row: TraceRow) -> None:
        if self.rows and row.t <= self.rows[-1].t:
            raise ValueError("trace times must increase")
        if not row.ca > 0:
            raise StepRejected("chord-arc reached zero", row.t)
        self.rows.append(row)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows], dtype=float)

    @property
    def times(self) -> np.ndarray:
        return self.column("t")

    def gronwall_trace(self, C: Optional[float] = None, eps1: float = DEFAULT_EPS["eps1"]) -> GronwallTrace:
        D = self.column("D")
        Dt = self.column("Dtilde")
        Dt = np.where(np.isnan(Dt), D, Dt)
        return GronwallTrace(self.times, D, Dt, C, eps1)

    def to_csv(self, path) -> None:
        with Path(path).open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(TRACE_HEADER)
            for r in self.rows:
                w.writerow([repr(float(x)) for x in (r.t, r.ca, r.D, r.Dtilde, r.sup_omega, r.I_p)])

    def summary(self) -> dict:
        ca = self.column("ca")
        return {"scenario": self.scenario, "steps": len(self.rows), "aborted": self.aborted,
                "pair": None if self.pair is None else list(self.pair),
                "t_final": float(self.rows[-1].t) if self.rows else None,
                "min_CA": float(ca.min()) if len(ca) else None}

    def write_json(self, path) -> None:
        Path(path).write_text(json.dumps(self.summary(), indent=2))


def _closest_distance(curve: PeriodicCurve, eps1: float) -> float:
    _, _, d = find_closest_pair(curve, eps1, np.inf, check_ca=False)
    return d


def _record(scn: Scenario, trace: RunTrace, state: SheetState) -> None:
    eps1, eps2 = scn.eps["eps1"], scn.eps["eps2"]
    curve = state.curve
    ca = chord_arc_min(curve).ca_value
    if trace.pair is None and ca < eps2:
        try:
            a1, a2, _ = find_closest_pair(curve, eps1, eps2)
            trace.pair = (a1, a2)
        except NoSplashCandidate:
            pass
    d = _closest_distance(curve, eps1)
    D = 1.0 / d ** 2
    if trace.pair is not None:
        dz = curve.eval(trace.pair[0]) - curve.eval(trace.pair[1])
        # the tracked pair stays inside the search window, so D~ <= D up to the minimiser tolerance
        Dtilde = min(1.0 / float(dz @ dz), D)
    else:
        Dtilde = np.nan
    I_p = lp_monitor(state, scn.p) if scn.p > 1 else np.nan
    trace.append(TraceRow(state.t, state, ca, D, Dtilde, state.sup_omega, I_p))


def run(scn: Scenario) -> RunTrace:
    """Step the scenario, recording monitors after every step; aborts cleanly on rejection."""
    trace = RunTrace(scn.name)
    state = scn.make_state()
    try:
        _record(scn, trace, state)
        for k in range(1, scn.steps + 1):
            t = state.t + scn.dt if scn.mode == "kinematic" else scn.dt * k
            if scn.mode == "kinematic":
                state = step_kinematic(state, scn.omega_v, scn.dt, omega_rate=scn.omega_rate,
                                       ca_floor=scn.ca_floor, A=scn.params.A, refined=scn.refined)
            else:
                curve = scn.curve_at(t)
                om = state.omega if scn.omega_at is None else scn.omega_at(t, curve)
                state = SheetState(curve, om, t)
                if chord_arc_min(curve).ca_value < scn.ca_floor:
                    raise StepRejected("prescribed curve fell below the chord-arc floor", t)
            _record(scn, trace, state)
    except StepRejected as exc:
        trace.aborted = f"t={exc.t}: {exc}"
    return trace


# ---------------------------------------------------------------------------
# library
# ---------------------------------------------------------------------------
def rest(n: int = 64, steps: int = 100, dt: float = 1e-2, **kw) -> Scenario:
    return Scenario("rest", lambda: SheetState(families.flat(n), np.zeros(n)), steps=steps, dt=dt, **kw)


def uniform_sheet(n: int = 64, strength: float = 1.0, steps: int = 10, dt: float = 1e-2, **kw) -> Scenario:
    return Scenario("uniform_sheet", lambda: SheetState(families.flat(n), np.full(n, strength)),
                    steps=steps, dt=dt, **kw)


def wavy_sheet(n: int = 64, amplitude: float = 0.1, mode: int = 1, strength: float = 0.5,
               steps: int = 20, dt: float = 1e-2, **kw) -> Scenario:
    def make():
        c = families.sinusoid(n, amplitude, mode)
        return SheetState(c, strength * (1.0 + 0.5 * np.cos(c.alpha)))
    return Scenario("wavy_sheet", make, steps=steps, dt=dt, **kw)


def keyhole_approach(n: int = 256, d0: float = 1e-2, rate: float = 1.0, steps: int = 20,
                     dt: float = 5e-2, **kw) -> Scenario:
    """Prescribed symmetric approach with neck width ``d(t) = d0 exp(-rate t)``."""
    def curve_at(t):
        return families.keyhole(n, d0 * np.exp(-rate * t))

    def make():
        c = curve_at(0.0)
        return SheetState(c, 1.0 + 0.5 * np.sin(c.alpha))
    kw.setdefault("params", FluidParams(A=1e3))
    return Scenario("keyhole_approach", make, mode="prescribed", curve_at=curve_at,
                    steps=steps, dt=dt, **kw)


def vortex_patch(n: int = 64, radius: float = 0.2, depth: float = 0.6, strength: float = 1.0,
                 h: float = 0.02, steps: int = 10, dt: float = 1e-2, **kw) -> Scenario:
    """Flat sheet above a uniform disc of bulk vorticity in the lower fluid."""
    class _Disc:
        def contains(self, pts):
            p = np.atleast_2d(pts)
            return np.hypot(p[:, 0] - np.pi, p[:, 1] + depth) < radius
    omega_v = BulkVorticity.analytic(
        "disc", lambda p: np.full(len(p), strength), region=_Disc(), h=h,
        bounds=(np.pi - radius, np.pi + radius, -depth - radius, -depth + radius),
        radius=radius, depth=depth)
    return Scenario("vortex_patch", lambda: SheetState(families.flat(n), np.zeros(n)),
                    omega_v=omega_v, steps=steps, dt=dt, **kw)


SCENARIOS = {
    "rest": rest,
    "uniform_sheet": uniform_sheet,
    "wavy_sheet": wavy_sheet,
    "keyhole_approach": keyhole_approach,
    "vortex_patch": vortex_patch,
}
