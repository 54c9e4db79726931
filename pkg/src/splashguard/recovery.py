"""Recovery of the viscous velocity gradient and tangential second derivatives on the interface.

Conventions: ``J[i, k] = d_k v_i`` so the chain rule reads ``d_a v~ = J z_a``.
The stress balance is ``2 nu (J + J^T) n = s n + tau t`` with
``s = p~ + q~ + sigma K``, unit tangent ``t`` and ``n = -z_a^perp``.  ``tau``
is an optional tangential traction datum; zero recovers the pure normal balance.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import IllConditioned
from .geometry import PeriodicCurve, perp, spectral_derivative

COND_LIMIT = 1e8
RECOVERY_HEADER = ("alpha", "g11", "g12", "g21", "g22", "residual", "ctt1", "ctt2", "ctn1", "ctn2")
SIGN_CONVENTION = "2 nu (grad v + grad v^T) n = (p + q + sigma K) n + tau t, n = -z_alpha^perp"


@dataclass(frozen=True)
class InterfaceData:
    """Per-sample interface data for the recovery systems."""

    alpha: np.ndarray
    v: np.ndarray
    v_a: np.ndarray
    v_aa: np.ndarray
    z_a: np.ndarray
    z_aa: np.ndarray
    s: np.ndarray
    s_a: np.ndarray
    nu: float
    tau: Optional[np.ndarray] = None
    tau_a: Optional[np.ndarray] = None

    def __post_init__(self):
        n = len(self.alpha)
        for name in ("v", "v_a", "v_aa", "z_a", "z_aa"):
            if np.shape(getattr(self, name)) != (n, 2):
                raise ValueError(f"{name} must have shape ({n}, 2)")
        for name in ("s", "s_a"):
            if np.shape(getattr(self, name)) != (n,):
                raise ValueError(f"{name} must have shape ({n},)")
        if not self.nu > 0:
            raise ValueError("nu must be positive")
        if self.tau is None:
            object.__setattr__(self, "tau", np.zeros(n))
        if self.tau_a is None:
            object.__setattr__(self, "tau_a", np.zeros(n))

    @classmethod
    def from_periodic_samples(cls, curve: PeriodicCurve, v, s, nu, tau=None):
        """Data whose alpha-derivatives come from spectral differentiation of periodic samples."""
        v = np.asarray(v, dtype=float)
        s = np.asarray(s, dtype=float)
        tau = None if tau is None else np.asarray(tau, dtype=float)
        return cls(curve.alpha, v, spectral_derivative(v, 1), spectral_derivative(v, 2),
                   np.array(curve.z_alpha), np.array(curve.z_alphaalpha), s, spectral_derivative(s, 1),
                   float(nu), tau, None if tau is None else spectral_derivative(tau, 1))

    def min_speed(self) -> float:
        return float(np.hypot(self.z_a[:, 0], self.z_a[:, 1]).min())

    def index(self, alpha) -> int:
        k = int(np.argmin(np.abs(np.angle(np.exp(1j * (self.alpha - alpha))))))
        if abs(np.angle(np.exp(1j * (self.alpha[k] - alpha)))) > 1e-9:
            raise ValueError(f"alpha={alpha} is not a sample of the interface data")
        return k


def _frame(za, zaa):
    speed = np.hypot(*za)
    t = za / speed
    n = -perp(za)
    n_a = -perp(zaa)
    t_a = zaa / speed - za * np.dot(za, zaa) / speed ** 3
    return speed, t, n, n_a, t_a


def gradient_system(data: InterfaceData, k: int):
    """5x4 system for ``(J11, J12, J21, J22)`` at sample ``k``."""
    za, zaa = data.z_a[k], data.z_aa[k]
    speed, t, n, _, _ = _frame(za, zaa)
    nu = data.nu
    M = np.zeros((5, 4))
    rhs = np.zeros(5)
    # chain rule: J z_a = d_a v
    M[0, 0:2] = za
    M[1, 2:4] = za
    rhs[0:2] = data.v_a[k]
    # divergence
    M[2, 0] = M[2, 3] = 1.0
    # stress rows: 2 nu (J + J^T) n
    for col in range(4):
        E = np.zeros(4)
        E[col] = 1.0
        Jm = E.reshape(2, 2)
        M[3:5, col] = 2.0 * nu * (Jm + Jm.T) @ n
    rhs[3:5] = data.s[k] * n + data.tau[k] * t
    return M, rhs


def _solve(M, rhs, what):
    cond = np.linalg.cond(M)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise IllConditioned(f"{what} system condition number {cond:.3g} exceeds {COND_LIMIT:g}")
    x, *_ = np.linalg.lstsq(M, rhs, rcond=None)
    return x, float(np.linalg.norm(M @ x - rhs)), cond


def recover_gradient(data: InterfaceData, alpha):
    """Least-squares ``J`` (2x2) and the system residual at a sample ``alpha``."""
    k = data.index(alpha)
    M, rhs = gradient_system(data, k)
    x, res, _ = _solve(M, rhs, "gradient")
    return x.reshape(2, 2), res


def second_tangential_system(data: InterfaceData, k: int, J: np.ndarray):
    """5x4 system for the Hessian contractions ``(A1, A2, B1, B2)``.

    With ``H_j z_a = |z_a| (A_j t + B_j t^perp)`` each ``H_j`` enters only through
    its action on ``z_a``; the normal-normal part is not identifiable.
    """
    za, zaa = data.z_a[k], data.z_aa[k]
    speed, t, n, n_a, t_a = _frame(za, zaa)
    m = perp(t)
    nu = data.nu
    D = J + J.T

    def rows(x):
        A1, A2, B1, B2 = x
        Hz = speed * np.array([A1 * t + B1 * m, A2 * t + B2 * m])  # row i = H_i z_a
        dJ = Hz  # d_a J[i, k] = (H_i z_a)_k
        dD = dJ + dJ.T
        tang = speed ** 2 * np.array([A1, A2])
        div = np.trace(dJ)
        stress = 2.0 * nu * (dD @ n)
        return np.concatenate([tang, [div], stress])

    base = rows(np.zeros(4))
    M = np.column_stack([rows(np.eye(4)[c]) - base for c in range(4)])
    rhs = np.concatenate([
        data.v_aa[k] - J @ zaa,
        [0.0],
        data.s_a[k] * n + data.s[k] * n_a + data.tau_a[k] * t + data.tau[k] * t_a - 2.0 * nu * D @ n_a,
    ])
    return M, rhs


def recover_second_tangential(data: InterfaceData, alpha, J: Optional[np.ndarray] = None):
    """``(c_tt1, c_tt2, c_tn1, c_tn2)`` with ``c_tt(j) = <D^2 v_j z_a, z_a>``, ``c_tn(j) = <D^2 v_j z_a, z_a^perp>``."""
    k = data.index(alpha)
    if J is None:
        J, _ = recover_gradient(data, alpha)
    M, rhs = second_tangential_system(data, k, J)
    x, _, _ = _solve(M, rhs, "second-derivative")
    speed2 = float(np.dot(data.z_a[k], data.z_a[k]))
    A1, A2, B1, B2 = x
    return speed2 * A1, speed2 * A2, speed2 * B1, speed2 * B2


@dataclass(frozen=True)
class RecoveredGradient:
    alpha: np.ndarray
    G: np.ndarray
    residual: np.ndarray
    ctt: np.ndarray
    ctn: np.ndarray

    @property
    def trace(self) -> np.ndarray:
        return self.G[:, 0, 0] + self.G[:, 1, 1]

    def to_csv(self, path) -> None:
        with Path(path).open("w", newline="") as fh:
            fh.write(f"# {SIGN_CONVENTION}\n")
            w = csv.writer(fh)
            w.writerow(RECOVERY_HEADER)
            for i, a in enumerate(self.alpha):
                g = self.G[i]
                row = [a, g[0, 0], g[0, 1], g[1, 0], g[1, 1], self.residual[i],
                       self.ctt[i, 0], self.ctt[i, 1], self.ctn[i, 0], self.ctn[i, 1]]
                w.writerow([repr(float(x)) for x in row])


def recover_all(data: InterfaceData) -> RecoveredGradient:
    n = len(data.alpha)
    G = np.zeros((n, 2, 2))
    res = np.zeros(n)
    ctt = np.zeros((n, 2))
    ctn = np.zeros((n, 2))
    for k, a in enumerate(data.alpha):
        G[k], res[k] = recover_gradient(data, a)
        c = recover_second_tangential(data, a, G[k])
        ctt[k], ctn[k] = c[:2], c[2:]
    return RecoveredGradient(np.asarray(data.alpha), G, res, ctt, ctn)


def stress_data(J, z_a, nu):
    """``(s, tau)`` making a gradient field consistent with the stress balance."""
    J = np.asarray(J, dtype=float)
    z_a = np.asarray(z_a, dtype=float)
    speed = np.hypot(z_a[:, 0], z_a[:, 1])
    t = z_a / speed[:, None]
    n = -perp(z_a)
    traction = 2.0 * nu * np.einsum("kij,kj->ki", J + np.swapaxes(J, 1, 2), n)
    s = np.einsum("ki,ki->k", traction, n) / speed ** 2
    tau = np.einsum("ki,ki->k", traction, t)
    return s, tau


def vorticity_max_principle(boundary_sup: float, initial_sup: float, interior_sup: float) -> bool:
    """Monitor: interior ``|omega_v|`` never exceeds the boundary/initial maximum."""
    return interior_sup <= max(boundary_sup, initial_sup)


# ---------------------------------------------------------------------------
# weak admissibility
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class AdmissibilitySnapshot:
    """Scalars entering the admissibility clauses at the initial time."""

    ca0: float
    u_sup0: float
    v0_c3: float
    z_c4: float
    min_speed: float
    vtilde_c3: Optional[float] = None
    v_c2: Optional[float] = None


@dataclass(frozen=True)
class AdmissibilityReport:
    clauses: dict

    @property
    def ok(self) -> bool:
        return all(self.clauses.values())

    def failed(self):
        return [k for k, v in self.clauses.items() if not v]


def check_weak_admissibility(snap: AdmissibilitySnapshot, A: float) -> AdmissibilityReport:
    """Clause-by-clause check; every threshold is closed (equality passes)."""
    clauses = {
        "chord_arc": snap.ca0 >= 1.0 / A,
        "u_sup": snap.u_sup0 <= A,
        "v0_c3": snap.v0_c3 <= A,
        "interface_c4": snap.z_c4 <= A,
        "min_speed": snap.min_speed >= 1.0 / A,
    }
    if snap.vtilde_c3 is not None:
        clauses["vtilde_c3"] = snap.vtilde_c3 <= A
    return AdmissibilityReport(clauses)


# ---------------------------------------------------------------------------
# divergence-free polynomial test fields
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class PolynomialField:
    """``v(x) = b + L x + (quadratic part)`` with constant Hessians ``Hq[i]`` (symmetric 2x2).

    The trace of ``L`` and of each contraction ``Hq[0][:, 0] + Hq[1][:, 1]`` must vanish.
    """

    name: str
    b: np.ndarray
    L: np.ndarray
    Hq: np.ndarray

    def __post_init__(self):
        if abs(np.trace(self.L)) > 1e-14:
            raise ValueError("linear part is not divergence free")
        if np.abs(self.Hq[0][:, 0] + self.Hq[1][:, 1]).max() > 1e-14:
            raise ValueError("quadratic part is not divergence free")

    def value(self, x):
        x = np.atleast_2d(x)
        quad = 0.5 * np.einsum("ij,ajk,ik->ia", x, self.Hq, x)
        return self.b + x @ self.L.T + quad

    def gradient(self, x):
        x = np.atleast_2d(x)
        return self.L[None] + np.einsum("ajk,ik->iaj", self.Hq, x)

    def interface_data(self, curve: PeriodicCurve, nu: float, sigma: float = 0.0) -> InterfaceData:
        """Exact interface data, with the stress datum chosen so the stress balance holds."""
        z, za, zaa = curve.z, curve.z_alpha, curve.z_alphaalpha
        J = self.gradient(z)
        Hz = np.einsum("ajk,ik->iaj", self.Hq, za)  # d_a J
        v_a = np.einsum("iaj,ij->ia", J, za)
        v_aa = np.einsum("iaj,ij->ia", Hz, za) + np.einsum("iaj,ij->ia", J, zaa)
        speed = np.hypot(za[:, 0], za[:, 1])
        t = za / speed[:, None]
        t_a = zaa / speed[:, None] - za * (np.einsum("ij,ij->i", za, zaa) / speed ** 3)[:, None]
        n = -perp(za)
        n_a = -perp(zaa)
        D = J + np.swapaxes(J, 1, 2)
        dD = Hz + np.swapaxes(Hz, 1, 2)
        T = 2 * nu * np.einsum("iab,ib->ia", D, n)
        T_a = 2 * nu * (np.einsum("iab,ib->ia", dD, n) + np.einsum("iab,ib->ia", D, n_a))
        nn = speed ** 2
        Tn = np.einsum("ij,ij->i", T, n)
        s = Tn / nn
        s_a = (np.einsum("ij,ij->i", T_a, n) + np.einsum("ij,ij->i", T, n_a)) / nn \
            - 2 * Tn * np.einsum("ij,ij->i", n, n_a) / nn ** 2
        tau = np.einsum("ij,ij->i", T, t)
        tau_a = np.einsum("ij,ij->i", T_a, t) + np.einsum("ij,ij->i", T, t_a)
        return InterfaceData(curve.alpha, self.value(z), v_a, v_aa, np.array(za), np.array(zaa),
                             s, s_a, float(nu), tau, tau_a)

    def exact_contractions(self, curve: PeriodicCurve):
        """``(c_tt, c_tn)`` per sample: ``<H_j z_a, z_a>`` and ``<H_j z_a, z_a^perp>``."""
        za = curve.z_alpha
        Hz = np.einsum("ajk,ik->iaj", self.Hq, za)
        return np.einsum("iaj,ij->ia", Hz, za), np.einsum("iaj,ij->ia", Hz, perp(za))


def shear_field(rate: float = 1.0) -> PolynomialField:
    """Simple shear ``v = (rate * y, 0)``."""
    return PolynomialField("shear", np.zeros(2), np.array([[0.0, rate], [0.0, 0.0]]), np.zeros((2, 2, 2)))


def quadratic_field(a: float = 0.7, c: float = -0.4, d: float = 0.3, e: float = 0.5) -> PolynomialField:
    """``v = (a x^2 - 2 e x y + c y^2, d x^2 - 2 a x y + e y^2)`` plus a traceless linear part."""
    H1 = np.array([[2 * a, -2 * e], [-2 * e, 2 * c]])
    H2 = np.array([[2 * d, -2 * a], [-2 * a, 2 * e]])
    L = np.array([[0.2, -0.3], [0.4, -0.2]])
    return PolynomialField("quadratic", np.array([0.1, -0.2]), L, np.array([H1, H2]))


FIELDS = {"shear": shear_field, "quadratic": quadratic_field}
