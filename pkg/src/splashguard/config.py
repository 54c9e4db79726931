"""Flat ``key = value`` configuration with dotted keys."""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .errors import ConfigError


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


# key -> (parser, default, help)
KEYS = {
    "scenario.name": (str, "rest", "scenario: rest, uniform_sheet, wavy_sheet, keyhole_approach, vortex_patch"),
    "scenario.seed": (int, 0, "seed for the optional initial perturbation"),
    "scenario.noise": (float, 0.0, "amplitude of a random smooth offset perturbation"),
    "grid.n": (int, 64, "interface samples (power of two)"),
    "run.dt": (float, 1e-2, "time step"),
    "run.steps": (int, 10, "number of steps"),
    "run.ca_floor": (float, 1e-6, "chord-arc floor that rejects a step"),
    "run.refined": (_bool, False, "graded-panel sheet integral in the stepper"),
    "params.rho_e": (float, 1.0, "inviscid fluid density"),
    "params.rho_ns": (float, 1.0, "viscous fluid density"),
    "params.nu_ns": (float, 0.1, "viscosity"),
    "params.g": (float, 1.0, "gravity"),
    "params.sigma": (float, 0.0, "surface tension"),
    "params.A": (float, 10.0, "admissibility constant"),
    "params.T": (float, 1.0, "time horizon of the admissibility class"),
    "bulk.kind": (str, "none", "bulk vorticity: none, disc, gridded"),
    "bulk.file": (str, "", "gridded bulk vorticity file"),
    "bulk.strength": (float, 1.0, "disc vorticity"),
    "bulk.radius": (float, 0.2, "disc radius"),
    "bulk.depth": (float, 0.6, "disc centre depth below the interface"),
    "bulk.h": (float, 0.02, "bulk cell size"),
    "bulk.c2": (float, 0.0, "declared C^2 bound of the bulk velocity"),
    "sheet.strength": (float, 1.0, "interface vorticity scale"),
    "sheet.amplitude": (float, 0.1, "wavy sheet amplitude"),
    "sheet.mode": (int, 1, "wavy sheet mode"),
    "keyhole.d0": (float, 1e-2, "initial neck width of the prescribed approach"),
    "keyhole.rate": (float, 1.0, "exponential approach rate"),
    "curve.family": (str, "keyhole", "curve for detect-splash/recover-gradient: keyhole, sinusoid, flat"),
    "curve.file": (str, "", "curve file (overrides curve.family)"),
    "curve.d": (float, 1e-3, "keyhole neck width"),
    "curve.amplitude": (float, 0.2, "sinusoid amplitude"),
    "curve.mode": (int, 2, "sinusoid mode"),
    "splash.eps1": (float, 0.1, "parameter-separation window"),
    "splash.eps2": (float, 0.05, "chord-arc threshold for a splash candidate"),
    "splash.eps4": (float, 0.05, "chord-arc level of the certificate"),
    "splash.eps5": (float, 0.2, "frame scale"),
    "splash.half_width": (float, 0.25, "frame half-width (0 means eps5^4)"),
    "monitor.p": (float, 2.0, "exponent of the vorticity monitor"),
    "sweep.d_min_exp": (int, -5, "smallest d is 10^d_min_exp"),
    "sweep.d_max_exp": (int, -1, "largest d is 10^d_max_exp"),
    "sweep.per_decade": (int, 2, "sweep points per decade"),
    "sweep.n": (int, 256, "interface samples of the sweep curves"),
    "sweep.window": (float, 0.25, "frame window of the sweep"),
    "operators.eps": (float, 1e-6, "gap parameter of the graph operators"),
    "operators.n": (int, 512, "graph operator grid intervals"),
    "recover.field": (str, "quadratic", "manufactured field: shear, quadratic"),
    "recover.tol": (float, 1e-8, "residual tolerance of the recovery check"),
    "certify.trace": (str, "", "CSV with t, D, Dtilde columns"),
    "certify.C": (float, 0.0, "Gronwall constant (0 means fitted from the trace)"),
    "certify.K": (float, 2.0, "contradiction factor"),
}


def keys_help() -> str:
    return "\n".join(f"  {k} = {d!r}  ({h})" for k, (_, d, h) in KEYS.items())


@dataclass
class Config:
    values: dict = field(default_factory=lambda: {k: v[1] for k, v in KEYS.items()})
    origin: dict = field(default_factory=dict)

    def __getitem__(self, key):
        return self.values[key]

    def get(self, key, default=None):
        return self.values.get(key, default)

    def set(self, key: str, raw: str, path=None, line=None) -> None:
        if key not in KEYS:
            raise ConfigError(f"unknown key {key!r}", path, line)
        parser = KEYS[key][0]
        try:
            self.values[key] = parser(raw.strip())
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {exc}", path, line) from None
        self.origin[key] = (path, line)

    def where(self, key) -> str:
        path, line = self.origin.get(key, (None, None))
        if path is None:
            return "default" if line is None else "--set"
        return f"{path}:{line}"


def parse_text(text: str, path=None, cfg: Optional[Config] = None) -> Config:
    cfg = cfg or Config()
    for i, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", path, i)
        key, value = (s.strip() for s in line.split("=", 1))
        cfg.set(key, value, path, i)
    return cfg


def load(path=None, overrides=()) -> Config:
    """File values, then ``key=value`` overrides (overrides win)."""
    cfg = Config()
    if path:
        p = Path(path)
        try:
            text = p.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc.strerror}", str(p)) from None
        parse_text(text, str(p), cfg)
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not key=value")
        key, value = item.split("=", 1)
        cfg.set(key.strip(), value, None, "--set")
    return cfg
