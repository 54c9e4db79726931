"""Command-line entry point: ``splashguard <subcommand> [--config FILE] [--out DIR] [--set key=value ...]``."""
from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from . import config as cfgmod
from .errors import ConfigError, NoSplashCandidate, SplashGuardError, UsageError

SUBCOMMANDS = ("simulate", "detect-splash", "verify-bound", "recover-gradient", "certify", "selftest")
EXIT_OK, EXIT_ERROR, EXIT_CHECK_FAILED = 0, 1, 2


@dataclass(frozen=True)
class Command:
    subcommand: str
    config: str = ""
    out: str = "out"
    overrides: tuple = field(default_factory=tuple)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _parser() -> argparse.ArgumentParser:
    p = _Parser(prog="splashguard", description="Splash diagnostics for two-fluid vortex-sheet interfaces.",
                epilog="configuration keys:\n" + cfgmod.keys_help(),
                formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("subcommand", choices=SUBCOMMANDS)
    p.add_argument("--config", default="", help="flat key = value configuration file")
    p.add_argument("--out", default="out", help="output directory")
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                   help="override a configuration key (repeatable; wins over the file)")
    return p


def parse_args(argv) -> Command:
    ns = _parser().parse_args(list(argv))
    for item in ns.overrides:
        if "=" not in item:
            raise UsageError(f"--set expects KEY=VALUE, got {item!r}")
    return Command(ns.subcommand, ns.config, ns.out, tuple(ns.overrides))


# ---------------------------------------------------------------------------
# builders from configuration
# ---------------------------------------------------------------------------
def _params(cfg):
    from .dynamics import FluidParams

    return FluidParams(**{k: cfg[f"params.{k}"] for k in ("rho_e", "rho_ns", "nu_ns", "g", "sigma", "A", "T")})


def _eps(cfg):
    return {k: cfg[f"splash.{k}"] for k in ("eps1", "eps2", "eps4", "eps5")}


def _bulk(cfg):
    from .kernels import read_gridded
    from .scenarios import vortex_patch

    kind = cfg["bulk.kind"]
    if kind == "none":
        return None
    if kind == "disc":
        return vortex_patch(n=8, radius=cfg["bulk.radius"], depth=cfg["bulk.depth"],
                            strength=cfg["bulk.strength"], h=cfg["bulk.h"]).omega_v
    if kind == "gridded":
        if not cfg["bulk.file"]:
            raise ConfigError("bulk.kind = gridded needs bulk.file", *cfg.origin.get("bulk.kind", (None, None)))
        return read_gridded(cfg["bulk.file"])
    raise ConfigError(f"unknown bulk.kind {kind!r}", *cfg.origin.get("bulk.kind", (None, None)))


def build_scenario(cfg):
    from .dynamics import SheetState
    from .scenarios import SCENARIOS

    name = cfg["scenario.name"]
    if name not in SCENARIOS:
        raise ConfigError(f"unknown scenario {name!r}", *cfg.origin.get("scenario.name", (None, None)))
    common = dict(n=cfg["grid.n"], steps=cfg["run.steps"], dt=cfg["run.dt"])
    extra = {
        "uniform_sheet": dict(strength=cfg["sheet.strength"]),
        "wavy_sheet": dict(amplitude=cfg["sheet.amplitude"], mode=cfg["sheet.mode"], strength=cfg["sheet.strength"]),
        "keyhole_approach": dict(d0=cfg["keyhole.d0"], rate=cfg["keyhole.rate"]),
        "vortex_patch": dict(radius=cfg["bulk.radius"], depth=cfg["bulk.depth"],
                             strength=cfg["bulk.strength"], h=cfg["bulk.h"]),
    }.get(name, {})
    scn = SCENARIOS[name](**common, **extra, params=_params(cfg))
    scn.eps = _eps(cfg)
    scn.ca_floor = cfg["run.ca_floor"]
    scn.p = cfg["monitor.p"]
    scn.bulk_c2 = cfg["bulk.c2"]
    scn.refined = cfg["run.refined"]
    if cfg["bulk.kind"] != "none":
        scn.omega_v = _bulk(cfg)
    noise = cfg["scenario.noise"]
    if noise:
        base = scn.make_state
        rng = np.random.default_rng(cfg["scenario.seed"])
        coef = rng.standard_normal((4, 2))

        def make():
            st = base()
            a = st.curve.alpha
            pert = sum(np.outer(np.sin((k + 1) * a), coef[k]) / (k + 1) ** 2 for k in range(4))
            return SheetState(st.curve.with_offsets(st.curve.offsets + noise * pert), st.omega, st.t)
        scn.make_state = make
    return scn


def build_curve(cfg):
    from . import families
    from .geometry import read_curve

    if cfg["curve.file"]:
        return read_curve(cfg["curve.file"])
    fam = cfg["curve.family"]
    n = cfg["grid.n"]
    if fam == "keyhole":
        return families.keyhole(n, cfg["curve.d"])
    if fam == "sinusoid":
        return families.sinusoid(n, cfg["curve.amplitude"], cfg["curve.mode"])
    if fam == "flat":
        return families.flat(n)
    raise ConfigError(f"unknown curve.family {fam!r}", *cfg.origin.get("curve.family", (None, None)))


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, default=_jsonable))


def _jsonable(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, (np.bool_,)):
        return bool(x)
    raise TypeError(f"not serialisable: {type(x)}")


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------
def cmd_simulate(cfg, out: Path) -> int:
    from .bounds import splash_certificate
    from .scenarios import check_admissible, run

    scn = build_scenario(cfg)
    state0 = scn.make_state()
    adm = check_admissible(state0, scn.omega_v, scn.params, bulk_c2=scn.bulk_c2, v0_c3=scn.v0_c3)
    trace = run(scn)
    trace.to_csv(out / "trace.csv")
    summary = trace.summary()
    summary["admissibility"] = adm.clauses
    ok = adm.ok and trace.aborted is None
    if len(trace.rows) >= 2:
        cert = splash_certificate(trace.gronwall_trace(eps1=scn.eps["eps1"]), scn.eps["eps4"], cfg["certify.K"])
        summary["certificate"] = cert.to_dict()
        ok = ok and not cert.violations
    _write_json(out / "trace.json", summary)
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def cmd_detect(cfg, out: Path) -> int:
    from .geometry import chord_arc_min
    from .splash import build_splash_frame, find_closest_pair, frame_invariants, invariants_ok, verify_pair_conditions

    curve = build_curve(cfg)
    eps = _eps(cfg)
    ca = chord_arc_min(curve)
    report = {"CA": ca.ca_value, "argmin_pair": list(ca.argmin_pair)}
    try:
        a1, a2, d = find_closest_pair(curve, eps["eps1"], eps["eps2"])
    except NoSplashCandidate as exc:
        report["candidate"] = None
        report["reason"] = str(exc)
        _write_json(out / "detect.json", report)
        return EXIT_CHECK_FAILED
    pair = verify_pair_conditions(curve, a1, a2)
    hw = cfg["splash.half_width"] or None
    frame = build_splash_frame(curve, a1, a2, eps["eps5"], half_width=hw)
    frame.write_json(out / "frame.json")
    inv = frame_invariants(frame)
    report.update(candidate={"alpha1": a1, "alpha2": a2, "d": d},
                  pair={"orth1": pair.orth1, "orth2": pair.orth2, "tangent_dot": pair.tangent_dot,
                        "segment_clear": pair.segment_clear, "ok": pair.ok},
                  invariants=inv, invariants_ok=invariants_ok(inv))
    _write_json(out / "detect.json", report)
    return EXIT_OK if pair.ok and report["invariants_ok"] else EXIT_CHECK_FAILED


def cmd_verify_bound(cfg, out: Path) -> int:
    from .bounds import GraphOperators, d_sweep, default_d_values, keyhole_case, poisson_mass

    d_values = default_d_values(cfg["sweep.d_min_exp"], cfg["sweep.d_max_exp"], cfg["sweep.per_decade"])
    n, window = cfg["sweep.n"], cfg["sweep.window"]
    report = d_sweep(lambda d: keyhole_case(d, n=n, window=window), d_values)
    report.to_csv(out / "bound_report.csv")
    summary = report.summary()
    eps, m = cfg["operators.eps"], cfg["operators.n"]
    ops = [GraphOperators.build(eps, n=k) for k in (m, 2 * m)]
    normM = [o.operator_norm(o.M) for o in ops]
    normH = [o.operator_norm(o.H) for o in ops]
    mass = float(ops[1].apply_M(np.ones(len(ops[1].alpha)))[m])
    oracle = poisson_mass(eps)
    summary["operators"] = {"eps": eps, "n": [m, 2 * m], "norm_M": normM, "norm_H": normH,
                            "mass_at_0": mass, "mass_oracle": oracle}
    ops_ok = (abs(normM[1] / normM[0] - 1) < 0.01 and abs(normH[1] / normH[0] - 1) < 0.01
              and abs(mass / oracle - 1) < 0.01)
    summary["operators_ok"] = ops_ok
    _write_json(out / "bound_report.json", summary)
    return EXIT_OK if summary.get("envelope_ok", True) and ops_ok else EXIT_CHECK_FAILED


def cmd_recover(cfg, out: Path) -> int:
    from .recovery import FIELDS, recover_all

    name = cfg["recover.field"]
    if name not in FIELDS:
        raise ConfigError(f"unknown recover.field {name!r}", *cfg.origin.get("recover.field", (None, None)))
    curve = build_curve(cfg)
    fieldv = FIELDS[name]()
    data = fieldv.interface_data(curve, cfg["params.nu_ns"])
    rec = recover_all(data)
    rec.to_csv(out / "recovery.csv")
    ctt, ctn = fieldv.exact_contractions(curve)
    err = {"gradient": float(np.abs(rec.G - fieldv.gradient(curve.z)).max()),
           "ctt": float(np.abs(rec.ctt - ctt).max()), "ctn": float(np.abs(rec.ctn - ctn).max()),
           "trace": float(np.abs(rec.trace).max()), "residual": float(rec.residual.max())}
    tol = cfg["recover.tol"]
    ok = all(v < tol for v in err.values())
    _write_json(out / "recovery.json", {"field": name, "errors": err, "tol": tol, "ok": ok})
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def read_trace_csv(path):
    """``(t, D, Dtilde)`` arrays from a CSV with those columns (``Dtilde`` optional)."""
    with Path(path).open() as fh:
        rows = list(csv.DictReader(fh))
    if not rows or "t" not in rows[0] or "D" not in rows[0]:
        raise ConfigError("trace CSV needs t and D columns", str(path))
    t = np.array([float(r["t"]) for r in rows])
    D = np.array([float(r["D"]) for r in rows])
    Dt = np.array([float(r.get("Dtilde", "nan") or "nan") for r in rows])
    return t, D, np.where(np.isnan(Dt), D, Dt)


def cmd_certify(cfg, out: Path) -> int:
    from .bounds import GronwallTrace, splash_certificate

    if not cfg["certify.trace"]:
        raise ConfigError("certify needs certify.trace")
    t, D, Dt = read_trace_csv(cfg["certify.trace"])
    C = cfg["certify.C"] or None
    cert = splash_certificate(GronwallTrace(t, D, Dt, C, cfg["splash.eps1"]), cfg["splash.eps4"], cfg["certify.K"])
    _write_json(out / "certificate.json", cert.to_dict())
    return EXIT_OK if cert.passed else EXIT_CHECK_FAILED


def selftest_checks() -> list:
    """Fast closed-form checks of each module; returns ``(name, passed)`` pairs."""
    from . import families
    from .bounds import GraphOperators, GronwallTrace, dtilde_from_velocities, gronwall_integrate, splash_certificate
    from .dynamics import SheetState, lp_monitor
    from .errors import NonIntegerPowerOfSigned
    from .kernels import interface_velocity
    from .splash import find_closest_pair

    checks: list = []

    def add(name: str, fn: Callable[[], bool]):
        try:
            checks.append((name, bool(fn())))
        except Exception:  # a crashing check is a failed check
            checks.append((name, False))

    flat = families.flat(64)
    add("flat sheet velocity", lambda: np.allclose(
        interface_velocity(SheetState(flat, np.full(64, 0.8))).value, [0.4, 0.0], atol=1e-12))
    add("zero vorticity", lambda: np.abs(interface_velocity(SheetState(flat, np.zeros(64))).value).max() == 0)
    add("rigid translation approach rate", lambda: dtilde_from_velocities([0, 0], [1, 0], [2, 3], [2, 3]) == 0)
    add("approach rate sign", lambda: dtilde_from_velocities([0, 0], [1, 0], [1, 0], [0, 0]) > 0)
    add("flat curve has no splash", lambda: _raises(NoSplashCandidate, find_closest_pair, flat))
    add("log-Gronwall closed form", lambda: abs(gronwall_integrate(np.e, 1.0, 1.0).closed_form - np.exp(np.e)) < 1e-12)
    ops = GraphOperators.build(1e-6, n=64)
    add("M of zero", lambda: not ops.apply_M(np.zeros(65)).any())
    add("H of even input at 0", lambda: abs(ops.apply_H(np.cos(ops.alpha / ops.r))[32]) < 1e-12)
    add("constant trace certificate", lambda: splash_certificate(
        GronwallTrace(np.arange(4.0), np.full(4, 9.0), np.full(4, 9.0), 1.0), 0.05).passed)
    add("signed monitor rejects odd power", lambda: _raises(
        NonIntegerPowerOfSigned, lp_monitor, SheetState(flat, np.sin(flat.alpha)), 3))
    return checks


def _raises(exc, fn, *args) -> bool:
    try:
        fn(*args)
    except exc:
        return True
    return False


def cmd_selftest(cfg, out: Path) -> int:
    checks = selftest_checks()
    for name, ok in checks:
        print(f"{'PASS' if ok else 'FAIL'} {name}")
    _write_json(out / "selftest.json", {name: ok for name, ok in checks})
    return EXIT_OK if all(ok for _, ok in checks) else EXIT_CHECK_FAILED


HANDLERS = {
    "simulate": cmd_simulate,
    "detect-splash": cmd_detect,
    "verify-bound": cmd_verify_bound,
    "recover-gradient": cmd_recover,
    "certify": cmd_certify,
    "selftest": cmd_selftest,
}


def execute(cmd: Command) -> int:
    try:
        cfg = cfgmod.load(cmd.config or None, cmd.overrides)
        out = Path(cmd.out)
        out.mkdir(parents=True, exist_ok=True)
        return HANDLERS[cmd.subcommand](cfg, out)
    except (SplashGuardError, ValueError, OSError) as exc:
        print(f"splashguard: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cmd = parse_args(argv)
    except UsageError as exc:
        print(f"splashguard: usage error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    return execute(cmd)


if __name__ == "__main__":
    sys.exit(main())
