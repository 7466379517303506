"""Scenario runner: reproducible experiments driven by a JSON config.

Six scenarios: simulate, ground-state, morawetz, smooth-envelope,
gn-check, weight-check.  Unknown config keys are hard errors.  Every run
writes a JSON manifest (even on failure); CSV output uses 17 significant
digits, '.' decimals and LF line endings.  Exit codes: 0 all enabled
checks passed, 1 a check failed, 2 usage or config error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .envelope import (
    certify_ratio,
    read_envelope_csv,
    smooth,
    write_envelope_csv,
)
from .evolution import EvolutionConfig, evolve
from .grid import Field, make_grid, read_snapshot, write_snapshot
from .ground_state import closed_form_1d, gn_ratio, pohozaev_check, solve_petviashvili
from .morawetz import (
    MORAWETZ_CSV_HEADER,
    build_weights,
    interaction_flux,
    weight_conditions_check,
    weight_family_checks,
)
from .observables import energy, kinetic, mass
from .symmetries import galilean_boost, pseudoconformal_sample

SCENARIOS = ("simulate", "ground-state", "morawetz", "smooth-envelope",
             "gn-check", "weight-check")


class ConfigError(ValueError):
    pass


_ALLOWED = {
    None: {"scenario", "grid", "evolution", "initial", "weights", "envelope", "output"},
    "grid": {"d", "n", "L"},
    "evolution": {"mu", "dt", "t_end", "stride", "dealias"},
    "initial": {"kind", "amplitude", "width", "center", "k0", "xi0", "t0",
                "path", "tol", "seed"},
    "weights": {"M", "R"},
    "envelope": {"J0", "m", "input"},
    "output": {"dir", "emit_snapshots"},
}


def _validate_keys(cfg: dict) -> None:
    for key in cfg:
        if key not in _ALLOWED[None]:
            raise ConfigError(f"unknown config key: {key!r}")
        sub = cfg[key]
        if key in _ALLOWED and key is not None and isinstance(sub, dict):
            for k2 in sub:
                if k2 not in _ALLOWED[key]:
                    raise ConfigError(f"unknown config key: {key}.{k2}")
    if "scenario" not in cfg:
        raise ConfigError("config must name a scenario")
    if cfg["scenario"] not in SCENARIOS:
        raise ConfigError(
            f"unknown scenario {cfg['scenario']!r}; choose one of {', '.join(SCENARIOS)}")


def _grid_from(cfg: dict):
    g = cfg.get("grid")
    if g is None:
        raise ConfigError("scenario requires a grid section")
    try:
        return make_grid(int(g["d"]), int(g["n"]), float(g["L"]))
    except KeyError as exc:
        raise ConfigError(f"grid section is missing {exc}") from exc
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _initial_field(cfg: dict, grid) -> Field:
    init = cfg.get("initial")
    if init is None:
        raise ConfigError("scenario requires an initial section")
    kind = init.get("kind")
    if kind == "gaussian":
        amp = float(init.get("amplitude", 1.0))
        width = float(init.get("width", 1.0))
        center = np.atleast_1d(np.asarray(init.get("center", [0.0] * grid.d), dtype=float))
        k0 = np.atleast_1d(np.asarray(init.get("k0", [0.0] * grid.d), dtype=float))
        xm = grid.x_mesh()
        r2 = sum((x - c) ** 2 for x, c in zip(xm, center))
        phase = sum(x * k for x, k in zip(xm, k0))
        return Field(grid, amp * np.exp(-r2 / (2.0 * width ** 2)) * np.exp(1j * phase))
    if kind in ("soliton", "boosted-soliton"):
        if grid.d == 1:
            q = closed_form_1d(grid)
        else:
            q = solve_petviashvili(grid, tol=float(init.get("tol", 1e-12)))
        f = q.field
        if kind == "boosted-soliton":
            if "xi0" not in init:
                raise ConfigError("boosted-soliton needs xi0")
            f = galilean_boost(f, np.asarray(init["xi0"], dtype=float), 0.0)
        return f
    if kind == "pseudoconformal":
        if grid.d != 1:
            raise ConfigError("the pseudoconformal sample is exposed for d = 1")
        t0 = float(init.get("t0", -1.0))
        q = closed_form_1d(grid)
        return pseudoconformal_sample(t0, grid, q)
    if kind == "snapshot":
        if "path" not in init:
            raise ConfigError("snapshot initial data needs a path")
        return read_snapshot(init["path"])
    raise ConfigError(f"unknown initial kind {kind!r}")


def _fmt(x: float) -> str:
    return f"{x:.17g}"


class Checks:
    def __init__(self):
        self.results = {}

    def add(self, name: str, passed: bool, value=None, threshold=None):
        self.results[name] = {
            "passed": bool(passed),
            "value": value if value is None else float(value),
            "threshold": threshold if threshold is None else float(threshold),
        }

    @property
    def all_passed(self) -> bool:
        return all(r["passed"] for r in self.results.values())


def _scenario_simulate(cfg, outdir: Path, checks: Checks) -> dict:
    grid = _grid_from(cfg)
    f0 = _initial_field(cfg, grid)
    ev = cfg.get("evolution")
    if ev is None:
        raise ConfigError("simulate requires an evolution section")
    econf = EvolutionConfig(
        mu=int(ev["mu"]), dt=float(ev["dt"]), t_end=float(ev["t_end"]),
        stride=int(ev.get("stride", 1)), dealias=bool(ev.get("dealias", True)))
    emit = bool(cfg.get("output", {}).get("emit_snapshots", False))
    if emit:
        write_snapshot(f0, outdir / "initial.mcnls")
    series, final = evolve(f0, econf)
    series.to_csv(outdir / "diagnostics.csv")
    if series.boundary_breach:
        print("mcnls: warning: outermost 5% annulus held more than 1e-8 "
              "of the mass during the run", file=sys.stderr)
    if emit:
        write_snapshot(final, outdir / "final.mcnls")
    m0 = series.mass[0]
    drift = max(abs(m - m0) for m in series.mass) / m0
    checks.add("mass_drift", drift <= 1e-10, drift, 1e-10)
    if series.outcome == "completed":
        e0 = series.energy[0]
        scale = max(abs(e0), 0.5 * series.kinetic[0], 1e-300)
        edrift = max(abs(e - e0) for e in series.energy) / scale
        # second-order splitting: budget 1e-6 at dt = 1e-4, scaled by dt^2
        etol = max(1e-6, 1e-6 * (econf.dt / 1e-4) ** 2)
        checks.add("energy_drift", edrift <= etol, edrift, etol)
    return {"outcome": series.outcome,
            "boundary_breach": series.boundary_breach,
            "samples": len(series.t)}


def _scenario_ground_state(cfg, outdir: Path, checks: Checks) -> dict:
    grid = _grid_from(cfg)
    q = solve_petviashvili(grid)
    write_snapshot(q.field, outdir / "ground_state.mcnls")
    sidecar = {"mass_sq": q.mass_sq, "gn_constant": q.gn_constant,
               "residual": q.residual}
    (outdir / "ground_state.json").write_text(
        json.dumps(sidecar, sort_keys=True, indent=1) + "\n")
    rel_res = q.residual / np.sqrt(q.mass_sq)
    checks.add("ode_residual", rel_res <= 1e-8, rel_res, 1e-8)
    r1, r2 = pohozaev_check(q)
    checks.add("pohozaev_energy", r1 <= 1e-6, r1, 1e-6)
    checks.add("pohozaev_dilation", r2 <= 1e-6, r2, 1e-6)
    erel = abs(energy(q.field, -1)) / (0.5 * kinetic(q.field))
    checks.add("zero_energy", erel <= 1e-6, erel, 1e-6)
    return sidecar


def _scenario_gn_check(cfg, outdir: Path, checks: Checks) -> dict:
    grid = _grid_from(cfg)
    q = solve_petviashvili(grid)
    ratio = gn_ratio(q.field, q)
    checks.add("extremizer_ratio", abs(ratio - 1.0) <= 1e-4, ratio, 1e-4)
    rng = np.random.default_rng(20240 + grid.d)
    worst = 0.0
    for _ in range(20):
        xm = grid.x_mesh()
        r2 = sum(x * x for x in xm)
        env = np.exp(-r2 / (2.0 * (grid.L / 6.0) ** 2))
        vals = np.zeros(grid.shape, dtype=complex)
        for _k in range(4):
            k0 = rng.integers(-4, 5, size=grid.d) * grid.dk
            amp = rng.normal() + 1j * rng.normal()
            vals += amp * np.exp(1j * sum(x * kk for x, kk in zip(xm, k0)))
        worst = max(worst, gn_ratio(Field(grid, vals * env), q))
    checks.add("random_field_ratio", worst <= 1.0 + 1e-6, worst, 1.0 + 1e-6)
    (outdir / "gn_check.json").write_text(
        json.dumps({"ratio": ratio, "worst_random_ratio": worst},
                   sort_keys=True, indent=1) + "\n")
    return {"ratio": ratio}


def _scenario_morawetz(cfg, outdir: Path, checks: Checks) -> dict:
    grid = _grid_from(cfg)
    f0 = _initial_field(cfg, grid)
    wcfg = cfg.get("weights")
    if wcfg is None:
        raise ConfigError("morawetz requires a weights section")
    w = build_weights(grid.d, float(wcfg["M"]), float(wcfg["R"]))
    ev = cfg.get("evolution")
    if ev is None:
        raise ConfigError("morawetz requires an evolution section")
    econf = EvolutionConfig(
        mu=int(ev["mu"]), dt=float(ev["dt"]), t_end=float(ev["t_end"]),
        stride=int(ev.get("stride", 1)), dealias=bool(ev.get("dealias", True)))

    from .evolution import step_strang
    from .observables import momentum_density, quad_weight

    rows = []
    consistent = True
    bound_ok = True
    u = f0
    t = 0.0
    nsteps = int(round(econf.t_end / econf.dt))
    sample_every = max(1, econf.stride)
    for step in range(nsteps + 1):
        if step % sample_every == 0 or step == nsteps:
            rep = interaction_flux(u, 1.0, 0.0, econf.mu, w)
            rows.append(rep.csv_row(t))
            total = rep.momentum + rep.dispersive + rep.nonlinear + \
                rep.curvature + rep.envelope_drift
            scale = max(abs(rep.flux), 1e-12)
            consistent &= abs(total - rep.flux) <= 1e-8 * scale
            p1 = sum(quad_weight(u) * np.sum(np.abs(p)) for p in momentum_density(u))
            bound_ok &= abs(rep.action) <= 2.0 * w.M * w.R * p1 * mass(u) * (1 + 1e-9)
        if step < nsteps:
            u = step_strang(u, econf.dt, econf.mu, dealias=econf.dealias)
            t += econf.dt
    (outdir / "morawetz.csv").write_text(
        MORAWETZ_CSV_HEADER + "\n" + "\n".join(rows) + "\n")
    checks.add("decomposition_consistent", consistent)
    checks.add("action_kernel_bound", bound_ok)
    return {"samples": len(rows)}


def _load_envelope(cfg):
    env = cfg.get("envelope")
    if env is None:
        raise ConfigError("scenario requires an envelope section")
    src = env.get("input")
    if src is None:
        raise ConfigError("envelope section needs an input")
    if src == "bundled:sawtooth":
        from importlib.resources import files

        from .envelope import parse_envelope_csv

        text = files("mcnls").joinpath("data/sawtooth.csv").read_text()
        return parse_envelope_csv(text), env
    return read_envelope_csv(src), env


def _scenario_smooth_envelope(cfg, outdir: Path, checks: Checks) -> dict:
    e, env = _load_envelope(cfg)
    j0 = env.get("J0")
    if j0 is not None and abs(float(j0) - e.j0) > 1e-12:
        raise ConfigError("envelope J0 conflicts with the input file header")
    m = int(env.get("m", 1))
    em = smooth(e, m)
    write_envelope_csv(em, outdir / "envelope_smoothed.csv")
    res = certify_ratio(e, m)
    checks.add("certify_bound", res.bound_ok)
    checks.add("pointwise_domination",
               bool(np.all(em.heights <= e.heights + 1e-15)))
    return {"variation_m": res.variation_m,
            "smallinterval_height_sum": res.smallinterval_height_sum,
            "passes": m}


def _scenario_weight_check(cfg, outdir: Path, checks: Checks) -> dict:
    grid_cfg = cfg.get("grid")
    d = int(grid_cfg["d"]) if grid_cfg else 1
    wcfg = cfg.get("weights")
    if wcfg is None:
        raise ConfigError("weight-check requires a weights section")
    w = build_weights(d, float(wcfg["M"]), float(wcfg["R"]))
    fam = weight_family_checks(w)
    for name, (value, bound, ok) in fam.items():
        checks.add(f"family_{name}", ok, value, bound)
    env_cfg = cfg.get("envelope")
    if env_cfg is not None and env_cfg.get("input"):
        env, _ = _load_envelope(cfg)
    else:
        env = [(1.0, 0.0)]
    rep = weight_conditions_check(w, env)
    checks.add("potential_sup", rep.sup_a_ok, rep.sup_a, rep.sup_a_bound)
    checks.add("potential_xgrad", rep.sup_xgrad_ok, rep.sup_xgrad, rep.sup_xgrad_bound)
    checks.add("potential_odd", rep.odd_ok, rep.odd_residual, 1e-10)
    if rep.dt_l1 is not None:
        checks.add("potential_dt_l1", rep.dt_l1_ok, rep.dt_l1, rep.dt_l1_bound)
    return {"checks": len(checks.results)}


_RUNNERS = {
    "simulate": _scenario_simulate,
    "ground-state": _scenario_ground_state,
    "gn-check": _scenario_gn_check,
    "morawetz": _scenario_morawetz,
    "smooth-envelope": _scenario_smooth_envelope,
    "weight-check": _scenario_weight_check,
}


def run_scenario(config_path) -> int:
    t_start = time.monotonic()
    outdir = Path("mcnls-out")
    manifest = {
        "config_path": str(config_path),
        "versions": _versions(),
        "checks": {},
        "outcome": None,
        "failure": None,
    }
    code = 2
    checks = Checks()
    try:
        with open(config_path) as fh:
            cfg = json.load(fh)
        manifest["config"] = cfg
        out_cfg = cfg.get("output") if isinstance(cfg, dict) else None
        if isinstance(out_cfg, dict) and isinstance(out_cfg.get("dir"), str):
            outdir = Path(out_cfg["dir"])
        _validate_keys(cfg)
        outdir.mkdir(parents=True, exist_ok=True)
        detail = _RUNNERS[cfg["scenario"]](cfg, outdir, checks)
        manifest["detail"] = detail
        manifest["outcome"] = detail.get("outcome", "ok")
        code = 0 if checks.all_passed else 1
        if code == 1:
            failed = [k for k, v in checks.results.items() if not v["passed"]]
            manifest["failure"] = f"checks failed: {', '.join(failed)}"
    except ConfigError as exc:
        manifest["failure"] = f"config error: {exc}"
        code = 2
    except FileNotFoundError as exc:
        manifest["failure"] = f"missing file: {exc}"
        code = 2
    except Exception as exc:  # noqa: BLE001 - manifest must record any failure
        manifest["failure"] = f"{type(exc).__name__}: {exc}"
        code = 1
    manifest["checks"] = checks.results
    manifest["wall_time_s"] = time.monotonic() - t_start
    try:
        outdir.mkdir(parents=True, exist_ok=True)
        with open(outdir / "manifest.json", "w", newline="\n") as fh:
            json.dump(manifest, fh, sort_keys=True, indent=1)
            fh.write("\n")
    except OSError:
        print("warning: could not write manifest", file=sys.stderr)
    if manifest["failure"]:
        print(f"mcnls: {manifest['failure']}", file=sys.stderr)
    return code


def _versions() -> dict:
    import scipy

    return {"mcnls": __version__, "numpy": np.__version__, "scipy": scipy.__version__}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="mcnls",
        description=(
            "Scenario runner for the mass-critical NLS laboratory. Scenarios: "
            "simulate | ground-state | morawetz | smooth-envelope | gn-check "
            "| weight-check."
        ),
    )
    parser.add_argument("--version", action="version", version=f"mcnls {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    runp = sub.add_parser("run", help="run a scenario from a JSON config file")
    runp.add_argument("config", help="path to the JSON config")
    args = parser.parse_args(argv)
    if args.command == "run":
        return run_scenario(args.config)
    parser.error(f"unknown command {args.command!r}")
    return 2


if __name__ == "__main__":
    sys.exit(main())
