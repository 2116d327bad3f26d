"""Command-line front end: presets, run orchestration, output management.

Subcommands
-----------
run <preset|config-file> [--override key=val]... [--out DIR] [--force]
    Run a named experiment preset or a solver config file.  Output goes to
    DIR (default: $VICSEK_KINETIC_OUT or ./runs, plus the preset name);
    existing directories are never overwritten without --force.
diag <snapshot-file> [--e-u] [--e-vm] [--kappa]
    Scalar diagnostics of a stored snapshot.
scan-phase --rho-min --rho-max --sigma-min --sigma-max --steps N ...
    Entropy/concentration scan over the (rho_bar, sigma) plane.
micro <config-file> [--override key=val]... [--out DIR] [--force]
    Particle simulation from a flat key-value config.

Exit codes: 0 success, 2 unknown preset, 3 malformed config, 4 output
directory exists or is unwritable, 5 run aborted (sub-step cap), 1 other.
Errors print a single line ``error code=<name> message="..."`` on stderr.

Output directory layout: config.echo, series.csv, snapshots/, diag/.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
import time

import numpy as np

from . import diagnostics, fileio
from .collision import (
    CollisionParams,
    ModelKind,
    SubstepCapError,
    cfl_collision,
    collision_adapt,
    collision_step,
)
from .fileio import ConfigError
from .kinetic_solver import SolverConfig, run, smooth_skew_profile
from .particle_sim import MicroParams, avg_neighbors, init_particles, run_micro
from .velocity_grid import make_grid

__all__ = ["main", "run_preset", "PRESETS"]

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_UNKNOWN_PRESET = 2
EXIT_BAD_CONFIG = 3
EXIT_OUTPUT_DIR = 4
EXIT_ABORTED = 5


class OutputDirError(OSError):
    pass


class RunAbortedError(RuntimeError):
    pass


def _fail(code_name: str, message: str) -> None:
    print(f'error code={code_name} message="{message}"', file=sys.stderr)


def _prepare_out(out_dir: str, force: bool) -> str:
    if os.path.exists(out_dir):
        if not force:
            raise OutputDirError(
                f"output directory {out_dir!r} exists (pass --force to reuse)"
            )
    else:
        try:
            os.makedirs(out_dir)
        except OSError as exc:
            raise OutputDirError(f"cannot create output directory: {exc}") from exc
    for sub in ("snapshots", "diag"):
        fileio.ensure_dir(os.path.join(out_dir, sub))
    return out_dir


def _apply_overrides(items: dict[str, str], overrides: list[str]) -> dict[str, str]:
    out = dict(items)
    for ov in overrides:
        if "=" not in ov:
            raise ConfigError(f"override {ov!r} is not of the form key=val")
        key, val = ov.split("=", 1)
        out[key.strip()] = val.strip()
    return out


def _echo(out_dir: str, items: dict[str, str]) -> None:
    with open(os.path.join(out_dir, "config.echo"), "w", encoding="ascii") as fh:
        fh.write(fileio.format_config(items))


# --------------------------------------------------------------------------
# homogeneous (collision-only) experiment helpers

def _fixed_step_relax(f, params, grid, t_end: float, dt: float):
    t = 0.0
    eps = 1e-9 * dt
    while t < t_end - eps:
        h = min(dt, t_end - t)
        f = collision_step(f, h, params, grid)
        t += h
    return f


def _band_seed_profile(theta: np.ndarray, rho: float, amplitude: float) -> np.ndarray:
    """rho * (1 + amplitude * sum_p cos(p theta)) over the band harmonics."""
    pert = np.zeros_like(theta)
    for p in (1, 2, 3, 5, 7):
        pert += np.cos(p * theta)
    return rho * (1.0 + amplitude * pert)


# --------------------------------------------------------------------------
# presets

def _preset_accuracy_order(out_dir: str | None, overrides: list[str]) -> dict:
    """Convergence-order study of the collision operator in the angle grid."""
    p = _coerce(
        {"mu": 1.0, "sigma": 0.2, "t_end": 1.0, "dt": 1e-3,
         "n_list": "8,16,32,64,128", "n_ref": 256},
        overrides,
    )
    params = CollisionParams(model=ModelKind.VICSEK, mu=p["mu"], sigma=p["sigma"])
    n_list = [int(s) for s in str(p["n_list"]).split(",")]

    grid_ref = make_grid(p["n_ref"])
    f_ref = _fixed_step_relax(
        smooth_skew_profile(grid_ref.theta), params, grid_ref, p["t_end"], p["dt"]
    )
    family = []
    for n in n_list:
        grid = make_grid(n)
        f = _fixed_step_relax(
            smooth_skew_profile(grid.theta), params, grid, p["t_end"], p["dt"]
        )
        family.append((grid.dtheta, f))
    slope = diagnostics.accuracy_order(family, f_ref)
    rows = np.array(
        [
            (dth, np.sqrt(dth * ((f - f_ref[:: p["n_ref"] // len(f)]) ** 2).sum()))
            for dth, f in family
        ]
    )
    if out_dir:
        _echo(out_dir, {**{k: str(v) for k, v in p.items()}, "preset": "accuracy-order"})
        fileio.write_table(
            os.path.join(out_dir, "diag", "accuracy.csv"), ("dtheta", "l2_error"), rows
        )
    print(f"accuracy-order: fitted slope = {slope:.4f}")
    return {"slope": slope, "rows": rows}


def _preset_homogeneous_relaxation(out_dir: str | None, overrides: list[str]) -> dict:
    """Free energy and distance to equilibrium along a homogeneous run."""
    p = _coerce(
        {"mu": 1.0, "sigma": 0.2, "n_theta": 64, "t_end": 10.0,
         "sample_every": 0.05, "model": "vicsek"},
        overrides,
    )
    params = CollisionParams(
        model=ModelKind(p["model"]), mu=p["mu"], sigma=p["sigma"]
    )
    grid = make_grid(p["n_theta"])
    f = smooth_skew_profile(grid.theta)
    times = [0.0]
    fe = [diagnostics.free_energy(f, params.model, p["mu"], p["sigma"], grid)]
    gaps = [diagnostics.equilibrium_gap(f, params, grid)]
    t = 0.0
    while t < p["t_end"] - 1e-12:
        h = min(p["sample_every"], p["t_end"] - t)
        f = collision_adapt(f, h, params, grid)
        t += h
        times.append(t)
        fe.append(diagnostics.free_energy(f, params.model, p["mu"], p["sigma"], grid))
        gaps.append(diagnostics.equilibrium_gap(f, params, grid))
    rows = np.column_stack(
        [times, [v.total for v in fe], [v.entropy_part for v in fe], gaps]
    )
    if out_dir:
        _echo(out_dir, {**{k: str(v) for k, v in p.items()}, "preset": "homogeneous-relaxation"})
        fileio.write_table(
            os.path.join(out_dir, "diag", "relaxation.csv"),
            ("t", "free_energy", "entropy_part", "gap"),
            rows,
        )
    print(
        f"homogeneous-relaxation: free energy {fe[0].total:.6f} -> {fe[-1].total:.6f}, "
        f"gap {gaps[0]:.3e} -> {gaps[-1]:.3e}"
    )
    return {"rows": rows, "final_f": f, "grid": grid, "params": params}


def _preset_adaptive_vs_standard(out_dir: str | None, overrides: list[str]) -> dict:
    """Fixed tiny global step vs adaptive sub-stepping, error and wall time."""
    p = _coerce(
        {"mu": 1.0, "sigma": 0.2, "rho": 1.0, "t_end": 1.0, "outer_dt": 0.1,
         "n_list": "8,16,32,64,128", "n_ref": 256},
        overrides,
    )
    params = CollisionParams(model=ModelKind.VICSEK, mu=p["mu"], sigma=p["sigma"])
    n_list = [int(s) for s in str(p["n_list"]).split(",")]
    grid_ref = make_grid(p["n_ref"])
    # the global step every grid shares: the stability bound of the finest
    dt_std = cfl_collision(p["mu"], p["sigma"], grid_ref.dtheta)
    f0_ref = _band_seed_profile(grid_ref.theta, p["rho"], 0.2)
    f_ref = _fixed_step_relax(f0_ref, params, grid_ref, p["t_end"], dt_std)

    rows = []
    results = {}
    for n in n_list:
        grid = make_grid(n)
        f0 = _band_seed_profile(grid.theta, p["rho"], 0.2)
        t0 = time.perf_counter()
        f_std = _fixed_step_relax(f0, params, grid, p["t_end"], dt_std)
        wall_std = time.perf_counter() - t0

        t0 = time.perf_counter()
        f_ad = f0
        t = 0.0
        while t < p["t_end"] - 1e-12:
            h = min(p["outer_dt"], p["t_end"] - t)
            f_ad = collision_adapt(f_ad, h, params, grid)
            t += h
        wall_ad = time.perf_counter() - t0

        sub = f_ref[:: p["n_ref"] // n]
        err_std = float(np.max(np.abs(f_std - sub)))
        err_ad = float(np.max(np.abs(f_ad - sub)))
        diff = float(np.max(np.abs(f_std - f_ad)))
        rows.append((grid.dtheta, err_std, err_ad, diff, wall_std, wall_ad))
        results[n] = (f_std, f_ad, err_std, err_ad, diff, wall_std, wall_ad)
    rows = np.asarray(rows)
    if out_dir:
        _echo(out_dir, {**{k: str(v) for k, v in p.items()}, "preset": "adaptive-vs-standard"})
        fileio.write_table(
            os.path.join(out_dir, "diag", "adaptive_vs_standard.csv"),
            ("dtheta", "err_standard", "err_adaptive", "max_diff",
             "wall_standard", "wall_adaptive"),
            rows,
        )
    print("adaptive-vs-standard: dtheta, err_std, err_adapt, diff, t_std, t_adapt")
    for r in rows:
        print(f"  {r[0]:.5f}  {r[1]:.3e}  {r[2]:.3e}  {r[3]:.3e}  {r[4]:.3f}s  {r[5]:.3f}s")
    return {"rows": rows, "results": results, "dt_std": dt_std}


_SOLVER_PRESETS: dict[str, dict[str, str]] = {
    "vicsek-2d-longtime": {
        # long-run alignment: density flattens to a constant.  t_end=200 is
        # the scaled default; override t_end=1000 for the full-length run.
        "model": "vicsek", "mu": "1.0", "sigma": "0.2", "c": "1.0",
        "length": "10.0", "m_x": "100", "m_y": "100", "n_theta": "30",
        "t_end": "200.0", "init": "random", "init_amplitude": "0.5",
        "init_mean_rho": "0.15915494309189535", "seed": "1",
        "diag_every": "2.0", "snapshot_every": "50.0", "snapshot_format": "f64le",
    },
    "dfl-band-2d": {
        "model": "dfl", "mu": "1.0", "sigma": "0.2", "c": "1.0",
        "length": "10.0", "m_x": "100", "m_y": "100", "n_theta": "30",
        "t_end": "1000.0", "init": "homogeneous-band", "init_mean_rho": "0.0763",
        "seed": "1", "diag_every": "1.0", "snapshot_every": "100.0",
        "snapshot_format": "f64le",
    },
    "dfl-band-pseudo1d": {
        "model": "dfl", "mu": "1.0", "sigma": "0.2", "c": "1.0",
        "length": "10.0", "m_x": "100", "m_y": "1", "n_theta": "30",
        "t_end": "1000.0", "init": "homogeneous-band", "init_mean_rho": "0.0763",
        "seed": "1", "diag_every": "0.5", "snapshot_every": "100.0",
        "snapshot_format": "f64le",
    },
}


def _run_solver_items(items: dict[str, str], out_dir: str | None) -> dict:
    cfg = SolverConfig.from_items(items)
    record = run(cfg, out_dir=out_dir)
    status = "aborted" if record.aborted else "done"
    print(
        f"run {status}: t={record.times[-1]:.6g} mass={record.mass[-1]:.9g} "
        f"max_rho={record.max_rho[-1]:.6g} E_u={record.e_u[-1]:.6g} "
        f"E_VM={record.e_vm[-1]:.6g} wall={record.wall_time:.1f}s"
    )
    if record.aborted:
        raise RunAbortedError(record.abort_reason or "sub-step cap exceeded")
    return {"record": record, "config": cfg}


def _preset_phase_diagram(out_dir: str | None, overrides: list[str]) -> dict:
    """Entropy scan over (rho_bar, sigma) with short pseudo-1D runs."""
    p = _coerce(
        {"rho_min": 0.02, "rho_max": 0.12, "sigma_min": 0.08, "sigma_max": 0.32,
         "steps": 6, "t_end": 50.0, "mu": 1.0, "m_x": 100, "n_theta": 30,
         "length": 10.0, "seed": 1},
        overrides,
    )
    template = SolverConfig.from_items({
        "model": "dfl", "mu": str(p["mu"]), "sigma": str(p["sigma_min"]),
        "c": "1.0", "length": str(p["length"]), "m_x": str(p["m_x"]),
        "m_y": "1", "n_theta": str(p["n_theta"]), "t_end": str(p["t_end"]),
        "init": "random", "init_amplitude": "0.2", "init_mean_rho": "0.05",
        "seed": str(p["seed"]), "diag_every": str(p["t_end"]),
    })
    rho_values = np.linspace(p["rho_min"], p["rho_max"], int(p["steps"]))
    sigma_values = np.linspace(p["sigma_min"], p["sigma_max"], int(p["steps"]))
    rows = diagnostics.phase_scan(template, rho_values, sigma_values)
    if out_dir:
        _echo(out_dir, {**{k: str(v) for k, v in p.items()}, "preset": "phase-diagram"})
        fileio.write_scan(os.path.join(out_dir, "diag", "phase_scan.csv"), rows)
    print(f"phase-diagram: {rows.shape[0]} points "
          f"({int(np.count_nonzero(rows[:, 4] == 0.0))} with kappa = 0)")
    return {"rows": rows}


_MICRO_DEFAULTS: dict[str, str] = {
    # reduced band run: a third of the full particle count in a box shrunk
    # to keep the neighbor density pi*R^2*N/L^2 at its full-size value of
    # 2.36 (at the full box size this count would drop below the ordering
    # transition and no band can form).  Full-size version:
    #   --override n_particles=30000 --override length=4.0
    #   --override profile_dx=0.1 (and a longer t_end; ordering is slower)
    "n_particles": "10000", "mu": "100.0", "sigma": "20.0", "c": "1.0",
    "radius": "0.02", "length": "2.3094010767585034", "dt": "0.01",
    "model": "vicsek", "seed": "1", "t_end": "52.0",
    "profile_dx": "0.057735026918962585", "profile_every": "4.0",
    "include_self": "true",
}


def _parse_micro_items(items: dict[str, str]) -> tuple[MicroParams, dict[str, float]]:
    items = dict(items)
    extras = {
        "t_end": float(items.pop("t_end", "52.0")),
        "profile_dx": float(items.pop("profile_dx", "0.1")),
        "profile_every": float(items.pop("profile_every", "4.0")),
    }
    raw_self = items.pop("include_self", "true").lower()
    if raw_self not in ("true", "false"):
        raise ConfigError(f"include_self must be true or false, got {raw_self!r}")
    try:
        params = MicroParams(
            n_particles=int(items.pop("n_particles")),
            mu=float(items.pop("mu")),
            sigma=float(items.pop("sigma")),
            c=float(items.pop("c")),
            radius=float(items.pop("radius")),
            length=float(items.pop("length")),
            dt=float(items.pop("dt")),
            model=ModelKind(items.pop("model", "vicsek").lower()),
            seed=int(items.pop("seed", "0")),
            include_self=(raw_self == "true"),
        )
    except KeyError as exc:
        raise ConfigError(f"missing required micro config key {exc}") from exc
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if items:
        raise ConfigError(f"unknown micro config keys: {sorted(items)}")
    return params, extras


def _run_micro_items(items: dict[str, str], out_dir: str | None) -> dict:
    params, extras = _parse_micro_items(items)
    state = init_particles(params)
    if out_dir:
        _echo(out_dir, items)
        fileio.write_particles(
            os.path.join(out_dir, "snapshots", "particles_t0000.csv"),
            state.positions, state.headings,
        )
    t0 = time.perf_counter()
    state, profiles = run_micro(
        params, extras["t_end"], state=state,
        profile_dx=extras["profile_dx"], profile_every=extras["profile_every"],
    )
    wall = time.perf_counter() - t0
    stats = avg_neighbors(state, params)
    if out_dir:
        fileio.write_particles(
            os.path.join(out_dir, "snapshots", f"particles_t{state.time:07.1f}.csv"),
            state.positions, state.headings,
        )
        rows = []
        for t, prof in profiles:
            for x, r, u in zip(prof.x, prof.rho, prof.u):
                rows.append((t, x, r, u))
        fileio.write_band_profiles(
            os.path.join(out_dir, "diag", "band_profile.csv"), np.asarray(rows)
        )
    last = profiles[-1][1] if profiles else None
    if last is not None:
        ratio = float(last.rho.max() / last.rho.mean())
        print(
            f"micro done: t={state.time:.2f} neighbors={stats.empirical:.3f} "
            f"(homogeneous {stats.homogeneous_estimate:.3f}) "
            f"rho max/mean={ratio:.2f} wall={wall:.1f}s"
        )
    return {"state": state, "profiles": profiles, "params": params, "stats": stats}


def _preset_micro_band(out_dir: str | None, overrides: list[str]) -> dict:
    items = _apply_overrides(_MICRO_DEFAULTS, overrides)
    return _run_micro_items(items, out_dir)


def _coerce(defaults: dict, overrides: list[str]) -> dict:
    """Apply key=val overrides onto typed defaults (type from the default)."""
    out = dict(defaults)
    for ov in overrides:
        if "=" not in ov:
            raise ConfigError(f"override {ov!r} is not of the form key=val")
        key, val = ov.split("=", 1)
        key = key.strip()
        if key not in out:
            raise ConfigError(f"unknown override key {key!r}; known: {sorted(out)}")
        kind = type(out[key])
        try:
            out[key] = kind(val.strip()) if kind is not bool else val.strip() == "true"
        except ValueError as exc:
            raise ConfigError(f"override {key!r}: cannot parse {val!r}") from exc
    return out


def _solver_preset_runner(name: str):
    def runner(out_dir: str | None, overrides: list[str]) -> dict:
        items = _apply_overrides(_SOLVER_PRESETS[name], overrides)
        return _run_solver_items(items, out_dir)
    return runner


PRESETS = {
    "accuracy-order": _preset_accuracy_order,
    "homogeneous-relaxation": _preset_homogeneous_relaxation,
    "adaptive-vs-standard": _preset_adaptive_vs_standard,
    "vicsek-2d-longtime": _solver_preset_runner("vicsek-2d-longtime"),
    "dfl-band-2d": _solver_preset_runner("dfl-band-2d"),
    "dfl-band-pseudo1d": _solver_preset_runner("dfl-band-pseudo1d"),
    "phase-diagram": _preset_phase_diagram,
    "micro-band": _preset_micro_band,
}


def run_preset(name: str, overrides: list[str] | None = None,
               out_dir: str | None = None) -> dict:
    """Run a preset programmatically (the tests drive experiments this way)."""
    if name not in PRESETS:
        raise KeyError(f"unknown preset {name!r}")
    return PRESETS[name](out_dir, overrides or [])


# --------------------------------------------------------------------------
# argument parsing and dispatch

def _default_out(name: str) -> str:
    root = os.environ.get("VICSEK_KINETIC_OUT", "runs")
    return os.path.join(root, name)


def _cmd_run(args: argparse.Namespace) -> int:
    target = args.target
    if target in PRESETS:
        out_dir = args.out or _default_out(target)
        _prepare_out(out_dir, args.force)
        PRESETS[target](out_dir, args.override)
        return EXIT_OK
    if os.path.exists(target):
        with open(target, "r", encoding="utf-8") as fh:
            items = fileio.parse_config_text(fh.read())
        items = _apply_overrides(items, args.override)
        name = os.path.splitext(os.path.basename(target))[0]
        out_dir = args.out or _default_out(name)
        _prepare_out(out_dir, args.force)
        _run_solver_items(items, out_dir)
        return EXIT_OK
    raise KeyError(target)


def _cmd_diag(args: argparse.Namespace) -> int:
    header, values = fileio.read_snapshot(args.snapshot)
    from .transport import DistributionField, SpatialGrid

    field = DistributionField(
        values=values,
        grid=SpatialGrid.make(header.m_x, header.m_y, header.length),
        agrid=make_grid(header.n_theta),
    )
    mass = field.mass()
    rho_bar = mass / (2.0 * np.pi * header.length**2)
    print(f"t = {header.t:.17g}")
    print(f"mass = {mass:.17g}")
    print(f"rho_bar = {rho_bar:.17g}")
    if args.e_u:
        print(f"E_u = {diagnostics.entropy_uniform(field):.17g}")
    if args.e_vm:
        print(f"E_VM = {diagnostics.entropy_vonmises(field, header.mu, header.sigma):.17g}")
    if args.kappa:
        sol = diagnostics.solve_kappa(rho_bar, header.mu, header.sigma)
        print(f"kappa = {sol.kappa:.17g}")
        print(f"threshold_sigma = {sol.threshold_sigma:.17g}")
    return EXIT_OK


def _cmd_scan(args: argparse.Namespace) -> int:
    overrides = [
        f"rho_min={args.rho_min}", f"rho_max={args.rho_max}",
        f"sigma_min={args.sigma_min}", f"sigma_max={args.sigma_max}",
        f"steps={args.steps}",
    ] + (args.override or [])
    out_dir = args.out or _default_out("scan-phase")
    _prepare_out(out_dir, args.force)
    _preset_phase_diagram(out_dir, overrides)
    return EXIT_OK


def _cmd_micro(args: argparse.Namespace) -> int:
    with open(args.config, "r", encoding="utf-8") as fh:
        items = fileio.parse_config_text(fh.read())
    items = _apply_overrides(items, args.override)
    name = os.path.splitext(os.path.basename(args.config))[0]
    out_dir = args.out or _default_out(name)
    _prepare_out(out_dir, args.force)
    _run_micro_items(items, out_dir)
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vicsek-kinetic",
        description="Kinetic and particle solvers for circle-valued alignment dynamics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a preset or a solver config file")
    p_run.add_argument("target", help=f"preset ({', '.join(sorted(PRESETS))}) or config file")
    p_run.add_argument("--override", action="append", default=[], metavar="KEY=VAL")
    p_run.add_argument("--out", default=None)
    p_run.add_argument("--force", action="store_true")
    p_run.set_defaults(func=_cmd_run)

    p_diag = sub.add_parser("diag", help="diagnostics of a snapshot file")
    p_diag.add_argument("snapshot")
    p_diag.add_argument("--e-u", action="store_true", dest="e_u")
    p_diag.add_argument("--e-vm", action="store_true", dest="e_vm")
    p_diag.add_argument("--kappa", action="store_true")
    p_diag.set_defaults(func=_cmd_diag)

    p_scan = sub.add_parser("scan-phase", help="(rho_bar, sigma) entropy scan")
    p_scan.add_argument("--rho-min", type=float, required=True)
    p_scan.add_argument("--rho-max", type=float, required=True)
    p_scan.add_argument("--sigma-min", type=float, required=True)
    p_scan.add_argument("--sigma-max", type=float, required=True)
    p_scan.add_argument("--steps", type=int, required=True)
    p_scan.add_argument("--override", action="append", default=[], metavar="KEY=VAL")
    p_scan.add_argument("--out", default=None)
    p_scan.add_argument("--force", action="store_true")
    p_scan.set_defaults(func=_cmd_scan)

    p_micro = sub.add_parser("micro", help="particle simulation from a config file")
    p_micro.add_argument("config")
    p_micro.add_argument("--override", action="append", default=[], metavar="KEY=VAL")
    p_micro.add_argument("--out", default=None)
    p_micro.add_argument("--force", action="store_true")
    p_micro.set_defaults(func=_cmd_micro)
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except KeyError as exc:
        _fail("unknown-preset", f"unknown preset or missing file: {exc}")
        return EXIT_UNKNOWN_PRESET
    except ConfigError as exc:
        _fail("bad-config", str(exc))
        return EXIT_BAD_CONFIG
    except OutputDirError as exc:
        _fail("output-dir", str(exc))
        return EXIT_OUTPUT_DIR
    except RunAbortedError as exc:
        _fail("run-aborted", str(exc))
        return EXIT_ABORTED
    except SubstepCapError as exc:
        _fail("run-aborted", str(exc))
        return EXIT_ABORTED
    except OSError as exc:
        _fail("io", str(exc))
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
