"""Command-line interface.

Subcommands wrap the library operations: simulate, equilibria, stability,
sweep, basin, separatrix, reproduce. Each takes a config file (except
reproduce, which carries its own presets), writes its primary outputs as
CSV/JSONL files under --out, and prints a short summary to stdout.

Exit codes: 0 success, 2 configuration error, 3 I/O error, 4 numerical
failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import basin as basin_mod
from .bifurcation import NoSignChangeError, UnsupportedPairError, sweep, write_sweep_csv
from .config import ConfigError, RunConfig, dump_config, load_config
from .equilibria import (
    DegenerateEquilibriumError,
    EQUILIBRIUM_IDS,
    catalog,
    compute_equilibrium,
    records_to_jsonl,
)
from .figures import FIGURE_NAMES, reproduce
from .integrate import StepFailureError, integrate, write_trajectory_csv
from .stability import EigenSolverError, classify, verdicts_to_jsonl

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_NUMERIC = 4

_NUMERIC_ERRORS = (
    StepFailureError,
    EigenSolverError,
    DegenerateEquilibriumError,
    NoSignChangeError,
    UnsupportedPairError,
    basin_mod.DegenerateGeometryError,
    basin_mod.FitResidualError,
)


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="INI run configuration")
    common.add_argument("--out", type=Path, default=Path("."), help="output directory")
    common.add_argument(
        "--tol",
        type=float,
        default=None,
        help="override the relative integration tolerance (absolute = value/100)",
    )
    common.add_argument(
        "--dump-config",
        action="store_true",
        help="print the parsed config in canonical form and exit",
    )

    parser = argparse.ArgumentParser(
        prog="twostrain",
        description="two-competitor, two-strain model: simulation and analysis",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("simulate", parents=[common], help="integrate one trajectory")

    sub.add_parser("equilibria", parents=[common], help="write the equilibrium catalog")

    sub.add_parser("stability", parents=[common], help="write stability verdicts")

    p_sweep = sub.add_parser("sweep", parents=[common], help="sweep one parameter")
    p_sweep.add_argument("--param", required=True, help="parameter name to vary")
    p_sweep.add_argument("--lo", type=float, required=True)
    p_sweep.add_argument("--hi", type=float, required=True)
    p_sweep.add_argument("--n", type=int, required=True, help="grid point count")

    p_basin = sub.add_parser("basin", parents=[common], help="classify a grid of start states")
    p_basin.add_argument("--resolution", type=int, default=21)
    p_basin.add_argument(
        "--bounds",
        default="0:2,0:3,0:2.5",
        help="slice box as lo:hi,lo:hi,lo:hi over (P, S, V); the second strain stays absent",
    )
    p_basin.add_argument(
        "--attractors",
        default=None,
        help="comma-separated equilibrium ids (default: all stable feasible ones)",
    )
    p_basin.add_argument("--match-radius", type=float, default=0.05)

    p_sep = sub.add_parser("separatrix", parents=[common], help="locate and fit the basin boundary")
    p_sep.add_argument("--graph-axis", default="V", help="axis the boundary is a graph over")
    p_sep.add_argument(
        "--resolution",
        type=int,
        default=21,
        help="harvest grid resolution; boundary segments are the opposite-basin corner pairs of its cells",
    )
    p_sep.add_argument("--bounds", default="0:2,0:3,0:2.5")
    p_sep.add_argument("--attractors", default=None)
    p_sep.add_argument("--match-radius", type=float, default=0.05)
    p_sep.add_argument("--bisect-tol", type=float, default=1e-4)

    p_repro = sub.add_parser("reproduce", parents=[common], help="run a named scenario")
    p_repro.add_argument("figure", choices=FIGURE_NAMES + ("all",))
    return parser


def _load(args: argparse.Namespace) -> RunConfig:
    if args.config is None:
        raise ConfigError("--config is required for this command")
    run = load_config(args.config)
    if args.tol is not None:
        if args.tol <= 0.0:
            raise ConfigError("--tol must be positive")
        run = RunConfig(
            params=run.params,
            initial=run.initial,
            integration=run.integration.with_tolerance(args.tol),
        )
    return run


def _maybe_dump(args: argparse.Namespace, run: RunConfig) -> bool:
    if args.dump_config:
        sys.stdout.write(dump_config(run))
        return True
    return False


def _parse_bounds(text: str) -> tuple[tuple[float, float], ...]:
    try:
        parts = text.split(",")
        bounds = tuple(tuple(float(v) for v in part.split(":")) for part in parts)
    except ValueError as err:
        raise ConfigError(f"malformed --bounds {text!r}: {err}") from err
    if len(bounds) != 3 or any(len(b) != 2 for b in bounds):
        raise ConfigError(f"--bounds needs three lo:hi ranges, got {text!r}")
    return bounds


def _select_attractors(run: RunConfig, selection: str | None):
    if selection:
        ids = [token.strip() for token in selection.split(",") if token.strip()]
    else:
        ids = []
        for rec in catalog(run.params):
            if not rec.feasible or rec.coordinates is None:
                continue
            verdict = classify(run.params, rec.id)
            if verdict.classification.startswith("stable"):
                ids.append(rec.id)
        if len(ids) < 2:
            raise ConfigError(
                f"auto-detected {len(ids)} stable feasible equilibria; "
                "pass --attractors with at least two ids"
            )
    records = []
    for eq_id in ids:
        if eq_id not in EQUILIBRIUM_IDS:
            raise ConfigError(f"unknown equilibrium id {eq_id!r} in --attractors")
        records.append((eq_id, compute_equilibrium(run.params, eq_id).coordinates))
    return records


def _cmd_simulate(args: argparse.Namespace) -> int:
    run = _load(args)
    if _maybe_dump(args, run):
        return EXIT_OK
    start = run.require_initial()
    traj = integrate(run.params, tuple(start), run.integration)
    args.out.mkdir(parents=True, exist_ok=True)
    with open(args.out / "trajectory.csv", "w") as fh:
        write_trajectory_csv(traj, fh)
    final = ", ".join(f"{v:.10g}" for v in traj.final_state)
    print(f"{traj.termination} at t = {traj.final_time:.6g}; final state: ({final})")
    print(f"wrote {args.out / 'trajectory.csv'} ({len(traj)} samples)")
    return EXIT_OK


def _cmd_equilibria(args: argparse.Namespace) -> int:
    run = _load(args)
    if _maybe_dump(args, run):
        return EXIT_OK
    records = catalog(run.params)
    args.out.mkdir(parents=True, exist_ok=True)
    (args.out / "catalog.jsonl").write_text(records_to_jsonl(records))
    for rec in records:
        if rec.coordinates is None:
            print(f"{rec.id}: undefined ({rec.notes})")
        else:
            coords = ", ".join(f"{v:.6g}" for v in rec.coordinates)
            tag = "feasible" if rec.feasible else "infeasible"
            if rec.marginal:
                tag += ", marginal"
            print(f"{rec.id}: ({coords}) [{tag}]")
    print(f"wrote {args.out / 'catalog.jsonl'}")
    return EXIT_OK


def _cmd_stability(args: argparse.Namespace) -> int:
    run = _load(args)
    if _maybe_dump(args, run):
        return EXIT_OK
    verdicts = []
    skipped = []
    for eq_id in EQUILIBRIUM_IDS:
        try:
            verdicts.append(classify(run.params, eq_id))
        except DegenerateEquilibriumError as err:
            skipped.append((eq_id, str(err)))
    args.out.mkdir(parents=True, exist_ok=True)
    (args.out / "verdicts.jsonl").write_text(verdicts_to_jsonl(verdicts))
    for v in verdicts:
        print(f"{v.id}: {v.classification} (lead Re {v.lead_real_part:.6g})")
    for eq_id, msg in skipped:
        print(f"{eq_id}: skipped ({msg})")
    print(f"wrote {args.out / 'verdicts.jsonl'}")
    return EXIT_OK


def _cmd_sweep(args: argparse.Namespace) -> int:
    run = _load(args)
    if _maybe_dump(args, run):
        return EXIT_OK
    try:
        result = sweep(run.params, args.param, args.lo, args.hi, args.n)
    except ValueError as err:
        raise ConfigError(str(err)) from err
    args.out.mkdir(parents=True, exist_ok=True)
    with open(args.out / "sweep.csv", "w") as fh:
        write_sweep_csv(result, fh)
    print(f"wrote {args.out / 'sweep.csv'} ({len(result.rows)} rows)")
    return EXIT_OK


def _cmd_basin(args: argparse.Namespace) -> int:
    run = _load(args)
    if _maybe_dump(args, run):
        return EXIT_OK
    bounds = _parse_bounds(args.bounds)
    attractors = _select_attractors(run, args.attractors)
    grid = basin_mod.classify_grid(
        run.params,
        bounds,
        args.resolution,
        attractors,
        config=run.integration,
        match_radius=args.match_radius,
    )
    args.out.mkdir(parents=True, exist_ok=True)
    with open(args.out / "labels.csv", "w") as fh:
        basin_mod.write_grid_csv(grid, fh)
    decided = 1.0 - grid.undecided_fraction
    print(
        f"classified {grid.labels.size} nodes toward {', '.join(grid.attractor_ids)}; "
        f"{decided:.1%} decided"
    )
    print(f"wrote {args.out / 'labels.csv'}")
    return EXIT_OK


def _cmd_separatrix(args: argparse.Namespace) -> int:
    run = _load(args)
    if _maybe_dump(args, run):
        return EXIT_OK
    bounds = _parse_bounds(args.bounds)
    attractors = _select_attractors(run, args.attractors)
    grid = basin_mod.classify_grid(
        run.params,
        bounds,
        args.resolution,
        attractors,
        config=run.integration,
        match_radius=args.match_radius,
    )
    segments = basin_mod.boundary_edge_segments(grid, diagonals=True)
    sample = basin_mod.separatrix_points(
        run.params,
        segments,
        attractors,
        bisect_tol=args.bisect_tol,
        config=run.integration,
        match_radius=args.match_radius,
    )
    args.out.mkdir(parents=True, exist_ok=True)
    with open(args.out / "boundary_points.csv", "w") as fh:
        basin_mod.write_points_csv(sample, basin_mod.DEFAULT_SLICE, fh)
    model = basin_mod.fit_surface(sample.points, graph_axis=args.graph_axis)
    with open(args.out / "surface.obj", "w") as fh:
        basin_mod.write_surface_obj(model, fh)
    with open(args.out / "surface_lattice.csv", "w") as fh:
        basin_mod.write_surface_lattice_csv(model, fh)
    print(
        f"{len(sample.points)} boundary points from {len(segments)} boundary-cell "
        f"corner pairs ({len(sample.skipped)} skipped); fit residual {model.fit_residual:.3e}"
    )
    print(f"wrote {args.out / 'boundary_points.csv'}, surface.obj, surface_lattice.csv")
    return EXIT_OK


def _cmd_reproduce(args: argparse.Namespace) -> int:
    names = FIGURE_NAMES if args.figure == "all" else (args.figure,)
    cfg = None
    if args.tol is not None:
        from .integrate import IntegrationConfig

        cfg = IntegrationConfig().with_tolerance(args.tol)
    for name in names:
        outdir = args.out / name if len(names) > 1 else args.out
        summary = reproduce(name, outdir, config=cfg)
        print(f"{name}: wrote {outdir}/summary.txt")
        if "max_deviation" in summary:
            print(f"  max deviation from {summary['target_id']}: {summary['max_deviation']:.3e}")
        if "side_fraction" in summary:
            print(
                f"  undecided {summary['undecided_fraction']:.2%}, "
                f"{summary['n_boundary_points']} boundary points, "
                f"fit residual {summary['fit_residual']:.2e}, "
                f"side consistency {summary['side_fraction']:.2%}, "
                f"runtime {summary['runtime_seconds']:.1f}s"
            )
    return EXIT_OK


_COMMANDS = {
    "simulate": _cmd_simulate,
    "equilibria": _cmd_equilibria,
    "stability": _cmd_stability,
    "sweep": _cmd_sweep,
    "basin": _cmd_basin,
    "separatrix": _cmd_separatrix,
    "reproduce": _cmd_reproduce,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    handler = _COMMANDS[args.command]
    try:
        return handler(args)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as err:
        print(f"I/O error: {err}", file=sys.stderr)
        return EXIT_IO
    except _NUMERIC_ERRORS as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
