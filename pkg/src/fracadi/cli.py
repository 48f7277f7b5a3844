"""Command-line front end.

Three subcommands:

  solve    run one problem at one resolution, optionally dumping the final
           field (CSV/SVG), per-step reports, and level snapshots
  study    run a refinement ladder and tabulate errors and observed orders
  verify   run the numerical self-check suite (quick or full)

A JSON config file can be passed with --config; its entries override any
flags given on the command line.  Failures print one machine-readable JSON
line to stderr and exit nonzero.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from .adisolver import SolverOptions, solve
from .heatmap import emit_heatmap
from .meshops import GridFn, write_csv
from .problems import (
    _max_abs_psi,
    get_problem,
    homogenize_initial,
    mesh_for,
    sample_xy,
)
from .studies import StudyConfig, emit_outputs, emit_table, run_study
from .verify import format_results, run_checks

_SOLVE_EMIT = ("csv", "svg", "reports", "snapshots")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fracadi",
        description="compact ADI solver for time-fractional diffusion-wave "
                    "problems, plus convergence studies",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("solve", help="run one problem at one resolution")
    ps.add_argument("--problem", default="example1",
                    help="builtin name or JSON problem file (default: example1)")
    ps.add_argument("--alpha", type=float, default=0.5,
                    help="fractional order in (0, 1) (default: 0.5)")
    ps.add_argument("--m", type=int, default=16,
                    help="cells per spatial axis (default: 16)")
    ps.add_argument("--n", type=int, default=10,
                    help="time steps (default: 10)")
    ps.add_argument("--method", default="adi", choices=("adi", "direct"))
    ps.add_argument("--out", default="out", help="output directory")
    ps.add_argument("--emit", default="",
                    help=f"comma list from {','.join(_SOLVE_EMIT)}")
    ps.add_argument("--snapshot-every", type=int, default=None,
                    help="keep every k-th level for snapshot emission")
    ps.add_argument("--config", default=None,
                    help="JSON config; entries override flags")
    ps.set_defaults(func=cmd_solve)

    pt = sub.add_parser("study", help="run a refinement ladder")
    pt.add_argument("--problem", default="example1")
    pt.add_argument("--alpha", default="0.5",
                    help="comma list of fractional orders (default: 0.5)")
    pt.add_argument("--axis", default="temporal",
                    choices=("temporal", "spatial"))
    pt.add_argument("--ladder", default="5,10,20,40,80",
                    help="comma list of N (temporal) or M (spatial) values")
    pt.add_argument("--fixed", type=int, default=None,
                    help="fixed M for temporal axis / fixed N for spatial "
                         "(defaults: 16 / 10000)")
    pt.add_argument("--out", default="out")
    pt.add_argument("--emit", default="table",
                    help="comma list from table,csv,svg")
    pt.add_argument("--config", default=None,
                    help="JSON config; entries override flags")
    pt.set_defaults(func=cmd_study)

    pv = sub.add_parser("verify", help="run the numerical self-checks")
    pv.add_argument("--suite", default="quick", choices=("quick", "full"))
    pv.set_defaults(func=cmd_verify)
    return parser


def _apply_config(args: argparse.Namespace) -> None:
    if getattr(args, "config", None) is None:
        return
    path = Path(args.config)
    try:
        data = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ValueError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ValueError(f"config {path} must contain a JSON object")
    for key, value in data.items():
        dest = key.replace("-", "_")
        if not hasattr(args, dest) or dest in ("func", "command", "config"):
            raise ValueError(f"config {path}: unknown key {key!r}")
        setattr(args, dest, value)


def _parse_list(value, cast):
    if isinstance(value, (list, tuple)):
        return tuple(cast(v) for v in value)
    value = str(value).strip()
    if not value:
        return ()
    return tuple(cast(v) for v in value.split(","))


def cmd_solve(args: argparse.Namespace) -> int:
    emit = _parse_list(args.emit, str)
    bad = set(emit) - set(_SOLVE_EMIT)
    if bad:
        raise ValueError(f"unknown emit flags {sorted(bad)}; "
                         f"choose from {_SOLVE_EMIT}")

    problem = get_problem(args.problem, args.alpha)
    mesh = mesh_for(problem, int(args.m), n=int(args.n))

    # the solver wants zero initial displacement; reduce and add back
    psi_vals = np.zeros(mesh.shape)
    reduced = problem
    if _max_abs_psi(problem) > 1e-12:
        reduced = homogenize_initial(problem)
        psi_vals = sample_xy(problem.psi, mesh)

    snapshot_every = args.snapshot_every
    if "snapshots" in emit and snapshot_every is None:
        raise ValueError("emitting snapshots requires --snapshot-every")

    options = SolverOptions(method=args.method, snapshot_every=snapshot_every)
    result = solve(reduced, mesh, options)
    final = GridFn(mesh, result.final.values + psi_vals)

    print(f"problem {problem.name}  alpha={problem.alpha:g}  "
          f"grid {mesh.M1}x{mesh.M2}  steps {mesh.N}")
    print(f"final max |u| = {float(np.max(np.abs(final.values))):.6e}")
    if result.e_inf is not None:
        print(f"E_inf = {result.e_inf:.4e}  final-level error = "
              f"{result.final_error:.4e}")

    out = Path(args.out)
    written: list[Path] = []
    if emit:
        out.mkdir(parents=True, exist_ok=True)
    if "csv" in emit:
        path = out / "final.csv"
        write_csv(final, path)
        written.append(path)
    if "svg" in emit:
        path = out / "final.svg"
        emit_heatmap(final, path,
                     title=f"{problem.name}, alpha={problem.alpha:g}, "
                           f"t={mesh.T:g}")
        written.append(path)
        if problem.exact is not None:
            from .problems import sample_xyt
            exact_grid = GridFn(mesh, sample_xyt(problem.exact, mesh, mesh.T))
            path = out / "exact.svg"
            emit_heatmap(exact_grid, path,
                         title=f"{problem.name} exact, t={mesh.T:g}")
            written.append(path)
    if "reports" in emit:
        path = out / "reports.csv"
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["level", "wall_time_ns", "rhs_norm",
                             "solution_inf_norm"])
            for rep in result.reports:
                writer.writerow([rep.level, rep.wall_time_ns,
                                 repr(rep.rhs_norm),
                                 repr(rep.solution_inf_norm)])
        written.append(path)
    if "snapshots" in emit:
        for level in sorted(result.snapshots):
            snap = result.snapshots[level]
            path = out / f"snapshot_{level:05d}.csv"
            write_csv(GridFn(mesh, snap.values + psi_vals), path)
            written.append(path)
    for path in written:
        print(f"wrote {path}")
    return 0


def cmd_study(args: argparse.Namespace) -> int:
    alphas = _parse_list(args.alpha, float)
    ladder = _parse_list(args.ladder, int)
    fixed = args.fixed
    if fixed is None:
        fixed = 16 if args.axis == "temporal" else 10000
    emit = _parse_list(args.emit, str)

    config = StudyConfig(
        alphas=alphas,
        axis=args.axis,
        ladder=ladder,
        fixed=int(fixed),
        problem=args.problem,
        out_dir=str(args.out),
        emit=emit,
    )
    result = run_study(config)
    if "table" in emit or not emit:
        print(emit_table(result.rows), end="")
    for path in emit_outputs(config, result):
        print(f"wrote {path}")
    return 0


def cmd_verify(args: argparse.Namespace) -> int:
    results = run_checks(args.suite)
    print(format_results(results), end="")
    return 0 if all(r.passed for r in results) else 1


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _apply_config(args)
        return args.func(args)
    except Exception as exc:  # surface everything as one stderr JSON line
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return 1


def entry() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    raise SystemExit(main())
