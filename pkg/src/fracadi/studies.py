"""Convergence studies: run a refinement ladder, tabulate errors and rates.

A study solves one problem family over a ladder of resolutions for each
requested alpha.  The reported error is E_inf, the largest interior
max-norm error over all time levels of a run.  Errors are rounded to five
significant digits before rates are formed, so emitted tables are
self-consistent: rate_i = log2(e_{i-1} / e_i) holds exactly for the printed
numbers.  Doubling ladders make the rate an observed order of accuracy.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

from .adisolver import SolverOptions, solve
from .meshops import GridFn
from .problems import ProblemSpec, get_problem, mesh_for

_EMIT_CHOICES = ("table", "csv", "svg")


@dataclass(frozen=True)
class StudyConfig:
    """What to run and what to write.

    ``axis`` selects the refinement direction: "temporal" runs the ladder
    over step counts N at fixed spatial resolution ``fixed``; "spatial"
    runs it over cell counts M (both axes) at fixed N.  ``ladder`` entries
    should double for the rates to be read as orders.  ``problem`` is a
    builtin name, a JSON file path, or a ProblemSpec.
    """

    alphas: tuple[float, ...]
    axis: str
    ladder: tuple[int, ...]
    fixed: int
    problem: object = "example1"
    out_dir: str = "out"
    emit: tuple[str, ...] = ("table",)

    def __post_init__(self) -> None:
        if self.axis not in ("temporal", "spatial"):
            raise ValueError(f"axis must be temporal or spatial, got {self.axis!r}")
        if not self.alphas:
            raise ValueError("at least one alpha is required")
        for a in self.alphas:
            if not (0.0 < a < 1.0):
                raise ValueError(f"alpha {a} outside (0, 1)")
        if not self.ladder:
            raise ValueError("ladder must be nonempty")
        if any(int(v) != v or v < 1 for v in self.ladder):
            raise ValueError(f"ladder entries must be positive integers: {self.ladder}")
        if list(self.ladder) != sorted(set(self.ladder)):
            raise ValueError(f"ladder must be strictly increasing: {self.ladder}")
        if self.fixed < 1:
            raise ValueError(f"fixed resolution must be positive, got {self.fixed}")
        bad = set(self.emit) - set(_EMIT_CHOICES)
        if bad:
            raise ValueError(f"unknown emit flags {sorted(bad)}; "
                             f"choose from {_EMIT_CHOICES}")
        if isinstance(self.problem, ProblemSpec):
            if tuple(self.alphas) != (self.problem.alpha,):
                raise ValueError(
                    "an explicit ProblemSpec fixes alpha; the alphas list "
                    "must be exactly (problem.alpha,)"
                )


@dataclass(frozen=True)
class ConvergenceRow:
    alpha: float
    h: float
    tau: float
    e_inf: float
    rate: float | None


@dataclass
class StudyResult:
    rows: list[ConvergenceRow]
    finals: dict[float, GridFn] = field(default_factory=dict)


def _round_sig(e: float) -> float:
    # five significant digits, matching the table formatting
    return float(f"{e:.4e}")


def run_study(config: StudyConfig) -> StudyResult:
    """Execute every ladder entry for every alpha, in order.

    Each run is an independent solve, so results do not depend on the order
    of execution; rows appear alpha-major, coarse to fine.  The final field
    of the finest run per alpha is kept for optional rendering.
    """
    rows: list[ConvergenceRow] = []
    finals: dict[float, GridFn] = {}
    opts = SolverOptions(collect_reports=False)

    for alpha in config.alphas:
        problem = get_problem(config.problem, alpha)
        if problem.exact is None:
            raise ValueError(
                f"problem {problem.name!r} has no exact solution; "
                "a convergence study needs one"
            )
        prev: float | None = None
        for entry in config.ladder:
            if config.axis == "temporal":
                m, n = config.fixed, int(entry)
            else:
                m, n = int(entry), config.fixed
            mesh = mesh_for(problem, m, n=n)
            result = solve(problem, mesh, opts)
            e = _round_sig(result.e_inf)
            rate = None
            if prev is not None and e > 0.0:
                rate = math.log2(prev / e)
            rows.append(ConvergenceRow(
                alpha=problem.alpha, h=mesh.h1, tau=mesh.tau, e_inf=e, rate=rate,
            ))
            prev = e
            finals[problem.alpha] = result.final
    return StudyResult(rows=rows, finals=finals)


def emit_table(rows: list[ConvergenceRow]) -> str:
    """Fixed-width text table, one blank line between alpha groups."""
    lines = [f"{'alpha':>7} {'h':>12} {'tau':>12} {'e_inf':>12} {'rate':>9}"]
    last_alpha = None
    for row in rows:
        if last_alpha is not None and row.alpha != last_alpha:
            lines.append("")
        last_alpha = row.alpha
        rate = f"{row.rate:9.4f}" if row.rate is not None else f"{'*':>9}"
        lines.append(
            f"{row.alpha:7.3f} {row.h:12.6g} {row.tau:12.6g} "
            f"{row.e_inf:12.4e} {rate}"
        )
    return "\n".join(lines) + "\n"


def emit_csv(rows: list[ConvergenceRow], path) -> None:
    """Write rows as CSV; repr-formatted floats round-trip exactly."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["alpha", "h", "tau", "e_inf", "rate"])
        for row in rows:
            writer.writerow([
                repr(row.alpha), repr(row.h), repr(row.tau), repr(row.e_inf),
                "" if row.rate is None else repr(row.rate),
            ])


def read_study_csv(path) -> list[ConvergenceRow]:
    rows: list[ConvergenceRow] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != ["alpha", "h", "tau", "e_inf", "rate"]:
            raise ValueError(f"unexpected study CSV header: {header}")
        for rec in reader:
            if len(rec) != 5:
                raise ValueError(f"malformed study CSV row: {rec}")
            rows.append(ConvergenceRow(
                alpha=float(rec[0]), h=float(rec[1]), tau=float(rec[2]),
                e_inf=float(rec[3]), rate=None if rec[4] == "" else float(rec[4]),
            ))
    return rows


def emit_outputs(config: StudyConfig, result: StudyResult) -> list[Path]:
    """Write the requested artifacts into config.out_dir; returns paths."""
    from .heatmap import emit_heatmap

    written: list[Path] = []
    out = Path(config.out_dir)
    if config.emit:
        out.mkdir(parents=True, exist_ok=True)
    if "table" in config.emit:
        path = out / "study_table.txt"
        path.write_text(emit_table(result.rows))
        written.append(path)
    if "csv" in config.emit:
        path = out / "study.csv"
        emit_csv(result.rows, path)
        written.append(path)
    if "svg" in config.emit:
        for alpha, final in sorted(result.finals.items()):
            path = out / f"final_alpha{alpha:g}.svg"
            emit_heatmap(final, path, title=f"numerical solution, alpha={alpha:g}")
            written.append(path)
    return written
