"""Time stepping for the integral-form evolution equation.

One step advances the field u from level n to n+1 by solving

    (Hx - c d2x)(Hy - c d2y) u^{n+1} =
        (Hx + c d2x)(Hy + c d2y) u^n
        + mu * [ sum_{k=1}^{n+1} lambda_k L u^{n+1-k}
               + sum_{k=1}^{n}   lambda_k L u^{n-k} ]
        + tau * H phi + (tau/2) * H (f^n + f^{n+1}),

where L is the compact Laplacian, H = Hx Hy, mu = tau**(alpha+1) / 2 and
c = mu * lambda_0.  The left side factors into two tridiagonal sweeps (x
then y); the intermediate unknown u* = (Hy - c d2y) u^{n+1} needs boundary
values, which follow from applying the y-factor to the prescribed Dirichlet
trace.  The scheme is second order in time, fourth order in space, and
unconditionally stable for alpha in (0, 1).

``direct_step`` solves the same linear system without splitting through a
dense LU factorization; it exists as a cross-check oracle for small grids.
Both paths keep the history of L u^k, so one step costs O(n) beyond the
sweeps.

States are advanced in place: step functions return the same object with
``current_level`` incremented.  A solve run is deterministic; identical
inputs give bitwise-identical trajectories.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .fracweights import WeightTable, scheme_weights
from .meshops import (
    GridFn,
    Mesh,
    _avgx,
    _avgy,
    _d2x,
    _d2y,
    _zero_frame,
    compact_h,
    delta2x_delta2y,
    lambda_op,
)
from .problems import ProblemSpec, sample_xy, sample_xyt
from .trisolve import TridiagOperator, build_sweep_operator, sweep_coefficients

# history + a couple of work arrays must stay under ~2 GiB
MAX_HISTORY_ENTRIES = 2**28

_DIVERGENCE_LIMIT = 1e100


class SolverDivergenceError(RuntimeError):
    """Raised when a step produces non-finite or absurdly large values."""

    def __init__(self, level: int, message: str | None = None) -> None:
        self.level = level
        super().__init__(message or f"solution diverged at level {level}")


@dataclass
class SolverOptions:
    """Knobs for a solve run.

    method            "adi" (sweeps) or "direct" (dense reference solve)
    dense_cap         refuse the direct path beyond this many cells per axis
    wsgd_forcing      build f from the Caputo-form source by discrete
                      quadrature instead of sampling forcing_f
    snapshot_every    keep a copy of the field every k levels (None: never)
    collect_reports   retain per-step timing/norm reports
    """

    method: str = "adi"
    dense_cap: int = 32
    wsgd_forcing: bool = False
    snapshot_every: int | None = None
    collect_reports: bool = True

    def __post_init__(self) -> None:
        if self.method not in ("adi", "direct"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.snapshot_every is not None and self.snapshot_every < 1:
            raise ValueError("snapshot_every must be positive or None")


@dataclass(frozen=True)
class StepReport:
    level: int
    wall_time_ns: int
    rhs_norm: float
    solution_inf_norm: float


class _Workspace:
    """Per-run cached objects: sweep factors, sampled data, dense factor."""

    def __init__(self, problem: ProblemSpec, mesh: Mesh,
                 options: SolverOptions, weights: WeightTable, mu: float) -> None:
        self.options = options
        self.c = mu * weights.lam[0]
        self.sweep_x = build_sweep_operator(mesh.M1 - 1, mesh.h1, self.c)
        self.sweep_y = build_sweep_operator(mesh.M2 - 1, mesh.h2, self.c)
        phi_vals = sample_xy(problem.phi, mesh)
        self.h_phi = _avgx(_avgy(phi_vals))
        self._mesh = mesh
        self._f_cache: dict[int, np.ndarray] = {}
        self.f_levels: np.ndarray | None = None
        self.dense = None
        if options.wsgd_forcing:
            if problem.caputo_forcing is None:
                raise ValueError(
                    "wsgd_forcing requires the problem's caputo_forcing"
                )
            self.f_levels = _wsgd_forcing_levels(problem, mesh, weights)
        elif problem.forcing_f is None:
            raise ValueError(
                "problem has no forcing_f; enable wsgd_forcing to derive it "
                "from caputo_forcing"
            )
        self._forcing = problem.forcing_f

    def f_at(self, level: int) -> np.ndarray:
        if self.f_levels is not None:
            return self.f_levels[level]
        cached = self._f_cache.get(level)
        if cached is None:
            cached = sample_xyt(self._forcing, self._mesh, level * self._mesh.tau)
            self._f_cache[level] = cached
            for k in [k for k in self._f_cache if k < level - 1]:
                del self._f_cache[k]
        return cached


def _wsgd_forcing_levels(problem: ProblemSpec, mesh: Mesh,
                         weights: WeightTable) -> np.ndarray:
    """Tabulate f^k = I^alpha g(t_k) for all levels by FFT convolution."""
    from scipy.signal import fftconvolve

    alpha = weights.alpha
    n = mesh.N
    g = np.empty((n + 1, *mesh.shape))
    for k in range(n + 1):
        g[k] = sample_xyt(problem.caputo_forcing, mesh, k * mesh.tau)
    omega = weights.omega[: n + 1]
    conv = fftconvolve(g, omega[:, None, None], axes=0)[: n + 1]
    mu1 = 1.0 - alpha / 2.0
    mu2 = alpha / 2.0
    out = mu1 * conv
    out[1:] += mu2 * conv[:-1]
    out *= mesh.tau**alpha
    return out


@dataclass
class SolverState:
    """Everything the scheme carries between levels.

    ``history_lambda_u[k]`` stores the compact Laplacian of the accepted
    level-k solution (frame zeroed); rows above ``current_level`` are
    unwritten zeros.  ``u_current`` always satisfies the prescribed boundary
    values of its own time level exactly.
    """

    mesh: Mesh
    weights: WeightTable
    mu: float
    current_level: int
    u_current: GridFn
    history_lambda_u: np.ndarray
    workspace: _Workspace = field(repr=False)
    last_report: StepReport | None = None


def init_state(problem: ProblemSpec, mesh: Mesh,
               options: SolverOptions | None = None) -> SolverState:
    """Build the level-0 state; the problem must already have psi == 0."""
    options = options or SolverOptions()
    _check_consistent(problem, mesh)

    psi_vals = sample_xy(problem.psi, mesh)
    if np.max(np.abs(psi_vals)) > 1e-12:
        raise ValueError(
            "initial displacement psi is nonzero on the mesh; "
            "apply homogenize_initial to the problem first"
        )
    if (mesh.N + 1) * (mesh.M1 + 1) * (mesh.M2 + 1) > MAX_HISTORY_ENTRIES:
        raise ValueError("history array would exceed the capacity limit")

    weights = scheme_weights(problem.alpha, mesh.N + 1)
    mu = mesh.tau ** (problem.alpha + 1.0) / 2.0
    workspace = _Workspace(problem, mesh, options, weights, mu)
    u0 = GridFn(mesh, np.zeros(mesh.shape))
    history = np.zeros((mesh.N + 1, *mesh.shape))
    return SolverState(
        mesh=mesh,
        weights=weights,
        mu=mu,
        current_level=0,
        u_current=u0,
        history_lambda_u=history,
        workspace=workspace,
    )


def _check_consistent(problem: ProblemSpec, mesh: Mesh) -> None:
    pairs = (("L1", problem.L1, mesh.L1), ("L2", problem.L2, mesh.L2),
             ("T", problem.T, mesh.T))
    for name, pv, mv in pairs:
        if abs(pv - mv) > 1e-12 * max(1.0, abs(pv)):
            raise ValueError(
                f"mesh {name}={mv} does not match problem {name}={pv}"
            )


def _lambda_raw(vals: np.ndarray, mesh: Mesh) -> np.ndarray:
    out = _avgy(_d2x(vals, mesh.h1)) + _avgx(_d2y(vals, mesh.h2))
    return _zero_frame(out)


def _memory_coefficients(lam: np.ndarray, n: int) -> np.ndarray:
    # coef[m] = lambda_{n+1-m} + lambda_{n-m}, the second term for m <= n-1
    coef = lam[1:n + 2][::-1].copy()
    if n >= 1:
        coef[:n] += lam[1:n + 1][::-1]
    return coef


def _rhs_raw(state: SolverState, problem: ProblemSpec) -> np.ndarray:
    mesh = state.mesh
    ws = state.workspace
    n = state.current_level
    u = state.u_current.values
    c = ws.c

    v = _avgy(u) + c * _d2y(u, mesh.h2)
    rhs = _avgx(v) + c * _d2x(v, mesh.h1)

    coef = _memory_coefficients(state.weights.lam, n)
    rhs += state.mu * np.tensordot(coef, state.history_lambda_u[: n + 1], axes=1)

    fsum = ws.f_at(n) + ws.f_at(n + 1)
    rhs += mesh.tau * ws.h_phi + 0.5 * mesh.tau * _avgx(_avgy(fsum))
    return rhs


def assemble_rhs(state: SolverState, problem: ProblemSpec, n: int) -> GridFn:
    """Right-hand side for the step n -> n+1, as a frame-zeroed field.

    Only the state's own level is assemblable: the term involving u^n needs
    the stored field, which the state keeps only for its current level.
    """
    if n != state.current_level:
        raise ValueError(
            f"state holds level {state.current_level}; cannot assemble for n={n}"
        )
    vals = _rhs_raw(state, problem)
    return GridFn(state.mesh, _zero_frame(vals))


def _finish_step(state: SolverState, vals: np.ndarray, rhs: np.ndarray,
                 t0: int) -> SolverState:
    n = state.current_level
    if not np.all(np.isfinite(vals)) or np.max(np.abs(vals)) > _DIVERGENCE_LIMIT:
        raise SolverDivergenceError(n + 1)
    mesh = state.mesh
    state.history_lambda_u[n + 1] = _lambda_raw(vals, mesh)
    state.u_current = GridFn(mesh, vals)
    state.current_level = n + 1
    rhs_int = rhs[1:-1, 1:-1]
    state.last_report = StepReport(
        level=n + 1,
        wall_time_ns=time.perf_counter_ns() - t0,
        rhs_norm=float(np.sqrt(mesh.h1 * mesh.h2 * np.sum(rhs_int * rhs_int))),
        solution_inf_norm=float(np.max(np.abs(vals[1:-1, 1:-1]))),
    )
    return state


def adi_step(state: SolverState, problem: ProblemSpec) -> SolverState:
    """Advance one level with the two tridiagonal sweeps (in place)."""
    t0 = time.perf_counter_ns()
    mesh = state.mesh
    n = state.current_level
    if n >= mesh.N:
        raise ValueError(f"state already at the final level {mesh.N}")
    ws = state.workspace
    c = ws.c

    rhs = _rhs_raw(state, problem)
    bvals = sample_xyt(problem.boundary, mesh, (n + 1) * mesh.tau)

    diag_y, off_y = sweep_coefficients(mesh.h2, c)
    _, off_x = sweep_coefficients(mesh.h1, c)

    # boundary traces of the intermediate unknown u* = (Hy - c d2y) u^{n+1}
    star_lo = diag_y * bvals[0, 1:-1] + off_y * (bvals[0, :-2] + bvals[0, 2:])
    star_hi = diag_y * bvals[-1, 1:-1] + off_y * (bvals[-1, :-2] + bvals[-1, 2:])

    r = rhs[1:-1, 1:-1].copy()
    r[0, :] -= off_x * star_lo
    r[-1, :] -= off_x * star_hi
    ustar = ws.sweep_x.solve(r)

    ustar[:, 0] -= off_y * bvals[1:-1, 0]
    ustar[:, -1] -= off_y * bvals[1:-1, -1]
    interior = ws.sweep_y.solve(ustar.T).T

    vals = bvals
    vals[1:-1, 1:-1] = interior
    return _finish_step(state, vals, rhs, t0)


class _DenseOracle:
    """LU factor of the unsplit operator on interior nodes, plus the
    boundary-coupling block."""

    def __init__(self, mesh: Mesh, c: float) -> None:
        m1, m2 = mesh.M1 + 1, mesh.M2 + 1
        hx, dx = _dense_1d(m1, mesh.h1)
        hy, dy = _dense_1d(m2, mesh.h2)
        full = (
            np.kron(hx, hy)
            - c * (np.kron(dx, hy) + np.kron(hx, dy))
            + c * c * np.kron(dx, dy)
        )
        mask = np.zeros((m1, m2), dtype=bool)
        mask[1:-1, 1:-1] = True
        flat = mask.ravel()
        self.interior_idx = np.nonzero(flat)[0]
        self.boundary_idx = np.nonzero(~flat)[0]
        rows = full[self.interior_idx]
        self.lu = lu_factor(rows[:, self.interior_idx])
        self.coupling = rows[:, self.boundary_idx]

    def solve(self, rhs_int: np.ndarray, bvals_flat: np.ndarray) -> np.ndarray:
        b = rhs_int - self.coupling @ bvals_flat[self.boundary_idx]
        return lu_solve(self.lu, b)


def _dense_1d(m: int, h: float) -> tuple[np.ndarray, np.ndarray]:
    # compact average (identity on boundary rows) and second difference
    avg = np.eye(m)
    d2 = np.zeros((m, m))
    for i in range(1, m - 1):
        avg[i, i - 1:i + 2] = (1.0 / 12.0, 10.0 / 12.0, 1.0 / 12.0)
        d2[i, i - 1:i + 2] = np.array((1.0, -2.0, 1.0)) / h**2
    return avg, d2


def direct_step(state: SolverState, problem: ProblemSpec) -> SolverState:
    """Advance one level by dense-solving the unsplit system (in place).

    Mathematically identical to ``adi_step``; exists to cross-check the
    splitting on small grids.  Refuses grids beyond options.dense_cap.
    """
    t0 = time.perf_counter_ns()
    mesh = state.mesh
    n = state.current_level
    if n >= mesh.N:
        raise ValueError(f"state already at the final level {mesh.N}")
    ws = state.workspace
    cap = ws.options.dense_cap
    if max(mesh.M1, mesh.M2) > cap:
        raise ValueError(
            f"grid {mesh.M1}x{mesh.M2} exceeds dense_cap={cap}; "
            "the direct path is a small-grid reference only"
        )
    if ws.dense is None:
        ws.dense = _DenseOracle(mesh, ws.c)

    rhs = _rhs_raw(state, problem)
    bvals = sample_xyt(problem.boundary, mesh, (n + 1) * mesh.tau)
    interior = ws.dense.solve(rhs[1:-1, 1:-1].ravel(), bvals.ravel())

    vals = bvals
    vals[1:-1, 1:-1] = interior.reshape(mesh.M1 - 1, mesh.M2 - 1)
    return _finish_step(state, vals, rhs, t0)


# ---------------------------------------------------------------------------
# the two algebraic forms of the step operator, for equivalence checks

def split_product_apply(u: GridFn, c: float, sign: int = -1) -> GridFn:
    """(Hx + sign*c*d2x)(Hy + sign*c*d2y) u, frame zeroed."""
    mesh = u.mesh
    v = _avgy(u.values) + sign * c * _d2y(u.values, mesh.h2)
    out = _avgx(v) + sign * c * _d2x(v, mesh.h1)
    return GridFn(mesh, _zero_frame(out))


def unsplit_product_apply(u: GridFn, c: float, sign: int = -1) -> GridFn:
    """H u + sign*c*L u + c^2 d2x d2y u, frame zeroed.

    Expanding the split product shows the two forms agree identically; in
    floating point they differ only by rounding.
    """
    out = (
        compact_h(u).values
        + sign * c * lambda_op(u).values
        + c * c * delta2x_delta2y(u).values
    )
    return GridFn(u.mesh, _zero_frame(out))


# ---------------------------------------------------------------------------
# full solve loop

@dataclass
class SolveResult:
    problem: ProblemSpec
    mesh: Mesh
    final: GridFn
    e_inf: float | None
    final_error: float | None
    reports: list[StepReport]
    snapshots: dict[int, GridFn]
    state: SolverState


_STEPPERS: dict[str, Callable] = {"adi": adi_step, "direct": direct_step}


def solve(problem: ProblemSpec, mesh: Mesh,
          options: SolverOptions | None = None) -> SolveResult:
    """Run the scheme from level 0 to N and gather errors and snapshots.

    When the problem carries an exact solution, ``e_inf`` is the largest
    interior max-norm error over all levels 1..N and ``final_error`` the
    error at the last level.
    """
    options = options or SolverOptions()
    stepper = _STEPPERS[options.method]
    state = init_state(problem, mesh, options)

    reports: list[StepReport] = []
    snapshots: dict[int, GridFn] = {}
    every = options.snapshot_every
    if every is not None:
        snapshots[0] = state.u_current

    e_inf: float | None = None
    final_error: float | None = None
    track_error = problem.exact is not None
    if track_error:
        e_inf = 0.0

    for n in range(mesh.N):
        stepper(state, problem)
        if options.collect_reports and state.last_report is not None:
            reports.append(state.last_report)
        level = state.current_level
        if every is not None and (level % every == 0 or level == mesh.N):
            snapshots[level] = state.u_current
        if track_error:
            exact_vals = sample_xyt(problem.exact, mesh, level * mesh.tau)
            err = float(np.max(np.abs(
                state.u_current.interior - exact_vals[1:-1, 1:-1]
            )))
            e_inf = max(e_inf, err)
            final_error = err

    return SolveResult(
        problem=problem,
        mesh=mesh,
        final=state.u_current,
        e_inf=e_inf,
        final_error=final_error,
        reports=reports,
        snapshots=snapshots,
        state=state,
    )
