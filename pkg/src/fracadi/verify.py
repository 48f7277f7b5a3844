"""Self-verification suite: every analytic property the scheme relies on,
checked numerically with explicit tolerances.

Each check returns a CheckResult and can be run standalone with custom
parameters; ``run_checks`` bundles them into a quick smoke level and a full
level whose parameters match the package's acceptance gates.  The frozen
reference errors below were produced by the convergence ladders of this
scheme on the built-in benchmark (five significant digits); the scripts in
scripts/ regenerate them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.linalg import toeplitz
from scipy.special import gammaln

from .adisolver import SolverOptions, adi_step, init_state, solve
from .fracweights import grunwald_weights, scheme_weights, wsgd_integral
from .meshops import (
    GridFn,
    Mesh,
    _avgx,
    _avgy,
    compact_h,
    delta2_x,
    delta2_y,
    delta2x_delta2y,
    grad_x,
    grad_y,
    inner,
    lambda_op,
    norm_grad_xy,
    norm_l2,
)
from .adisolver import split_product_apply, unsplit_product_apply
from .problems import ProblemSpec, make_example1, make_random_problem, _zero_xy
from .studies import StudyConfig, run_study

# Reference E_inf values for the built-in benchmark, frozen at five
# significant digits.  Temporal ladder: N = 5..80 at fixed 16x16 cells.
# Spatial ladder: M = 4..16 cells per axis at fixed N = 10000, alpha = 0.1.
TEMPORAL_LADDER = (5, 10, 20, 40, 80)
TEMPORAL_M = 16
TEMPORAL_REFERENCE = {
    0.25: (6.9507e-3, 1.7717e-3, 4.4606e-4, 1.1292e-4, 2.8847e-5),
    0.50: (1.0421e-2, 2.6014e-3, 6.5195e-4, 1.6294e-4, 4.1060e-5),
    0.75: (1.7341e-2, 4.3653e-3, 1.0899e-3, 2.7235e-4, 6.8480e-5),
}
SPATIAL_LADDER = (4, 8, 16)
SPATIAL_N = 10000
SPATIAL_ALPHA = 0.1
SPATIAL_REFERENCE = (5.0651e-4, 3.1111e-5, 1.9371e-6)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] {self.name}: {self.detail}"


# ---------------------------------------------------------------------------

def check_weights_oracle(
    alphas: Sequence[float] = (0.1, 0.25, 0.5, 0.75, 0.9),
    kmax: int = 1000,
    tol_floor: float = 1e-12,
) -> CheckResult:
    """Recurrence weights against the log-gamma closed form, plus positivity.

    The closed form exp(lgamma(k+a) - lgamma(a) - lgamma(k+1)) loses about
    eps * |lgamma| of relative accuracy because the individual terms are
    huge while their sum is small, so the pointwise tolerance grows with
    the log-gamma magnitudes; any real defect in the recurrence would blow
    past it by many orders.
    """
    eps = np.finfo(float).eps
    worst_ratio = 0.0
    min_lam = math.inf
    for a in alphas:
        w = grunwald_weights(a, kmax)
        k = np.arange(kmax + 1)
        terms = (gammaln(k + a), np.full(kmax + 1, gammaln(a)),
                 gammaln(k + 1.0))
        ref = np.exp(terms[0] - terms[1] - terms[2])
        bound = np.maximum(tol_floor,
                           8.0 * eps * sum(np.abs(t) for t in terms))
        worst_ratio = max(worst_ratio,
                          float(np.max(np.abs(w - ref) / ref / bound)))
        min_lam = min(min_lam, float(np.min(scheme_weights(a, kmax).lam)))
    passed = worst_ratio <= 1.0 and min_lam > 0.0
    return CheckResult(
        "weights-oracle", passed,
        f"max err/tolerance {worst_ratio:.3f} (<= 1), min lambda {min_lam:.3e}",
    )


def check_lambda_form(
    alphas: Sequence[float] = (0.1, 0.3, 0.5, 0.7, 0.9),
    vectors: int = 10000,
    max_len: int = 50,
    seed: int = 12345,
    form_floor: float = -1e-12,
    eig_len: int = 30,
    eig_floor: float = -1e-10,
) -> CheckResult:
    """Nonnegativity of the lambda convolution quadratic form.

    For the lower-triangular Toeplitz matrix T with T[i, j] = lambda_{i-j},
    the form v.(T v) must be nonnegative for every real v; this is the
    discrete coercivity that drives the stability proof.  The symmetrized
    part's smallest eigenvalue is checked as well.
    """
    min_ratio = math.inf
    min_eig = math.inf
    for a in alphas:
        lam = scheme_weights(a, max_len).lam
        tmat = toeplitz(lam, np.r_[lam[0], np.zeros(max_len)])
        rng = np.random.default_rng(seed)
        for _ in range(vectors):
            size = int(rng.integers(1, max_len + 2))
            v = rng.standard_normal(size)
            form = float(v @ (tmat[:size, :size] @ v))
            min_ratio = min(min_ratio, form / float(v @ v))
        tsym = 0.5 * (tmat[: eig_len + 1, : eig_len + 1]
                      + tmat[: eig_len + 1, : eig_len + 1].T)
        min_eig = min(min_eig, float(np.linalg.eigvalsh(tsym)[0]))
    passed = min_ratio >= form_floor and min_eig >= eig_floor
    return CheckResult(
        "memory-form-positivity", passed,
        f"min form ratio {min_ratio:.3e} (floor {form_floor:.0e}), "
        f"min sym eig {min_eig:.3e} (floor {eig_floor:.0e})",
    )


def check_wsgd_order(
    alphas: Sequence[float] = (0.25, 0.5, 0.75),
    ns: Sequence[int] = (40, 80, 160),
    order_window: tuple[float, float] = (1.9, 2.1),
    abs_tol: float = 1e-3,
) -> CheckResult:
    """Second-order accuracy of the discrete fractional integral on f = t**3."""
    lo, hi = order_window
    passed = True
    details = []
    for a in alphas:
        scale = math.gamma(4.0) / math.gamma(4.0 + a)
        errs = []
        for n in ns:
            tau = 1.0 / n
            t = np.arange(n + 1) * tau
            approx = wsgd_integral(t**3, a, tau)
            errs.append(float(np.max(np.abs(approx - scale * t ** (3.0 + a)))))
        orders = [math.log2(errs[i - 1] / errs[i]) for i in range(1, len(errs))]
        ok = all(lo <= o <= hi for o in orders) and errs[-1] <= abs_tol
        passed = passed and ok
        details.append(f"a={a}: orders {['%.3f' % o for o in orders]}, "
                       f"err {errs[-1]:.2e}")
    return CheckResult("wsgd-order", passed, "; ".join(details))


# ---------------------------------------------------------------------------

_IDENTITY_MESHES = (
    Mesh(1.0, 1.0, 8, 8, 1.0, 1),
    Mesh(1.5, 1.0, 12, 10, 1.0, 1),
    Mesh(2.0, 3.0, 9, 13, 1.0, 1),
)


def _random_zero_boundary(mesh: Mesh, rng: np.random.Generator) -> GridFn:
    vals = np.zeros(mesh.shape)
    vals[1:-1, 1:-1] = rng.standard_normal((mesh.M1 - 1, mesh.M2 - 1))
    return GridFn(mesh, vals)


def _rel(a: float, b: float) -> float:
    return abs(a - b) / max(abs(a), abs(b), 1e-30)


def check_operator_identities(
    count: int = 100,
    seed: int = 777,
    rel_tol: float = 1e-12,
) -> CheckResult:
    """Summation-by-parts and positivity identities on random fields.

    For zero-boundary u, v:
      <d2x u, v> = -sum of x-flux products      (and the y analogue)
      ||dx u||^2 <= (4 / h1^2) ||u||^2
      <H u, u>  >= ||u||^2 / 3
      <d2x d2y u, u> = ||dx dy u||^2
      <L u, u>  <= 0
    """
    rng = np.random.default_rng(seed)
    worst = 0.0
    ok = True
    for i in range(count):
        mesh = _IDENTITY_MESHES[i % len(_IDENTITY_MESHES)]
        u = _random_zero_boundary(mesh, rng)
        v = _random_zero_boundary(mesh, rng)
        hh = mesh.h1 * mesh.h2

        lhs = inner(delta2_x(u), v)
        rhs = -hh * float(np.sum(grad_x(u)[:, 1:-1] * grad_x(v)[:, 1:-1]))
        worst = max(worst, _rel(lhs, rhs))

        lhs = inner(delta2_y(u), v)
        rhs = -hh * float(np.sum(grad_y(u)[1:-1, :] * grad_y(v)[1:-1, :]))
        worst = max(worst, _rel(lhs, rhs))

        nsq = norm_l2(u) ** 2
        gx = hh * float(np.sum(grad_x(u)[:, 1:-1] ** 2))
        ok = ok and gx <= (4.0 / mesh.h1**2) * nsq * (1.0 + 1e-12)
        ok = ok and inner(compact_h(u), u) >= nsq / 3.0 * (1.0 - 1e-12)

        lhs = inner(delta2x_delta2y(u), u)
        rhs = norm_grad_xy(u) ** 2
        worst = max(worst, _rel(lhs, rhs))

        ok = ok and inner(lambda_op(u), u) <= rel_tol * nsq

    passed = ok and worst <= rel_tol
    return CheckResult(
        "operator-identities", passed,
        f"worst rel dev {worst:.3e} (tol {rel_tol:.0e}), bounds {'ok' if ok else 'violated'}",
    )


def check_factorization(
    count: int = 50,
    seed: int = 778,
    tol: float = 1e-13,
) -> CheckResult:
    """Split product of 1-D factors equals its expanded form, both signs.

    Exercised on fields with nonzero boundary values too, since the solver
    applies the expanded form to fields carrying Dirichlet data.
    """
    rng = np.random.default_rng(seed)
    worst = 0.0
    for i in range(count):
        mesh = _IDENTITY_MESHES[i % len(_IDENTITY_MESHES)]
        if i % 2 == 0:
            u = _random_zero_boundary(mesh, rng)
        else:
            u = GridFn(mesh, rng.standard_normal(mesh.shape))
        for c in (0.0, mesh.h1**2 / 12.0, 0.3):
            for sign in (-1, 1):
                a = split_product_apply(u, c, sign).values
                b = unsplit_product_apply(u, c, sign).values
                scale = max(1.0, float(np.max(np.abs(a))))
                worst = max(worst, float(np.max(np.abs(a - b))) / scale)
    return CheckResult(
        "factorization-identity", worst <= tol,
        f"worst rel dev {worst:.3e} (tol {tol:.0e})",
    )


# ---------------------------------------------------------------------------

def equivalence_problem(alpha: float) -> ProblemSpec:
    """A problem with nonzero boundary data, drift and forcing, no exact
    solution; exists to make the splitting work hard."""

    def boundary(x, y, t):
        return np.sin(x + 0.3 * y) * np.sin(1.7 * t) * (1.0 + 0.2 * np.cos(y))

    def phi(x, y):
        return np.cos(2.0 * x) * np.sin(y + 0.1)

    def forcing(x, y, t):
        return np.cos(x - 0.5 * y + t) * (0.4 + 0.3 * t)

    return ProblemSpec(
        name="equivalence-probe",
        alpha=alpha,
        domain=(1.3, 1.0),
        T=0.8,
        phi=phi,
        psi=_zero_xy,
        boundary=boundary,
        forcing_f=forcing,
        psi_laplacian=_zero_xy,
    )


def check_adi_direct(
    alphas: Sequence[float] = (0.1, 0.5, 0.9),
    grids: Sequence[tuple[int, int]] = ((6, 6), (8, 10), (12, 12)),
    ns: Sequence[int] = (4, 8),
    tol: float = 1e-11,
) -> CheckResult:
    """Split sweeps against the dense unsplit solve, level by level."""
    worst = 0.0
    for a in alphas:
        problem = equivalence_problem(a)
        for (m1, m2) in grids:
            for n in ns:
                mesh = Mesh(problem.L1, problem.L2, m1, m2, problem.T, n)
                r_adi = solve(problem, mesh,
                              SolverOptions(method="adi", collect_reports=False))
                r_dir = solve(problem, mesh,
                              SolverOptions(method="direct", collect_reports=False))
                diff = float(np.max(np.abs(
                    r_adi.final.values - r_dir.final.values
                )))
                worst = max(worst, diff)
    return CheckResult(
        "splitting-equivalence", worst <= tol,
        f"max |adi - direct| {worst:.3e} (tol {tol:.0e})",
    )


def check_stability(
    seeds: Iterable[int] = range(20),
    m: int = 10,
    n: int = 64,
    data_factor: float = 10.0,
) -> CheckResult:
    """Solution norms against the a-priori energy envelope.

    The envelope is exp(6T) * (12 ||u0||^2 + 25 tau sum_k ||L u0 + H phi
    + H f^{k+1/2}||^2) with f^{k+1/2} taken as the average of adjacent
    levels; on top of that the norm must stay below ``data_factor`` times
    ||phi|| + max_k ||f^k||.
    """
    worst_env = 0.0
    worst_data = 0.0
    for seed in seeds:
        problem = make_random_problem(seed)
        mesh = Mesh(1.0, 1.0, m, m, 1.0, n)
        state = init_state(problem, mesh,
                           SolverOptions(collect_reports=False))
        ws = state.workspace
        hh = mesh.h1 * mesh.h2

        def l2(vals):
            v = vals[1:-1, 1:-1]
            return math.sqrt(hh * float(np.sum(v * v)))

        hf = [_avgx(_avgy(ws.f_at(k))) for k in range(n + 1)]
        data_norm = l2(_phi_vals(problem, mesh))
        data_norm += max(l2(ws.f_at(k)) for k in range(n + 1))

        env_sum = 0.0
        growth = math.exp(6.0 * mesh.T)
        for k in range(n):
            term = ws.h_phi + 0.5 * (hf[k] + hf[k + 1])
            env_sum += l2(term) ** 2
            adi_step(state, problem)
            un = l2(state.u_current.values)
            bound = math.sqrt(growth * 25.0 * mesh.tau * env_sum)
            worst_env = max(worst_env, un / bound if bound > 0 else math.inf)
            worst_data = max(worst_data, un / data_norm)
    passed = worst_env <= 1.0 + 1e-9 and worst_data <= data_factor
    return CheckResult(
        "stability-envelope", passed,
        f"max norm/envelope {worst_env:.3f} (<= 1), "
        f"max norm/data {worst_data:.3f} (<= {data_factor:g})",
    )


def _phi_vals(problem: ProblemSpec, mesh: Mesh) -> np.ndarray:
    from .problems import sample_xy
    return sample_xy(problem.phi, mesh)


def check_manufactured(
    alphas: Sequence[float] = (0.1, 0.3, 0.5, 0.7, 0.9),
    samples: int = 20,
    panels: int = 2500,
    tol: float = 1e-6,
) -> CheckResult:
    """Residual of the built-in exact solution in the integral equation."""
    from .problems import verify_manufactured

    worst = 0.0
    for i, a in enumerate(alphas):
        rep = verify_manufactured(make_example1(a), samples,
                                  panels=panels, seed=100 + i)
        worst = max(worst, rep.max_residual)
    return CheckResult(
        "manufactured-residual", worst <= tol,
        f"max residual {worst:.3e} (tol {tol:.0e})",
    )


# ---------------------------------------------------------------------------

def _ladder_errors(alphas, axis, ladder, fixed):
    cfg = StudyConfig(alphas=tuple(alphas), axis=axis, ladder=tuple(ladder),
                      fixed=fixed, emit=())
    rows = run_study(cfg).rows
    per_alpha: dict[float, list] = {}
    for row in rows:
        per_alpha.setdefault(row.alpha, []).append(row)
    return per_alpha


def check_temporal_reference(
    alphas: Sequence[float] = (0.25, 0.5, 0.75),
    ladder: Sequence[int] = TEMPORAL_LADDER,
    m: int = TEMPORAL_M,
    rel_tol: float = 0.01,
    rate_window: tuple[float, float] = (1.93, 2.07),
) -> CheckResult:
    """Temporal ladder errors against the frozen references, plus rates."""
    per_alpha = _ladder_errors(alphas, "temporal", ladder, m)
    lo, hi = rate_window
    worst_rel = 0.0
    rates_ok = True
    for a, rows in per_alpha.items():
        ref = TEMPORAL_REFERENCE[a][: len(rows)]
        for row, r in zip(rows, ref):
            worst_rel = max(worst_rel, abs(row.e_inf - r) / r)
        for row in rows[1:]:
            rates_ok = rates_ok and lo <= row.rate <= hi
    passed = worst_rel <= rel_tol and rates_ok
    return CheckResult(
        "temporal-convergence", passed,
        f"worst rel dev {worst_rel:.3e} (tol {rel_tol:g}), "
        f"rates {'in' if rates_ok else 'outside'} [{lo}, {hi}]",
    )


def check_spatial_reference(
    ladder: Sequence[int] = SPATIAL_LADDER,
    n: int = SPATIAL_N,
    rel_tol: float = 0.02,
    rate_window: tuple[float, float] = (3.9, 4.1),
) -> CheckResult:
    """Spatial ladder errors against the frozen references, plus rates."""
    per_alpha = _ladder_errors((SPATIAL_ALPHA,), "spatial", ladder, n)
    rows = per_alpha[SPATIAL_ALPHA]
    lo, hi = rate_window
    worst_rel = 0.0
    for row, r in zip(rows, SPATIAL_REFERENCE[: len(rows)]):
        worst_rel = max(worst_rel, abs(row.e_inf - r) / r)
    rates_ok = all(lo <= row.rate <= hi for row in rows[1:])
    passed = worst_rel <= rel_tol and rates_ok
    return CheckResult(
        "spatial-convergence", passed,
        f"worst rel dev {worst_rel:.3e} (tol {rel_tol:g}), "
        f"rates {'in' if rates_ok else 'outside'} [{lo}, {hi}]",
    )


# ---------------------------------------------------------------------------

def run_checks(level: str = "quick") -> list[CheckResult]:
    """Run the whole suite; "quick" trims sample counts and ladder depth."""
    if level == "quick":
        return [
            check_weights_oracle(),
            check_lambda_form(vectors=1000),
            check_wsgd_order(),
            check_operator_identities(count=30),
            check_factorization(count=20),
            check_adi_direct(grids=((6, 6), (8, 10)), ns=(4,)),
            check_stability(seeds=range(5)),
            check_manufactured(alphas=(0.5,), samples=8, panels=1500),
            check_temporal_reference(alphas=(0.5,), ladder=(5, 10, 20)),
            check_spatial_reference(ladder=(4, 8), n=2500, rel_tol=0.05,
                                    rate_window=(3.8, 4.2)),
        ]
    if level == "full":
        return [
            check_weights_oracle(),
            check_lambda_form(),
            check_wsgd_order(),
            check_operator_identities(),
            check_factorization(),
            check_adi_direct(),
            check_stability(),
            check_manufactured(),
            check_temporal_reference(),
            check_spatial_reference(),
        ]
    raise ValueError(f"unknown check level {level!r}; use quick or full")


def format_results(results: Sequence[CheckResult]) -> str:
    return "\n".join(r.line() for r in results) + "\n"
