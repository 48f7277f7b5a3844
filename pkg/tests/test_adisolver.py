import math

import numpy as np
import pytest

from fracadi import (
    GridFn,
    Mesh,
    SolverDivergenceError,
    SolverOptions,
    adi_step,
    assemble_rhs,
    compact_h,
    direct_step,
    init_state,
    lambda_op,
    make_example1,
    mesh_for,
    sample_xy,
    sample_xyt,
    solve,
    split_product_apply,
    unsplit_product_apply,
)
from fracadi.problems import ProblemSpec, _zero_xy, _zero_xyt
from fracadi.verify import equivalence_problem


def _mesh(problem, m1, m2, n):
    return Mesh(problem.L1, problem.L2, m1, m2, problem.T, n)


class TestInitState:
    def test_initial_contents(self):
        p = make_example1(0.5)
        mesh = mesh_for(p, 6, n=4)
        state = init_state(p, mesh)
        assert state.current_level == 0
        assert np.all(state.u_current.values == 0.0)
        assert state.history_lambda_u.shape == (5, 7, 7)
        assert np.all(state.history_lambda_u == 0.0)
        assert len(state.weights.lam) == mesh.N + 2
        assert state.mu == pytest.approx(mesh.tau ** 1.5 / 2.0)

    def test_nonzero_psi_rejected(self):
        p = make_example1(0.5)
        bad = ProblemSpec(
            name="bad", alpha=0.5, domain=p.domain, T=p.T, phi=p.phi,
            psi=lambda x, y: np.sin(x) * np.sin(y),
            boundary=_zero_xyt, forcing_f=p.forcing_f,
        )
        with pytest.raises(ValueError, match="homogenize"):
            init_state(bad, mesh_for(bad, 6, n=2))

    def test_mesh_problem_mismatch(self):
        p = make_example1(0.5)
        with pytest.raises(ValueError, match="match"):
            init_state(p, Mesh(1.0, 1.0, 6, 6, 1.0, 2))

    def test_wsgd_needs_caputo(self):
        p = make_example1(0.5)
        stripped = ProblemSpec(
            name="s", alpha=0.5, domain=p.domain, T=p.T, phi=p.phi,
            psi=p.psi, boundary=p.boundary, forcing_f=p.forcing_f,
        )
        with pytest.raises(ValueError, match="caputo"):
            init_state(stripped, mesh_for(p, 6, n=2),
                       SolverOptions(wsgd_forcing=True))


class TestStepping:
    def test_boundary_values_exact(self):
        p = equivalence_problem(0.5)
        mesh = _mesh(p, 7, 9, 4)
        state = init_state(p, mesh)
        for _ in range(3):
            adi_step(state, p)
        t = state.current_level * mesh.tau
        bvals = sample_xyt(p.boundary, mesh, t)
        u = state.u_current.values
        assert np.array_equal(u[0, :], bvals[0, :])
        assert np.array_equal(u[-1, :], bvals[-1, :])
        assert np.array_equal(u[:, 0], bvals[:, 0])
        assert np.array_equal(u[:, -1], bvals[:, -1])

    def test_history_matches_operator(self):
        p = equivalence_problem(0.3)
        mesh = _mesh(p, 8, 7, 5)
        state = init_state(p, mesh)
        fields = [state.u_current]
        for _ in range(4):
            adi_step(state, p)
            fields.append(state.u_current)
        for k, u in enumerate(fields):
            assert np.array_equal(state.history_lambda_u[k],
                                  lambda_op(u).values)

    def test_rhs_from_scratch_recomputation(self):
        p = equivalence_problem(0.3)
        mesh = _mesh(p, 8, 7, 5)
        state = init_state(p, mesh)
        fields = [state.u_current]
        for _ in range(3):
            adi_step(state, p)
            fields.append(state.u_current)
        n = state.current_level
        assert n == 3
        got = assemble_rhs(state, p, n).values

        # independent reassembly from the stored levels
        c = state.mu * state.weights.lam[0]
        lam = state.weights.lam
        ref = split_product_apply(fields[n], c, sign=+1).values.copy()
        for m in range(n + 1):
            coef = lam[n + 1 - m] + (lam[n - m] if m <= n - 1 else 0.0)
            ref += state.mu * coef * lambda_op(fields[m]).values
        phi_grid = GridFn(mesh, sample_xy(p.phi, mesh))
        ref += mesh.tau * compact_h(phi_grid).values
        fsum = sample_xyt(p.forcing_f, mesh, n * mesh.tau) \
            + sample_xyt(p.forcing_f, mesh, (n + 1) * mesh.tau)
        ref += 0.5 * mesh.tau * compact_h(GridFn(mesh, fsum)).values
        ref[0, :] = ref[-1, :] = 0.0
        ref[:, 0] = ref[:, -1] = 0.0
        scale = np.max(np.abs(ref))
        assert np.max(np.abs(got - ref)) <= 1e-13 * max(1.0, scale)

    def test_rhs_wrong_level_rejected(self):
        p = make_example1(0.5)
        state = init_state(p, mesh_for(p, 6, n=4))
        adi_step(state, p)
        with pytest.raises(ValueError, match="level"):
            assemble_rhs(state, p, 0)

    def test_step_past_end_rejected(self):
        p = make_example1(0.5)
        state = init_state(p, mesh_for(p, 6, n=1))
        adi_step(state, p)
        with pytest.raises(ValueError, match="final"):
            adi_step(state, p)

    def test_adi_equals_direct(self):
        p = equivalence_problem(0.5)
        mesh = _mesh(p, 8, 10, 4)
        r1 = solve(p, mesh, SolverOptions(method="adi"))
        r2 = solve(p, mesh, SolverOptions(method="direct"))
        assert np.max(np.abs(r1.final.values - r2.final.values)) < 1e-12

    def test_direct_cap(self):
        p = make_example1(0.5)
        mesh = mesh_for(p, 40, n=2)
        state = init_state(p, mesh, SolverOptions(method="direct"))
        with pytest.raises(ValueError, match="dense_cap"):
            direct_step(state, p)

    def test_divergence_detected(self):
        p = make_example1(0.5)
        huge = ProblemSpec(
            name="huge", alpha=0.5, domain=p.domain, T=p.T, phi=p.phi,
            psi=p.psi, boundary=p.boundary,
            forcing_f=lambda x, y, t: 1e308 + 0.0 * x * y,
        )
        with np.errstate(over="ignore"), pytest.raises(SolverDivergenceError) as info:
            solve(huge, mesh_for(p, 6, n=4))
        assert info.value.level >= 1


class TestProductForms:
    def test_split_equals_unsplit(self, rng):
        mesh = Mesh(1.2, 0.9, 9, 11, 1.0, 1)
        u = GridFn(mesh, rng.standard_normal(mesh.shape))
        for c in (0.0, 1e-3, 0.2):
            for sign in (-1, 1):
                a = split_product_apply(u, c, sign).values
                b = unsplit_product_apply(u, c, sign).values
                scale = max(1.0, np.max(np.abs(a)))
                assert np.max(np.abs(a - b)) < 1e-13 * scale


class TestSolve:
    def test_benchmark_error_small_run(self):
        # frozen reference for the temporal ladder entry N=10 at 16 cells
        p = make_example1(0.5)
        res = solve(p, mesh_for(p, 16, n=10))
        assert res.e_inf == pytest.approx(2.6014e-3, rel=1e-4)
        assert res.final_error <= res.e_inf

    def test_deterministic(self):
        p = equivalence_problem(0.7)
        mesh = _mesh(p, 8, 8, 6)
        r1 = solve(p, mesh)
        r2 = solve(p, mesh)
        assert np.array_equal(r1.final.values, r2.final.values)
        assert [a.rhs_norm for a in r1.reports] == [a.rhs_norm
                                                    for a in r2.reports]

    def test_reports(self):
        p = make_example1(0.5)
        res = solve(p, mesh_for(p, 6, n=5))
        assert [r.level for r in res.reports] == [1, 2, 3, 4, 5]
        assert all(r.wall_time_ns > 0 for r in res.reports)
        assert all(np.isfinite(r.rhs_norm) for r in res.reports)

    def test_no_reports_when_disabled(self):
        p = make_example1(0.5)
        res = solve(p, mesh_for(p, 6, n=5),
                    SolverOptions(collect_reports=False))
        assert res.reports == []

    def test_snapshots(self):
        p = make_example1(0.5)
        res = solve(p, mesh_for(p, 6, n=6), SolverOptions(snapshot_every=2))
        assert sorted(res.snapshots) == [0, 2, 4, 6]
        res = solve(p, mesh_for(p, 6, n=5), SolverOptions(snapshot_every=2))
        assert sorted(res.snapshots) == [0, 2, 4, 5]

    def test_solution_matches_exact_profile(self):
        # solution at the final time is close to the separable exact profile
        p = make_example1(0.5)
        mesh = mesh_for(p, 12, n=40)
        res = solve(p, mesh)
        exact_vals = sample_xyt(p.exact, mesh, 1.0)
        assert np.max(np.abs(res.final.values - exact_vals)) < 5e-4

    def test_wsgd_forcing_second_order_against_analytic(self):
        # replacing the analytic forcing with its discrete-integral
        # approximation perturbs the solution by O(tau^2)
        p = make_example1(0.5)
        diffs = []
        for n in (20, 40, 80):
            mesh = mesh_for(p, 8, n=n)
            r_analytic = solve(p, mesh)
            r_wsgd = solve(p, mesh, SolverOptions(wsgd_forcing=True))
            diffs.append(float(np.max(np.abs(
                r_wsgd.final.values - r_analytic.final.values))))
        for prev, cur in zip(diffs, diffs[1:]):
            assert 3.5 < prev / cur < 4.5

    def test_memory_cost_grows_at_most_linearly(self):
        p = make_example1(0.5)
        res = solve(p, mesh_for(p, 4, n=3000))
        times = np.array([r.wall_time_ns for r in res.reports], dtype=float)
        first = np.mean(times[100:1400])
        last = np.mean(times[1600:2900])
        # O(n) history work allows ~2-3x growth; quadratic would give >>10x
        assert last / first < 8.0

    def test_options_validation(self):
        with pytest.raises(ValueError):
            SolverOptions(method="magic")
        with pytest.raises(ValueError):
            SolverOptions(snapshot_every=0)
