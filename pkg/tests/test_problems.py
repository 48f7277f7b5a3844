import json
import math

import numpy as np
import pytest

from fracadi import (
    Mesh,
    ProblemSpec,
    compile_expression,
    get_problem,
    homogenize_initial,
    load_problem,
    make_example1,
    make_random_problem,
    mesh_for,
    rl_integral_oracle,
    sample_xy,
    sample_xyt,
    verify_manufactured,
)
from fracadi.problems import _zero_xy, _zero_xyt


class TestExample1:
    def test_point_values(self):
        p = make_example1(0.5)
        x = y = math.pi / 2.0
        assert float(p.exact(x, y, 1.0)) == pytest.approx(1.0)
        # forcing at the center peak, t = 1
        expect = 3.5 + 2.0 * math.gamma(4.5) / math.gamma(5.0)
        assert float(p.forcing_f(x, y, 1.0)) == pytest.approx(expect)
        assert float(p.forcing_f(x, y, 1.0)) == pytest.approx(4.46931, abs=5e-6)

    def test_zero_data(self):
        p = make_example1(0.3)
        assert float(p.psi(0.5, 0.5)) == 0.0
        assert float(p.phi(0.5, 0.5)) == 0.0
        assert float(p.boundary(0.0, 1.0, 0.7)) == 0.0

    def test_transformed_forcing_is_integral_of_caputo_source(self):
        # f must equal the order-alpha integral of g at any point
        for a in (0.25, 0.8):
            p = make_example1(a)
            x, y = 1.1, 0.7
            for t in (0.4, 1.0):
                ref = rl_integral_oracle(
                    lambda s: p.caputo_forcing(x, y, s), a, t, panels=1500)
                assert float(p.forcing_f(x, y, t)) == pytest.approx(
                    ref, rel=1e-11)

    def test_derivative_callables_match_finite_differences(self):
        p = make_example1(0.6)
        x, y, t = 0.9, 1.3, 0.8
        k = 1e-5
        fd_dt = (p.exact(x, y, t + k) - p.exact(x, y, t - k)) / (2 * k)
        assert float(p.exact_dt(x, y, t)) == pytest.approx(float(fd_dt), rel=1e-8)
        fd_lap = (
            p.exact(x + k, y, t) - 2 * p.exact(x, y, t) + p.exact(x - k, y, t)
        ) / k**2 + (
            p.exact(x, y + k, t) - 2 * p.exact(x, y, t) + p.exact(x, y - k, t)
        ) / k**2
        assert float(p.exact_laplacian(x, y, t)) == pytest.approx(
            float(fd_lap), rel=1e-5)

    def test_alpha_validation(self):
        with pytest.raises(ValueError):
            make_example1(1.0)


class TestProblemSpecValidation:
    def test_incompatible_boundary_rejected(self):
        with pytest.raises(ValueError, match="disagrees"):
            ProblemSpec(
                name="bad", alpha=0.5, domain=(1.0, 1.0), T=1.0,
                phi=_zero_xy, psi=_zero_xy,
                boundary=lambda x, y, t: 1.0 + 0.0 * x,
                forcing_f=_zero_xyt,
            )

    def test_missing_forcing_rejected(self):
        with pytest.raises(ValueError, match="forcing"):
            ProblemSpec(
                name="bad", alpha=0.5, domain=(1.0, 1.0), T=1.0,
                phi=_zero_xy, psi=_zero_xy, boundary=_zero_xyt,
            )

    @pytest.mark.parametrize("kwargs", [
        dict(alpha=0.0), dict(alpha=1.5), dict(domain=(0.0, 1.0)),
        dict(domain=(1.0,)), dict(T=-1.0),
    ])
    def test_scalar_validation(self, kwargs):
        base = dict(name="p", alpha=0.5, domain=(1.0, 1.0), T=1.0,
                    phi=_zero_xy, psi=_zero_xy, boundary=_zero_xyt,
                    forcing_f=_zero_xyt)
        base.update(kwargs)
        with pytest.raises(ValueError):
            ProblemSpec(**base)


class TestSampling:
    def test_scalar_broadcast(self):
        mesh = Mesh(1.0, 1.0, 4, 4, 1.0, 1)
        vals = sample_xy(lambda x, y: 2.5, mesh)
        assert vals.shape == mesh.shape
        assert np.all(vals == 2.5)
        assert vals.flags.writeable

    def test_grid_placement(self):
        mesh = Mesh(1.0, 2.0, 2, 4, 1.0, 1)
        vals = sample_xyt(lambda x, y, t: x + 10 * y + 100 * t, mesh, 0.5)
        assert vals[1, 2] == pytest.approx(0.5 + 10 * 1.0 + 50.0)


def _shifted_problem(alpha):
    """Exact solution sin(x) sin(y) (t**(alpha+3) + 1): the benchmark plus a
    time-independent displacement."""
    base = make_example1(alpha)
    inv_gamma = 1.0 / math.gamma(1.0 + alpha)

    def psi(x, y):
        return np.sin(x) * np.sin(y)

    def psi_lap(x, y):
        return -2.0 * np.sin(x) * np.sin(y)

    def forcing(x, y, t):
        t = np.asarray(t, dtype=float)
        return base.forcing_f(x, y, t) + 2.0 * np.sin(x) * np.sin(y) \
            * t**alpha * inv_gamma

    def exact(x, y, t):
        return base.exact(x, y, t) + np.sin(x) * np.sin(y)

    def exact_lap(x, y, t):
        return base.exact_laplacian(x, y, t) - 2.0 * np.sin(x) * np.sin(y)

    def caputo(x, y, t):
        return base.caputo_forcing(x, y, t) + 2.0 * np.sin(x) * np.sin(y)

    return ProblemSpec(
        name="shifted", alpha=alpha, domain=base.domain, T=base.T,
        phi=_zero_xy, psi=psi, boundary=_zero_xyt, forcing_f=forcing,
        caputo_forcing=caputo, exact=exact, psi_laplacian=psi_lap,
        exact_dt=base.exact_dt, exact_laplacian=exact_lap,
    )


class TestHomogenize:
    def test_already_reduced_is_identity(self):
        p = make_example1(0.5)
        assert homogenize_initial(p) is p

    def test_idempotent(self):
        reduced = homogenize_initial(_shifted_problem(0.5))
        assert homogenize_initial(reduced) is reduced

    def test_reduction_recovers_benchmark_fields(self):
        alpha = 0.4
        reduced = homogenize_initial(_shifted_problem(alpha))
        base = make_example1(alpha)
        mesh = mesh_for(base, 9, n=1)
        assert np.max(np.abs(sample_xy(reduced.psi, mesh))) == 0.0
        for t in (0.0, 0.3, 1.0):
            got = sample_xyt(reduced.forcing_f, mesh, t)
            ref = sample_xyt(base.forcing_f, mesh, t)
            assert np.allclose(got, ref, rtol=1e-12, atol=1e-12)
            got = sample_xyt(reduced.exact, mesh, t)
            ref = sample_xyt(base.exact, mesh, t)
            assert np.allclose(got, ref, rtol=1e-12, atol=1e-12)
            # boundary trace only matters on the frame
            bvals = sample_xyt(reduced.boundary, mesh, t)
            for trace in (bvals[0, :], bvals[-1, :], bvals[:, 0], bvals[:, -1]):
                assert np.allclose(trace, 0.0, atol=1e-12)
        got = sample_xyt(reduced.caputo_forcing, mesh, 0.7)
        ref = sample_xyt(base.caputo_forcing, mesh, 0.7)
        assert np.allclose(got, ref, rtol=1e-12, atol=1e-12)

    def test_missing_laplacian_rejected(self):
        p = _shifted_problem(0.5)
        stripped = ProblemSpec(
            name=p.name, alpha=p.alpha, domain=p.domain, T=p.T, phi=p.phi,
            psi=p.psi, boundary=p.boundary, forcing_f=p.forcing_f,
        )
        with pytest.raises(ValueError, match="psi_laplacian"):
            homogenize_initial(stripped)


class TestVerifyManufactured:
    def test_benchmark_residual_analytic_path(self):
        rep = verify_manufactured(make_example1(0.5), samples=6, panels=1500)
        assert not rep.used_fd_time and not rep.used_fd_space
        assert rep.max_residual < 1e-10

    def test_benchmark_residual_fd_fallback(self):
        p = make_example1(0.5)
        stripped = ProblemSpec(
            name=p.name, alpha=p.alpha, domain=p.domain, T=p.T, phi=p.phi,
            psi=p.psi, boundary=p.boundary, forcing_f=p.forcing_f,
            exact=p.exact,
        )
        rep = verify_manufactured(stripped, samples=6, panels=1500)
        assert rep.used_fd_time and rep.used_fd_space
        assert rep.max_residual < 1e-6

    def test_shifted_problem_residual(self):
        rep = verify_manufactured(_shifted_problem(0.35), samples=5,
                                  panels=1500)
        assert rep.max_residual < 1e-9

    def test_requires_exact(self):
        with pytest.raises(ValueError, match="exact"):
            verify_manufactured(make_random_problem(0), samples=2)

    def test_deterministic(self):
        a = verify_manufactured(make_example1(0.3), samples=4, panels=600)
        b = verify_manufactured(make_example1(0.3), samples=4, panels=600)
        assert np.array_equal(a.residuals, b.residuals)
        assert np.array_equal(a.points, b.points)


class TestCompileExpression:
    def test_basic(self):
        f = compile_expression("sin(x)*cos(y) + t**2", alpha=0.5)
        assert f(0.5, 0.2, 2.0) == pytest.approx(
            math.sin(0.5) * math.cos(0.2) + 4.0)

    def test_alpha_and_pi(self):
        f = compile_expression("alpha * pi + gamma(4)", alpha=0.25)
        assert f(0, 0, 0) == pytest.approx(0.25 * math.pi + 6.0)

    def test_vectorized(self):
        f = compile_expression("x*y + t", alpha=0.5)
        x = np.array([1.0, 2.0])
        out = f(x, 3.0, 0.5)
        assert np.allclose(out, [3.5, 6.5])

    @pytest.mark.parametrize("src", [
        "__import__('os')",
        "x.real",
        "[1, 2]",
        "x < 1",
        "foo(x)",
        "sin(x, key=1)",
        "lambda: 1",
        "x if t else y",
        "'abc'",
        "q + 1",
    ])
    def test_rejected_syntax(self, src):
        with pytest.raises(ValueError):
            compile_expression(src, alpha=0.5)

    def test_variable_subset(self):
        with pytest.raises(ValueError, match="t"):
            compile_expression("t + x", alpha=0.5, variables=("x", "y"))


EXAMPLE_JSON = {
    "name": "benchmark-json",
    "alpha": 0.5,
    "domain": [math.pi, math.pi],
    "final_time": 1.0,
    "phi": "0",
    "psi": "0",
    "boundary": "0",
    "forcing": "sin(x)*sin(y)*((alpha+3)*t**(alpha+2)"
               " + 2*gamma(alpha+4)/gamma(2*alpha+4)*t**(2*alpha+3))",
    "exact": "sin(x)*sin(y)*t**(alpha+3)",
    "exact_dt": "sin(x)*sin(y)*(alpha+3)*t**(alpha+2)",
    "exact_laplacian": "-2*sin(x)*sin(y)*t**(alpha+3)",
    "psi_laplacian": "0",
}


class TestLoadProblem:
    def test_round_trip_matches_builtin(self, tmp_path):
        path = tmp_path / "prob.json"
        path.write_text(json.dumps(EXAMPLE_JSON))
        loaded = load_problem(path)
        builtin = make_example1(0.5)
        mesh = mesh_for(builtin, 7, n=1)
        for t in (0.2, 1.0):
            assert np.allclose(
                sample_xyt(loaded.forcing_f, mesh, t),
                sample_xyt(builtin.forcing_f, mesh, t), rtol=1e-13)
            assert np.allclose(
                sample_xyt(loaded.exact, mesh, t),
                sample_xyt(builtin.exact, mesh, t), rtol=1e-13)

    def test_alpha_override(self, tmp_path):
        path = tmp_path / "prob.json"
        path.write_text(json.dumps(EXAMPLE_JSON))
        loaded = load_problem(path, alpha=0.25)
        assert loaded.alpha == 0.25
        builtin = make_example1(0.25)
        mesh = mesh_for(builtin, 5, n=1)
        assert np.allclose(sample_xyt(loaded.forcing_f, mesh, 0.8),
                           sample_xyt(builtin.forcing_f, mesh, 0.8),
                           rtol=1e-13)

    def test_missing_key(self, tmp_path):
        data = dict(EXAMPLE_JSON)
        del data["boundary"]
        path = tmp_path / "prob.json"
        path.write_text(json.dumps(data))
        with pytest.raises(ValueError, match="boundary"):
            load_problem(path)

    def test_missing_alpha(self, tmp_path):
        data = dict(EXAMPLE_JSON)
        del data["alpha"]
        path = tmp_path / "prob.json"
        path.write_text(json.dumps(data))
        with pytest.raises(ValueError, match="alpha"):
            load_problem(path)
        assert load_problem(path, alpha=0.5).alpha == 0.5

    def test_time_in_space_only_field(self, tmp_path):
        data = dict(EXAMPLE_JSON)
        data["psi"] = "t * x"
        path = tmp_path / "prob.json"
        path.write_text(json.dumps(data))
        with pytest.raises(ValueError, match="psi"):
            load_problem(path)

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "prob.json"
        path.write_text("{not json")
        with pytest.raises(ValueError, match="JSON"):
            load_problem(path)

    def test_name_defaults_to_stem(self, tmp_path):
        data = dict(EXAMPLE_JSON)
        del data["name"]
        path = tmp_path / "mystery.json"
        path.write_text(json.dumps(data))
        assert load_problem(path).name == "mystery"


class TestGetProblem:
    def test_builtin(self):
        p = get_problem("example1", 0.5)
        assert p.name == "example1" and p.alpha == 0.5

    def test_builtin_needs_alpha(self):
        with pytest.raises(ValueError, match="alpha"):
            get_problem("example1")

    def test_spec_passthrough(self):
        p = make_example1(0.3)
        assert get_problem(p) is p

    def test_path(self, tmp_path):
        path = tmp_path / "prob.json"
        path.write_text(json.dumps(EXAMPLE_JSON))
        assert get_problem(str(path)).name == "benchmark-json"

    def test_unknown(self):
        with pytest.raises(ValueError, match="unknown problem"):
            get_problem("no-such-problem", 0.5)


class TestRandomProblem:
    def test_deterministic_per_seed(self):
        a = make_random_problem(7)
        b = make_random_problem(7)
        mesh = Mesh(1.0, 1.0, 6, 6, 1.0, 1)
        assert np.array_equal(sample_xyt(a.forcing_f, mesh, 0.37),
                              sample_xyt(b.forcing_f, mesh, 0.37))
        assert a.alpha == b.alpha

    def test_seeds_differ(self):
        mesh = Mesh(1.0, 1.0, 6, 6, 1.0, 1)
        a = sample_xy(make_random_problem(1).phi, mesh)
        b = sample_xy(make_random_problem(2).phi, mesh)
        assert not np.array_equal(a, b)

    def test_zero_boundary_and_initial(self):
        p = make_random_problem(3)
        mesh = Mesh(1.0, 1.0, 8, 8, 1.0, 1)
        assert np.max(np.abs(sample_xy(p.psi, mesh))) == 0.0
        vals = sample_xyt(p.forcing_f, mesh, 0.5)
        assert np.allclose(vals[0, :], 0.0, atol=1e-14)
        assert np.allclose(vals[:, -1], 0.0, atol=1e-14)
