import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adeq import exact as ex
from adeq import geometry as geo
from adeq.dynkin import DynkinType, FibrationData, delta
from adeq.quiver import ConstraintError, TauPolys, hatted_quiver, tau_from_fibration
from adeq.rep import (
    Representation, closed_supports, is_representation, is_simple_burnside, relation_residual,
    scalar_loop_lambda, trace_identity,
)
from adeq.solver import (
    MomentMapProblem, SolveOptions, construct_type_a, gradient_fd_check, random_valid_sample,
    solve_moment_map,
)

from conftest import random_type_a, type_a_fibrations


def constant_tau(t: DynkinType, seed: int = 0, lam_coeff: bool = False) -> TauPolys:
    """Random constant (or linear) tau with sum delta_i tau_i = 0."""
    rng = random.Random(seed)
    d = delta(t)
    vals = [ex.random_exact(rng) for _ in d[1:]]
    first = -sum((v * di for v, di in zip(vals, d[1:])), ex.ZERO)
    cs = [first] + vals
    return TauPolys(tuple(ex.poly([0, c] if lam_coeff else [c]) for c in cs))


def d4_tau():
    t = DynkinType("D", 4)
    d = delta(t)
    return t, TauPolys(tuple(ex.poly([-2 if di == 2 else 1]) for di in d))


# -- type A construction ----------------------------------------------------


def test_construct_worked_example(a1_example):
    f, v = a1_example
    w = construct_type_a(f, 1, 0, x_choices=[1, 1])
    assert all(w[k][0, 0] == v[k][0, 0] for k in v.mats)


def test_construct_t_zero():
    f = FibrationData.from_coeffs(DynkinType("A", 2), [[0]] * 3)
    v = construct_type_a(f, 5, 1, seed=0)
    assert geo.edge_invariants(v) == [ex.ONE] * 3
    p = geo.invariants_type_a(v, f)
    assert p.x * p.y == ex.ONE


def test_construct_zero_edge_flags():
    f = FibrationData.from_coeffs(DynkinType("A", 1), [[0, 1], [0, -1]])
    tau = tau_from_fibration(f)
    # lambda = 1, z = 1 forces z_0 = z + t_1(1) = 0
    v = construct_type_a(f, 1, 1, seed=0)
    assert (v["a0"][0, 0], v["a0*"][0, 0]) == (ex.ONE, ex.ZERO)
    w = construct_type_a(f, 1, 1, seed=0, zero_edge="y")
    assert w["a0"][0, 0] == ex.ZERO and w["a0*"][0, 0] != ex.ZERO
    for r in (v, w):
        assert relation_residual(r, tau).max_residual == 0
    # both edges degenerate at lambda = 0, z = 0: mixed choices break strong connectivity
    q = construct_type_a(f, 0, 0, seed=0)
    assert q["a0"][0, 0] and q["a1"][0, 0]
    with pytest.raises(ValueError):
        construct_type_a(f, 1, 1, zero_edge="q")
    with pytest.raises(ValueError):
        construct_type_a(f, 1, 1, x_choices=[1, 0])


def test_construct_degenerate_is_non_simple():
    f = FibrationData.from_coeffs(DynkinType("A", 2), [[0], [0, 1], [0, -1]])
    # lambda = 0, z = 0: every z_i vanishes; choose the y-flag so all x_i = 0
    v = construct_type_a(f, 0, 0, seed=1, zero_edge="y")
    w = construct_type_a(f, 0, 0, seed=1)
    mixed = {k: m[0, 0] for k, m in w.mats.items()}
    mixed["a1"], mixed["a1*"] = ex.ZERO, ex.ZERO
    m = Representation.thin(w.quiver, mixed)
    assert len(closed_supports(m)) > 2 and not is_simple_burnside(m)
    assert is_simple_burnside(v)  # the y-cycle alone is strongly connected


@settings(max_examples=40, deadline=None)
@given(type_a_fibrations(max_n=4, max_degree=3), st.integers(0, 10 ** 6))
def test_construct_is_exact_representation(f, seed):
    rng = random.Random(seed)
    lam = ex.random_exact(rng)
    v = construct_type_a(f, lam, ex.random_exact(rng), seed=seed)
    assert relation_residual(v, tau_from_fibration(f)).max_residual == 0
    assert scalar_loop_lambda(v) == lam


# -- least squares -------------------------------------------------------------


def test_zero_start_zero_tau():
    for t in (DynkinType("A", 2), DynkinType("D", 4), DynkinType("E", 6)):
        res = solve_moment_map(t, TauPolys.zero(t.n_vertices), 0, SolveOptions(start="zero"))
        assert res.converged and res.residual == 0 and res.iterations == 0
        assert all(not m.any() for k, m in res.rep.mats.items())


def test_d4_constant_tau():
    t, tau = d4_tau()
    res = solve_moment_map(t, tau, 0, SolveOptions(seed=3))
    assert res.converged and res.residual < 1e-8 and res.iterations <= 500
    assert is_representation(res.rep, tau)


def test_central_constraint_checked():
    t = DynkinType("D", 4)
    with pytest.raises(ConstraintError):
        solve_moment_map(t, TauPolys(tuple(ex.poly([1]) for _ in range(5))), 0)
    with pytest.raises(ValueError):
        SolveOptions(residual_target=0)


def test_a2_solution_lands_on_threefold():
    f = FibrationData.from_coeffs(DynkinType("A", 2), [[0], [0, 1], [0, -1]])
    tau = tau_from_fibration(f)
    res = solve_moment_map(f.dtype, tau, 1, SolveOptions(seed=7))
    assert res.converged
    p = geo.invariants_type_a(res.rep, f, tol=1e-8)
    assert geo.hypersurface_residual(p, geo.threefold_equation(f)) < 1e-8 * max(1, abs(p.x * p.y))


def test_budget_exhaustion_reports_best_so_far():
    t, tau = d4_tau()
    res = solve_moment_map(t, tau, 0, SolveOptions(max_iterations=1, seed=0))
    assert res.iterations == 1 and not res.converged
    assert res.residual == pytest.approx(np.sqrt(res.history[-1]))


@pytest.mark.parametrize("t", [DynkinType("D", 4), DynkinType("E", 6), DynkinType("D", 5)], ids=str)
def test_objective_non_increasing_and_trace(t):
    tau = constant_tau(t, seed=2, lam_coeff=True)
    for seed in range(3):
        res = solve_moment_map(t, tau, complex(0.4, -0.3), SolveOptions(seed=seed))
        assert all(b <= a for a, b in zip(res.history, res.history[1:]))
        assert res.converged == (res.residual <= 1e-10)
        if res.converged:
            assert abs(trace_identity(res.rep, tau, tol=1e-8)) < 10 * 1e-10 * max(1, res.rep.largest_norm())


def test_non_default_orientation_converges():
    t = DynkinType("D", 4)
    tau = constant_tau(t, seed=4)
    res = solve_moment_map(t, tau, 1, SolveOptions(seed=1), orientation=[(2, 0), (1, 2), (2, 3), (4, 2)])
    assert res.converged


def test_jacobian_matches_finite_differences():
    t = DynkinType("D", 4)
    prob = MomentMapProblem(hatted_quiver(t), delta(t), [1, 2, -1, 0.5, -1.25])
    x = np.random.default_rng(0).standard_normal(prob.size)
    jac = prob.jacobian(x)
    h = 1e-6
    fd = np.column_stack([(prob.residual(x + h * e) - prob.residual(x - h * e)) / (2 * h)
                          for e in np.eye(prob.size)])
    assert np.max(np.abs(jac - fd)) < 1e-7


def test_pack_unpack_round_trip():
    t = DynkinType("E", 6)
    prob = MomentMapProblem(hatted_quiver(t), delta(t), [0] * 7)
    x = np.random.default_rng(1).standard_normal(prob.size)
    assert np.array_equal(prob.pack(prob.unpack(x)), x)


def test_gradient_fd_examples():
    t = DynkinType("A", 1)
    prob = MomentMapProblem(hatted_quiver(t), delta(t), [2, -2])
    rng = np.random.default_rng(3)
    for _ in range(100):
        x = rng.standard_normal(prob.size)
        assert gradient_fd_check(prob, x, 1e-6) < 1e-5
    zero = MomentMapProblem(hatted_quiver(t), delta(t), [0, 0])
    assert gradient_fd_check(zero, np.zeros(zero.size)) == 0.0


def test_gradient_fd_error_model():
    # each residual entry is linear in any single real coordinate, so the objective is
    # quadratic along coordinate axes: the h^2 truncation term of central differences
    # vanishes and only cancellation roundoff (~ eps / h) remains
    t = DynkinType("D", 4)
    prob = MomentMapProblem(hatted_quiver(t), delta(t), [1, 2, -1, 0.5, -1.25])
    rng = np.random.default_rng(5)
    for _ in range(5):
        x = rng.standard_normal(prob.size)
        assert gradient_fd_check(prob, x, 0.1) < 1e-12
        scale = float(np.max(np.abs(prob.gradient(x))))
        obj = max(prob.objective(x), 1.0)
        errs = [gradient_fd_check(prob, x, h) for h in (1e-4, 1e-5, 1e-6)]
        for h, err in zip((1e-4, 1e-5, 1e-6), errs):
            assert err < 1e-5
            assert err <= 100 * np.finfo(float).eps * obj / (h * scale)


# -- sampling ----------------------------------------------------------------


def test_sampling_type_a_generic():
    f = FibrationData.from_coeffs(DynkinType("A", 2), [[0, 1], [1, 0, 1], [0, -2]])
    batch = random_valid_sample(f, ex.exact(2), 100, seed=9)
    tau = tau_from_fibration(f)
    assert len(batch.reps) == 100 and batch.simple_fraction == 1.0
    assert all(is_representation(v, tau) for v in batch.reps)


def test_sampling_t_zero_z_zero():
    f = FibrationData.from_coeffs(DynkinType("A", 2), [[0]] * 3)
    tau = tau_from_fibration(f)
    zero = random_valid_sample(f, 0, 5, seed=0, z_value=0, zero_edge="zero")
    assert zero.simple_fraction == 0.0
    assert all(not m.any() for v in zero.reps for k, m in v.mats.items())
    # the default flag keeps x_i = 1 on degenerate edges, so the x-cycle stays strongly connected
    cyc = random_valid_sample(f, 0, 5, seed=0, z_value=0)
    assert cyc.simple_fraction == 1.0
    assert all(is_representation(v, tau) for v in zero.reps + cyc.reps)


def test_sampling_d4_float():
    t, tau = d4_tau()
    f = FibrationData(t, tau.polys, "tau")
    batch = random_valid_sample(f, 0, 5, seed=0)
    assert batch.simple_fraction is None
    assert all(r < 1e-8 for r in batch.residuals)
    assert all(is_representation(v, tau) for v in batch.reps)


def test_sampling_deterministic():
    rng = random.Random(0)
    f = random_type_a(rng, 3, 2)
    a = random_valid_sample(f, 1, 10, seed=5)
    b = random_valid_sample(f, 1, 10, seed=5)
    assert all(all((x[k] == y[k]).all() for k in x.mats) for x, y in zip(a.reps, b.reps))
