import random
import warnings

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from adeq import exact as ex
from adeq import geometry as geo
from adeq.dynkin import DynkinType, FibrationData
from adeq.quiver import hatted_quiver
from adeq.rep import Representation
from adeq.solver import construct_type_a

from conftest import XS, oracle_threefold, poly_expr, random_type_a, sym, type_a_fibrations

A = DynkinType


def fib(*coeff_lists):
    return FibrationData.from_coeffs(A("A", len(coeff_lists) - 1), list(coeff_lists))


CONIFOLD = fib([0, 1], [0, -1])
A2 = fib([0], [0, 1], [0, -1])


def pt(*vals):
    return geo.SurfacePoint(*(ex.exact(v) for v in vals))


# -- equation --------------------------------------------------------------


def test_conifold_equation():
    x, y, z, lam = XS
    eq = geo.threefold_equation(CONIFOLD)
    assert sympy.expand(eq.poly.as_expr() - (x * y - z ** 2 + lam ** 2)) == 0


def test_a2_equation():
    x, y, z, lam = XS
    eq = geo.threefold_equation(A2)
    assert sympy.expand(eq.poly.as_expr() - (x * y - z ** 3 + z * lam ** 2)) == 0


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_zero_fibration_equation(n):
    x, y, z, lam = XS
    eq = geo.threefold_equation(fib(*[[0]] * (n + 1)))
    assert sympy.expand(eq.poly.as_expr() - (x * y - z ** (n + 1))) == 0


@settings(max_examples=25, deadline=None)
@given(type_a_fibrations(max_n=3, max_degree=2))
def test_equation_matches_symbolic_oracle(f):
    eq = geo.threefold_equation(f)
    assert sympy.expand(eq.poly.as_expr() - oracle_threefold(f)) == 0
    assert eq.poly.coeff_monomial(XS[0] * XS[1]) == 1


def test_equation_json_round_trip():
    eq = geo.threefold_equation(A2)
    assert geo.equation_poly_from_json(eq.to_json()) == eq.poly


def test_equation_rejects_de():
    t = A("D", 4)
    f = FibrationData(t, tuple(ex.poly([0]) for _ in range(5)), "tau")
    with pytest.raises(ValueError):
        geo.threefold_equation(f)


def test_hypersurface_residual_examples():
    eq = geo.threefold_equation(CONIFOLD)
    assert geo.hypersurface_residual(pt(1, -1, 0, 1), eq) == 0
    assert geo.hypersurface_residual(pt(1, 1, 0, 0), eq) == 1
    assert geo.hypersurface_residual(pt(0, 0, 0, 0), eq) == 0


# -- invariants ------------------------------------------------------------


def test_worked_example_invariants(a1_example):
    f, v = a1_example
    p = geo.invariants_type_a(v, f)
    assert p.as_tuple() == (ex.ONE, ex.exact(-1), ex.ZERO, ex.ONE)
    assert geo.hypersurface_residual(p, geo.threefold_equation(f)) == 0


def test_zero_arrows_on_degenerate_fiber():
    v = Representation.thin(hatted_quiver(A("A", 1)), {})
    p = geo.invariants_type_a(v, CONIFOLD)
    assert p.as_tuple() == (ex.ZERO,) * 4


def test_invariants_reject_non_scalar_loops():
    v = Representation.thin(hatted_quiver(A("A", 1)), {"u0": 1, "u1": 2})
    with pytest.raises(ValueError):
        geo.invariants_type_a(v, CONIFOLD)


@settings(max_examples=40, deadline=None)
@given(type_a_fibrations(max_n=3, max_degree=2), st.integers(0, 10 ** 6))
def test_constructed_points_lie_on_threefold(f, seed):
    rng = random.Random(seed)
    lam, z = ex.random_exact(rng), ex.random_exact(rng)
    v = construct_type_a(f, lam, z, seed=seed)
    p = geo.invariants_type_a(v, f)
    assert geo.hypersurface_residual(p, geo.threefold_equation(f)) == 0
    ts = [ex.evaluate(t, lam) for t in f.eigenvalues()]
    m = len(ts)
    assert p.z == z
    assert geo.edge_invariants(v) == [p.z + ts[(i + 1) % m] for i in range(m)]
    assert not any(geo.semi_invariant_residuals(v, f))


# -- singular locus --------------------------------------------------------


def test_singular_points_examples():
    (s,) = geo.singular_points(CONIFOLD)
    assert s.point.as_tuple() == (ex.ZERO,) * 4 and s.pair == (0, 1)
    (s,) = geo.singular_points(A2)
    assert s.point.as_tuple() == (ex.ZERO,) * 4 and len(s.pairs) == 3
    (s,) = geo.singular_points(fib([0, 1], [1, -1]))
    assert s.lambda_star == ex.exact("1/2") and s.point.z == ex.exact("-1/2")


def test_singular_points_empty_for_constant_differences():
    assert geo.singular_points(fib([0, 1], [1, 1], [2, 1])) == []


def test_singular_points_errors_and_warnings():
    with pytest.warns(geo.NonGenericWarning), pytest.raises(geo.NonGenericError):
        geo.singular_points(fib([0, 1], [0, 1]))
    with pytest.warns(geo.NonGenericWarning):
        geo.singular_points(fib([0, 0, 1], [0, 0, -1]))


@settings(max_examples=25, deadline=None)
@given(type_a_fibrations(max_n=3, max_degree=2))
def test_singular_points_are_singular(f):
    ts = f.eigenvalues()
    if any((ts[i] - ts[j]).is_zero for i in range(len(ts)) for j in range(i)):
        return
    eq = geo.threefold_equation(f)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", geo.NonGenericWarning)
        pts = geo.singular_points(f)
    for s in pts:
        if s.point.exact:
            assert geo.hypersurface_residual(s.point, eq) == 0
            assert not any(geo.gradient(eq, s.point))
        else:
            scale = max(1.0, *(abs(complex(c)) for c in s.point.to_complex().as_tuple()))
            assert geo.hypersurface_residual(s.point, eq) < 1e-8 * scale ** (f.n + 2)
            assert max(abs(complex(g)) for g in geo.gradient(eq, s.point)) < 1e-7 * scale ** (f.n + 2)


# -- semi-invariants -------------------------------------------------------


def test_semi_invariant_generators():
    si = geo.semi_invariants_type_a(1)
    assert si.u == ({"x0": 1},) and si.v == ({"y1": 1},)
    assert si.generator_labels == ("v0", "u0")
    si = geo.semi_invariants_type_a(2)
    assert si.generator_labels == ("v0*v1", "v0*u1", "u0*u1")


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_semi_invariant_weights(n):
    si = geo.semi_invariants_type_a(n)
    for j in range(n):
        e = [0] * (n + 1)
        e[0], e[j + 1] = -1, 1
        assert geo.character_weight(si.u[j], n) == tuple(e)
        assert geo.character_weight(si.v[j], n) == tuple(e)
    theta = (-n,) + (1,) * n
    assert all(geo.character_weight(g, n) == theta for g in si.generators)


# -- charts ------------------------------------------------------------------


def test_chart_worked_point():
    p = geo.chart_point(geo.ChartPoint(1, (ex.ONE, ex.exact(2), ex.ONE)), A2)
    assert p.as_tuple() == tuple(ex.exact(v) for v in (6, 4, 3, 1))
    assert geo.hypersurface_residual(p, geo.threefold_equation(A2)) == 0


def test_boundary_chart_point_conifold():
    # chart 0 uses (eta_0, y, lambda); recomputed from the chart formulas
    p = geo.chart_point(geo.ChartPoint(0, (ex.ONE, ex.ONE, ex.ONE)), CONIFOLD)
    assert p.as_tuple() == tuple(ex.exact(v) for v in (3, 1, 2, 1))
    assert geo.hypersurface_residual(p, geo.threefold_equation(CONIFOLD)) == 0
    q = geo.chart_point(geo.ChartPoint(1, (ex.ONE, ex.ONE, ex.ONE)), CONIFOLD)
    assert geo.hypersurface_residual(q, geo.threefold_equation(CONIFOLD)) == 0


@pytest.mark.parametrize("n", [1, 2, 3])
def test_chart_zero_coordinates_t_zero(n):
    f = fib(*[[0]] * (n + 1))
    for k in range(n + 1):
        p = geo.chart_point(geo.ChartPoint(k, (ex.ZERO,) * 3), f)
        assert p.as_tuple() == (ex.ZERO,) * 4


def oracle_chart_identity(k: int, f: FibrationData) -> bool:
    """Substitute the chart formulas as sympy expressions and expand."""
    a, b, lam = sympy.symbols("a b lam")
    n = f.n
    ts = [poly_expr(t, lam) for t in f.eigenvalues()]
    z = a * b - ts[(k + 1) % (n + 1)]
    zs = [z + ts[(i + 1) % (n + 1)] for i in range(n + 1)]
    x = b * sympy.prod(zs[k + 1:])
    y = a * sympy.prod(zs[:k])
    return sympy.expand(x * y - sympy.prod(zs)) == 0


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_chart_identities(n):
    rng = random.Random(n)
    for f in (fib(*[[0]] * (n + 1)), random_type_a(rng, n, 3)):
        for k in range(n + 1):
            assert geo.chart_identity_check(k, f)
            assert oracle_chart_identity(k, f)


def test_chart_identity_negative_control():
    def flipped(k, f):
        x, y, z = geo.chart_map_polys(k, f)
        return -x, y, z
    assert not geo.chart_identity_check(0, CONIFOLD, flipped)
    assert not geo.chart_identity_check(1, A2, flipped)


def test_chart_invalid_index():
    with pytest.raises(ValueError):
        geo.chart_point(geo.ChartPoint(3, (ex.ONE,) * 3), A2)


def test_transition_worked_example():
    c = geo.ChartPoint(1, (ex.ONE, ex.exact(2), ex.ONE))
    d = geo.chart_transition(1, c, A2)
    assert d.k == 2
    # chart n uses (x, xi_n, lambda)
    assert d.coords[1] == ex.exact("1/2")
    assert geo.chart_point(d, A2) == geo.chart_point(c, A2)
    with pytest.raises(ValueError):
        geo.chart_transition(1, geo.ChartPoint(1, (ex.ONE, ex.ZERO, ex.ONE)), A2)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_transitions_symbolic_image_invariance(n):
    # generic symbolic point: the forward map preserves (x, y, z, lambda) as rational functions
    rng = random.Random(10 + n)
    f = random_type_a(rng, n, 2)
    a, b, lam = sympy.symbols("a b lam")
    ts = [poly_expr(t, lam) for t in f.eigenvalues()]

    def image(k, a_, b_):
        z = a_ * b_ - ts[(k + 1) % (n + 1)]
        zs = [z + ts[(i + 1) % (n + 1)] for i in range(n + 1)]
        return (b_ * sympy.prod(zs[k + 1:]), a_ * sympy.prod(zs[:k]), z)

    for k in range(n):
        z = a * b - ts[(k + 1) % (n + 1)]
        zk1 = z + ts[(k + 2) % (n + 1)]
        src = image(k, a, b)
        dst = image(k + 1, 1 / b, b * zk1)
        assert all(sympy.simplify(s - d) == 0 for s, d in zip(src, dst))


@settings(max_examples=40, deadline=None)
@given(type_a_fibrations(max_n=3, max_degree=2), st.integers(0, 10 ** 6))
def test_transitions_involutive_and_image_preserving(f, seed):
    rng = random.Random(seed)
    for k in range(f.n):
        c = geo.random_chart_point(k, f.n, rng)
        d = geo.chart_transition(k, c, f)
        assert geo.chart_point(d, f) == geo.chart_point(c, f)
        try:
            back = geo.chart_transition(k + 1, d, f, target=k)
        except ValueError:
            continue  # z_{k+1} = 0: not on the backward overlap
        assert back == c


def test_projective_coordinates_agree_across_charts():
    c = geo.ChartPoint(1, (ex.ONE, ex.exact(2), ex.ONE))
    d = geo.chart_transition(1, c, A2)
    p, q = geo.projective_coordinates(c, A2), geo.projective_coordinates(d, A2)
    assert all(a * dd == b * cc for (a, b), (cc, dd) in zip(p, q))


# -- fibers ----------------------------------------------------------------


def test_fiber_over_conifold_singularity_is_a_curve():
    (s,) = geo.singular_points(CONIFOLD)
    rep = geo.fiber_probe(s, CONIFOLD, samples=8)
    assert rep.dimension == 1
    assert rep.charts[0].dimension == 1 and rep.charts[1].dimension == 1


def test_fiber_over_smooth_point_is_unique():
    rep = geo.fiber_probe(pt(1, -1, 0, 1), CONIFOLD)
    assert rep.dimension == 0 and rep.distinct_points == 1


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_fiber_over_random_chart_image_is_unique(seed):
    rng = random.Random(seed)
    f = A2
    c = geo.random_chart_point(rng.randrange(3), 2, rng, ex.exact(3))
    rep = geo.fiber_probe(geo.chart_point(c, f), f)
    assert rep.dimension == 0 and rep.distinct_points == 1


def test_fiber_probe_refuses_non_generic():
    with pytest.raises(geo.NonGenericError):
        geo.fiber_probe(pt(0, 0, 0, 0), fib([0], [0]))
    with pytest.raises(ValueError):
        geo.fiber_probe(pt(1, 1, 0, 0), CONIFOLD)


def test_symbolic_value_helper():
    assert sym(ex.gaussian(1, 2)) == 1 + 2 * sympy.I
