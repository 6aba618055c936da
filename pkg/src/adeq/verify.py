"""End-to-end consistency checks bundled into one JSON-ready report."""
from __future__ import annotations

import random
import warnings

import numpy as np

from . import exact as ex
from .dynkin import FibrationData, delta, genericity_check
from .geometry import (
    NonGenericError, NonGenericWarning, chart_identity_check, chart_point, chart_transition,
    gradient, hypersurface_residual, invariants_type_a, random_chart_point,
    semi_invariant_residuals, singular_points, threefold_equation,
)
from .quiver import default_theta, tau_from_fibration
from .rep import (
    SEMISTABLE, STABLE, Representation, closed_supports, central_constraint, is_representation,
    is_simple_burnside, scalar_loop_lambda, theta_stability, trace_identity,
)
from .solver import SolveOptions, random_valid_sample


def reach(v, start: int) -> frozenset:
    """Vertices reachable from ``start`` along arrows with nonzero (thin) values."""
    seen, stack = {start}, [start]
    while stack:
        i = stack.pop()
        for a in v.quiver.arrows:
            if a.tail == i and a.head not in seen and v[a.id][0, 0]:
                seen.add(a.head)
                stack.append(a.head)
    return frozenset(seen)


def semi_invariant_stable(v) -> bool:
    """theta = (-n, 1, ..., 1): stable iff every pair (u_j, v_j) is nonzero."""
    n = len(v.dim) - 1
    xs = [v[f"a{i}"][0, 0] for i in range(n + 1)]
    ys = [v[f"a{i}*"][0, 0] for i in range(n + 1)]
    for j in range(n):
        u = all(xs[: j + 1])
        w = all(ys[j + 1:])
        if not (u or w):
            return False
    return True


def _suite(passed: bool, **details) -> dict:
    return {"passed": bool(passed), **details}


def _type_a_suites(f: FibrationData, samples: int, seed: int, theta) -> dict:
    rng = random.Random(seed)
    out = {}
    eq = threefold_equation(f)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", NonGenericWarning)
            sing = singular_points(f)
        grads_ok = all(not any(gradient(eq, s.point)) if s.point.exact else
                       max(abs(complex(c)) for c in gradient(eq, s.point)) < 1e-8 for s in sing)
        out["equation"] = _suite(grads_ok, terms=len(eq.poly.terms()), singular_points=len(sing))
    except NonGenericError as exc:
        out["equation"] = _suite(False, terms=len(eq.poly.terms()), error=str(exc))

    tau = tau_from_fibration(f)
    lam = ex.random_exact(rng)
    batch = random_valid_sample(f, lam, samples, seed=rng.randrange(2 ** 31))
    reps = batch.reps
    out["sampling"] = _suite(all(is_representation(v, tau) for v in reps),
                             count=len(reps), simple_fraction=batch.simple_fraction)

    bad_inv = 0
    bad_semi = 0
    for v in reps:
        p = invariants_type_a(v, f)
        if hypersurface_residual(p, eq):
            bad_inv += 1
        if any(semi_invariant_residuals(v, f)):
            bad_semi += 1
    out["invariants"] = _suite(bad_inv == 0 and bad_semi == 0, hypersurface_failures=bad_inv,
                               semi_invariant_failures=bad_semi)

    charts = {k: chart_identity_check(k, f) for k in range(f.n + 1)}
    out["charts"] = _suite(all(charts.values()), identities={str(k): ok for k, ok in charts.items()})

    trans_bad = 0
    trials = 0
    for k in range(f.n):
        for _ in range(5):
            c = random_chart_point(k, f.n, rng, lam)
            try:
                d = chart_transition(k, c, f)
            except ValueError:
                continue
            trials += 1
            back = chart_transition(k + 1, d, f, target=k)
            if chart_point(d, f) != chart_point(c, f) or back != c:
                trans_bad += 1
    out["transitions"] = _suite(trans_bad == 0, trials=trials, failures=trans_bad)

    # stability on thin samples and on random sparsity patterns
    stab = {"simple_not_stable": 0, "strictly_semistable": 0, "gi_disagree": 0, "burnside_vs_support": 0}
    pattern_reps = list(reps)
    for _ in range(samples):
        pattern_reps.append(_sparse_copy(reps[rng.randrange(len(reps))], rng) if reps else None)
    for v in (w for w in pattern_reps if w is not None):
        verdict = theta_stability(v, theta)
        simple = is_simple_burnside(v)
        if simple and verdict.status != STABLE:
            stab["simple_not_stable"] += 1
        if verdict.status == SEMISTABLE:
            stab["strictly_semistable"] += 1
        if tuple(theta) == default_theta(f.dtype) and (verdict.status == STABLE) != semi_invariant_stable(v):
            stab["gi_disagree"] += 1
        trivial = len([s for s in closed_supports(v) if s and len(s) < len(v.dim)]) == 0
        if simple != trivial:
            stab["burnside_vs_support"] += 1
    out["stability"] = _suite(not any(stab.values()), checked=len(pattern_reps), **stab)
    out["identities"] = _identities(reps, tau)
    return out


def _sparse_copy(v, rng: random.Random):
    """Zero out a random subset of the doubled arrows of a thin representation."""
    values = {a.id: v[a.id][0, 0] for a in v.quiver.arrows}
    for a in v.quiver.arrows:
        if a.kind != "loop" and rng.random() < 0.4:
            values[a.id] = ex.ZERO
    return Representation.thin(v.quiver, values)


def _identities(reps, tau) -> dict:
    d = delta(reps[0].quiver.dtype) if reps else ()
    bad_trace = bad_central = bad_loop = 0
    for v in reps:
        tol = None if v.exact else 1e-7 * max(1.0, v.largest_norm() ** 2)
        tr = trace_identity(v, tau, tol)
        lam = scalar_loop_lambda(v, tol)
        c = central_constraint(d, tau, lam) if lam is not None else None
        if v.exact:
            bad_trace += bool(tr)
            bad_central += c is None or bool(c)
            bad_loop += is_simple_burnside(v) and lam is None
        else:
            bad_trace += abs(tr) > tol
            bad_central += c is None or abs(c) > tol
    return _suite(bad_trace + bad_central + bad_loop == 0, trace_failures=int(bad_trace),
                  central_failures=int(bad_central), loop_failures=int(bad_loop))


def verify_all(f: FibrationData, samples: int = 20, seed: int = 0, theta=None,
               opts: SolveOptions | None = None) -> dict:
    report = genericity_check(f)
    out = {"type": str(f.dtype), "seed": seed, "samples": samples}
    suites = {"genericity": _suite(True, generic=report.generic,
                                   violations=[list(v.root) for v in report.violations])}
    if f.dtype.family == "A":
        theta = tuple(theta) if theta is not None else default_theta(f.dtype)
        suites.update(_type_a_suites(f, samples, seed, theta))
    else:
        tau = tau_from_fibration(f)
        rng = np.random.default_rng(seed)
        lam = complex(*rng.uniform(-1, 1, 2))
        batch = random_valid_sample(f, lam, samples, seed=seed, opts=opts)
        target = (opts or SolveOptions()).residual_target
        converged = sum(r <= target for r in batch.residuals)
        suites["sampling"] = _suite(converged == samples, count=samples, converged=int(converged),
                                    max_residual=max(batch.residuals, default=0.0))
        suites["identities"] = _identities([v for v, r in zip(batch.reps, batch.residuals) if r <= target], tau)
    out["suites"] = suites
    out["passed"] = all(s["passed"] for s in suites.values())
    return out
