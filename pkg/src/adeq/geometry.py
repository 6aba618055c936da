"""Explicit type-A geometry: the threefold xy = prod_i (z + t_{i+1}(lambda)),
its singular points, theta-semi-invariants, and the small-resolution charts.

Eigenvalue indices are taken mod n+1, so t_{n+1} = t_0.

Every chart k in 0..n is written with two coordinates (a, b) and lambda:

    z = a*b - t_{k+1},  x = b * prod_{i=k+1}^{n} z_i,  y = a * prod_{i=0}^{k-1} z_i

where z_i = z + t_{i+1}(lambda).  In the user-facing coordinate order
chart 0 is (eta_0, y, lambda) = (b, a, lambda), an interior chart is
(xi_k, eta_k, lambda) = (a, b, lambda), and chart n is (x, xi_n, lambda)
= (b, a, lambda).
"""
from __future__ import annotations

import random
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

from sympy import QQ_I, Poly, symbols

from . import exact as ex
from .dynkin import FibrationData, genericity_check
from .rep import Representation, is_representation, scalar_loop_lambda
from .quiver import is_default_orientation, tau_from_fibration

X, Y, Z, LAM = symbols("x y z lam")
CHART_A, CHART_B = symbols("a b")
VARS = (X, Y, Z, LAM)


class NonGenericError(ValueError):
    """The fibration is not transverse to the root hyperplanes."""


class NonGenericWarning(UserWarning):
    pass


def _require_type_a(f: FibrationData):
    if f.dtype.family != "A":
        raise ValueError("explicit threefold geometry is implemented for type A only")


def _lam_poly(p: Poly, gens, lam_index: int) -> Poly:
    """Embed a polynomial in u as a polynomial in the generator gens[lam_index]."""
    terms = {}
    for k, c in enumerate(ex.coeffs(p)):
        if c:
            mon = [0] * len(gens)
            mon[lam_index] = k
            terms[tuple(mon)] = c
    if not terms:
        terms[(0,) * len(gens)] = ex.ZERO
    return Poly.from_dict(terms, *gens, domain=QQ_I)


def _var(gens, index: int) -> Poly:
    mon = [0] * len(gens)
    mon[index] = 1
    return Poly.from_dict({tuple(mon): ex.ONE}, *gens, domain=QQ_I)


def _is_zero(c, tol: float = 0.0) -> bool:
    if isinstance(c, QQ_I.dtype):
        return not c
    return abs(c) <= tol


def _one(like):
    return ex.ONE if isinstance(like, QQ_I.dtype) else 1.0 + 0j


def _product(values, like):
    acc = _one(like)
    for v in values:
        acc = acc * v
    return acc


# -- the hypersurface -----------------------------------------------------


@dataclass(frozen=True)
class ThreefoldEquation:
    n: int
    fibration: FibrationData
    poly: Poly

    def to_json(self) -> dict:
        monomials = []
        for mon, c in sorted(self.poly.rep.terms(), reverse=True):
            e1, e2, e3, e4 = mon
            monomials.append({"x": e1, "y": e2, "z": e3, "lambda": e4, "coeff": ex.encode_exact(c)})
        return {"n": self.n, "poly": {"monomials": monomials}}


def equation_poly_from_json(obj: dict) -> Poly:
    terms = {}
    for m in obj["poly"]["monomials"]:
        key = (int(m["x"]), int(m["y"]), int(m["z"]), int(m["lambda"]))
        terms[key] = terms.get(key, ex.ZERO) + ex.decode_exact(m["coeff"])
    return Poly.from_dict(terms or {(0, 0, 0, 0): ex.ZERO}, *VARS, domain=QQ_I)


def threefold_equation(f: FibrationData) -> ThreefoldEquation:
    """xy - prod_{i=0}^{n} (z + t_{i+1}(lambda)), expanded exactly."""
    _require_type_a(f)
    n = f.n
    ts = f.eigenvalues()
    zvar = _var(VARS, 2)
    prod = Poly.from_dict({(0, 0, 0, 0): ex.ONE}, *VARS, domain=QQ_I)
    for i in range(n + 1):
        prod = prod * (zvar + _lam_poly(ts[(i + 1) % (n + 1)], VARS, 3))
    xy = _var(VARS, 0) * _var(VARS, 1)
    return ThreefoldEquation(n, f, xy - prod)


@dataclass(frozen=True)
class SurfacePoint:
    x: object
    y: object
    z: object
    lam: object

    def as_tuple(self) -> tuple:
        return (self.x, self.y, self.z, self.lam)

    def to_complex(self) -> "SurfacePoint":
        return SurfacePoint(*(ex.to_complex(c) for c in self.as_tuple()))

    @property
    def exact(self) -> bool:
        return all(isinstance(c, QQ_I.dtype) for c in self.as_tuple())


def evaluate_poly(p: Poly, values: Sequence):
    """Evaluate a multivariate Poly over QQ_I at exact or complex values."""
    exact_in = all(isinstance(v, QQ_I.dtype) for v in values)
    acc = ex.ZERO if exact_in else 0j
    for mon, c in p.rep.terms():
        term = c if exact_in else ex.to_complex(c)
        for v, e in zip(values, mon):
            if e:
                term = term * v ** e
        acc = acc + term
    return acc


def hypersurface_residual(p: SurfacePoint, eq: ThreefoldEquation):
    """|F(p)|; exact zero means p lies on the threefold."""
    val = evaluate_poly(eq.poly, p.as_tuple())
    if isinstance(val, QQ_I.dtype):
        return abs(ex.to_complex(val)) if val else 0.0
    return abs(val)


def gradient(eq: ThreefoldEquation, p: SurfacePoint) -> list:
    return [evaluate_poly(eq.poly.diff(v), p.as_tuple()) for v in VARS]


# -- invariants of thin representations ----------------------------------


def _arrow_values(v: Representation) -> tuple[list, list]:
    q = v.quiver
    if q.dtype is None or q.dtype.family != "A" or not is_default_orientation(q):
        raise ValueError("type-A invariants need the cyclic quiver with arrows a_i: i -> i+1")
    if v.dim != (1,) * len(v.dim):
        raise ValueError("type-A invariants need dimension vector (1,...,1)")
    n1 = len(v.dim)
    xs = [v[f"a{i}"][0, 0] for i in range(n1)]
    ys = [v[f"a{i}*"][0, 0] for i in range(n1)]
    return xs, ys


def edge_invariants(v: Representation) -> list:
    """z_i = x_i y_i for the thin representation ``v``."""
    xs, ys = _arrow_values(v)
    return [a * b for a, b in zip(xs, ys)]


def invariants_type_a(v: Representation, f: FibrationData, tol: float | None = None) -> SurfacePoint:
    """(x, y, z, lambda) with x = prod x_i, y = prod y_i and z the normalized mean of z_i.

    z = mean_i (z_i - t_{i+1}(lambda)), which is the plain mean of the z_i
    whenever sum_i t_i = 0; with it z_i = z + t_{i+1}(lambda) for every i.
    """
    _require_type_a(f)
    tau = tau_from_fibration(f)
    lam = scalar_loop_lambda(v, tol)
    if lam is None:
        raise ValueError("loops are not a common scalar multiple of the identity")
    if not is_representation(v, tau, tol):
        raise ValueError("not a representation of the quiver algebra for this fibration")
    xs, ys = _arrow_values(v)
    zs = [a * b for a, b in zip(xs, ys)]
    like = xs[0]
    ts = [ex.evaluate(p, lam) for p in f.eigenvalues()]
    m = len(zs)
    shifted = [zs[i] - ts[(i + 1) % m] for i in range(m)]
    total = ex.ZERO if isinstance(like, QQ_I.dtype) else 0j
    for s in shifted:
        total = total + s
    z = total * QQ_I(ex.QQ(1, m)) if isinstance(like, QQ_I.dtype) else total / m
    return SurfacePoint(_product(xs, like), _product(ys, like), z, lam)


# -- singular locus ------------------------------------------------------


@dataclass(frozen=True)
class SingularPoint:
    lambda_star: object
    pairs: tuple[tuple[int, int], ...]
    point: SurfacePoint

    @property
    def pair(self) -> tuple[int, int]:
        return self.pairs[0]


def _same(a, b, tol=1e-9) -> bool:
    if isinstance(a, QQ_I.dtype) and isinstance(b, QQ_I.dtype):
        return a == b
    return abs(ex.to_complex(a) - ex.to_complex(b)) <= tol * max(1.0, abs(ex.to_complex(a)))


def singular_points(f: FibrationData) -> list[SingularPoint]:
    """Points (0, 0, -t_i(l), l) where t_i(l) = t_j(l) for some i != j."""
    _require_type_a(f)
    ts = f.eigenvalues()
    m = len(ts)
    if not genericity_check(f).generic:
        warnings.warn("fibration is not generic", NonGenericWarning, stacklevel=2)
    found: list[list] = []
    for i in range(m):
        for j in range(i + 1, m):
            d = ts[i] - ts[j]
            if d.is_zero:
                raise NonGenericError(f"t_{i} - t_{j} vanishes identically: singular along a line")
            for r, _ in ex.roots(d):
                z = -ex.evaluate(ts[i], r)
                for entry in found:
                    if _same(entry[0], r) and _same(entry[1], z):
                        entry[2].append((i, j))
                        break
                else:
                    found.append([r, z, [(i, j)]])
    out = []
    for r, z, pairs in found:
        zero = ex.ZERO if isinstance(r, QQ_I.dtype) else 0j
        out.append(SingularPoint(r, tuple(pairs), SurfacePoint(zero, zero, z, r)))
    return out


# -- semi-invariants for theta = (-n, 1, ..., 1) --------------------------


def _mono(names: Sequence[str]) -> dict[str, int]:
    out: dict[str, int] = {}
    for s in names:
        out[s] = out.get(s, 0) + 1
    return out


def _mono_mul(*ms: dict[str, int]) -> dict[str, int]:
    out: dict[str, int] = {}
    for m in ms:
        for k, e in m.items():
            out[k] = out.get(k, 0) + e
    return out


@dataclass(frozen=True)
class SemiInvariants:
    n: int
    u: tuple[dict, ...]
    v: tuple[dict, ...]
    generators: tuple[dict, ...]
    generator_labels: tuple[str, ...]
    relations: tuple[str, ...]

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "u": list(self.u),
            "v": list(self.v),
            "generators": [{"label": s, "monomial": m} for s, m in zip(self.generator_labels, self.generators)],
            "relations": list(self.relations),
        }


def semi_invariants_type_a(n: int) -> SemiInvariants:
    """u_j = x_0...x_j, v_j = y_{j+1}...y_n and the weight-one generators f_0..f_n."""
    if n < 1:
        raise ValueError("n must be at least 1")
    u = tuple(_mono([f"x{i}" for i in range(j + 1)]) for j in range(n))
    v = tuple(_mono([f"y{i}" for i in range(j + 1, n + 1)]) for j in range(n))
    gens, labels = [], []
    for k in range(n + 1):
        # f_k = v_0 ... v_{n-1-k} u_{n-k} ... u_{n-1}
        gens.append(_mono_mul(*v[: n - k], *u[n - k:]))
        labels.append("*".join([f"v{j}" for j in range(n - k)] + [f"u{j}" for j in range(n - k, n)]))
    rels = []
    for j in range(n):
        rels.append(f"x*v{j} = u{j}*" + "*".join(f"z{i}" for i in range(j + 1, n + 1)))
        rels.append(f"y*u{j} = v{j}*" + "*".join(f"z{i}" for i in range(j + 1)))
    for j in range(n):
        for k in range(j):
            rels.append(f"u{j}*v{k} = u{k}*v{j}*" + "*".join(f"z{i}" for i in range(k + 1, j + 1)))
    return SemiInvariants(n, u, v, tuple(gens), tuple(labels), tuple(rels))


def character_weight(monomial: dict[str, int], n: int) -> tuple[int, ...]:
    """Weight of a monomial in x_i, y_i under (g_i): x_i -> g_{i+1} g_i^{-1} x_i, y_i -> g_i g_{i+1}^{-1} y_i."""
    w = [0] * (n + 1)
    for name, e in monomial.items():
        i = int(name[1:])
        sign = 1 if name[0] == "x" else -1
        w[(i + 1) % (n + 1)] += sign * e
        w[i] -= sign * e
    return tuple(w)


def evaluate_monomial(monomial: dict[str, int], v: Representation):
    xs, ys = _arrow_values(v)
    acc = _one(xs[0])
    for name, e in monomial.items():
        val = (xs if name[0] == "x" else ys)[int(name[1:])]
        acc = acc * val ** e
    return acc


def semi_invariant_residuals(v: Representation, f: FibrationData) -> list:
    """Residuals of the displayed relations among u_j, v_j, x, y and z_i = z + t_{i+1}(lambda)."""
    n = len(v.dim) - 1
    si = semi_invariants_type_a(n)
    p = invariants_type_a(v, f)
    ts = [ex.evaluate(t, p.lam) for t in f.eigenvalues()]
    zs = [p.z + ts[(i + 1) % (n + 1)] for i in range(n + 1)]
    like = p.x
    uu = [evaluate_monomial(m, v) for m in si.u]
    vv = [evaluate_monomial(m, v) for m in si.v]
    out = []
    for j in range(n):
        out.append(p.x * vv[j] - uu[j] * _product(zs[j + 1:], like))
        out.append(p.y * uu[j] - vv[j] * _product(zs[: j + 1], like))
    for j in range(n):
        for k in range(j):
            out.append(uu[j] * vv[k] - uu[k] * vv[j] * _product(zs[k + 1: j + 1], like))
    return out


# -- resolution charts ----------------------------------------------------


@dataclass(frozen=True)
class ChartPoint:
    k: int
    coords: tuple

    def to_json(self) -> dict:
        return {"k": self.k, "coords": [_encode(c) for c in self.coords]}


def _encode(c):
    return ex.encode_exact(c) if isinstance(c, QQ_I.dtype) else [c.real, c.imag]


def chart_coordinate_names(k: int, n: int) -> tuple[str, str, str]:
    if k == 0:
        return ("eta_0", "y", "lambda")
    if k == n:
        return ("x", f"xi_{n}", "lambda")
    return (f"xi_{k}", f"eta_{k}", "lambda")


def _check_k(k: int, n: int):
    if not 0 <= k <= n:
        raise ValueError(f"chart index {k} outside 0..{n}")


def _scalar(c):
    return c if isinstance(c, (QQ_I.dtype, complex)) else (
        complex(c) if isinstance(c, float) else ex.exact(c))


def _to_ab(c: ChartPoint, n: int):
    _check_k(c.k, n)
    if len(c.coords) != 3:
        raise ValueError("chart points have three coordinates")
    first, second, lam = (_scalar(v) for v in c.coords)
    if c.k == 0 or c.k == n:
        return second, first, lam
    return first, second, lam


def _from_ab(k: int, n: int, a, b, lam) -> ChartPoint:
    if k == 0 or k == n:
        return ChartPoint(k, (b, a, lam))
    return ChartPoint(k, (a, b, lam))


def _z_values(f: FibrationData, z, lam) -> list:
    ts = [ex.evaluate(t, lam) for t in f.eigenvalues()]
    m = len(ts)
    return [z + ts[(i + 1) % m] for i in range(m)]


def chart_point(c: ChartPoint, f: FibrationData) -> SurfacePoint:
    _require_type_a(f)
    n = f.n
    a, b, lam = _to_ab(c, n)
    ts = [ex.evaluate(t, lam) for t in f.eigenvalues()]
    z = a * b - ts[(c.k + 1) % (n + 1)]
    zs = _z_values(f, z, lam)
    x = b * _product(zs[c.k + 1:], a)
    y = a * _product(zs[: c.k], a)
    return SurfacePoint(x, y, z, lam)


def chart_map_polys(k: int, f: FibrationData) -> tuple[Poly, Poly, Poly]:
    """(x, y, z) as polynomials in the chart generators (a, b, lam)."""
    _require_type_a(f)
    n = f.n
    _check_k(k, n)
    gens = (CHART_A, CHART_B, LAM)
    ts = [_lam_poly(t, gens, 2) for t in f.eigenvalues()]
    a, b = _var(gens, 0), _var(gens, 1)
    z = a * b - ts[(k + 1) % (n + 1)]
    zs = [z + ts[(i + 1) % (n + 1)] for i in range(n + 1)]
    x, y = b, a
    for zi in zs[k + 1:]:
        x = x * zi
    for zi in zs[:k]:
        y = y * zi
    return x, y, z


def chart_identity_check(k: int, f: FibrationData,
                         maps: Callable[[int, FibrationData], tuple[Poly, Poly, Poly]] | None = None) -> bool:
    """True when the threefold polynomial vanishes identically on the chart map."""
    eq = threefold_equation(f)
    xp, yp, zp = (maps or chart_map_polys)(k, f)
    gens = xp.gens
    lam = _var(gens, 2)
    zero = Poly.from_dict({(0,) * len(gens): ex.ZERO}, *gens, domain=QQ_I)
    cache: dict[tuple[int, int], Poly] = {}

    def power(idx: int, e: int) -> Poly:
        key = (idx, e)
        if key not in cache:
            base = (xp, yp, zp, lam)[idx]
            cache[key] = base if e == 1 else power(idx, e - 1) * base
        return cache[key]

    total = zero
    for mon, c in eq.poly.rep.terms():
        term = zero + Poly.from_dict({(0,) * len(gens): c}, *gens, domain=QQ_I)
        for idx, e in enumerate(mon):
            if e:
                term = term * power(idx, e)
        total = total + term
    return total.is_zero


def chart_transition(k: int, c: ChartPoint, f: FibrationData, target: int | None = None) -> ChartPoint:
    """Move a chart-k point to chart k+1 (default) or k-1 on the overlap.

    Forward: a' = 1/b, b' = b * z_{k+1}.  Backward: b' = 1/a, a' = a * z_{k-1}.
    """
    _require_type_a(f)
    n = f.n
    if c.k != k:
        raise ValueError(f"point lives in chart {c.k}, not {k}")
    target = k + 1 if target is None else target
    _check_k(target, n)
    a, b, lam = _to_ab(c, n)
    z = chart_point(c, f).z
    zs = _z_values(f, z, lam)
    if target == k + 1:
        if _is_zero(b):
            raise ValueError(f"point is not on the overlap of charts {k} and {k + 1}")
        return _from_ab(target, n, 1 / b if not isinstance(b, QQ_I.dtype) else ex.ONE / b, b * zs[k + 1], lam)
    if target == k - 1:
        if _is_zero(a):
            raise ValueError(f"point is not on the overlap of charts {k} and {k - 1}")
        return _from_ab(target, n, a * zs[k - 1], 1 / a if not isinstance(a, QQ_I.dtype) else ex.ONE / a, lam)
    raise ValueError("transitions only connect neighbouring charts")


def projective_coordinates(c: ChartPoint, f: FibrationData) -> list[tuple]:
    """(u_j : v_j) for j = 0..n-1 on the point of the resolution given by ``c``."""
    n = f.n
    a, b, lam = _to_ab(c, n)
    zs = _z_values(f, chart_point(c, f).z, lam)
    one = _one(a)
    out = []
    for j in range(n):
        if j <= c.k - 1:
            out.append((one, a * _product(zs[j + 1: c.k], a)))
        else:
            out.append((b * _product(zs[c.k + 1: j + 1], a), one))
    return out


# -- fibers of the resolution --------------------------------------------


@dataclass
class ChartFiber:
    k: int
    dimension: int | None
    points: list = field(default_factory=list)
    samples: int = 0
    max_residual: float = 0.0

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "dimension": self.dimension,
            "points": [[[c.real, c.imag] for c in p.coords] for p in self.points],
            "samples": self.samples,
            "max_residual": self.max_residual,
        }


@dataclass
class FiberProbeReport:
    point: SurfacePoint
    charts: dict[int, ChartFiber]
    dimension: int | None
    distinct_points: int

    def to_json(self) -> dict:
        return {
            "point": [[complex(c).real, complex(c).imag] for c in self.point.to_complex().as_tuple()],
            "dimension": self.dimension,
            "distinct_points": self.distinct_points,
            "charts": {str(k): v.to_json() for k, v in self.charts.items()},
        }


def _point_distance(p: SurfacePoint, q: SurfacePoint) -> float:
    return max(abs(complex(a) - complex(b)) for a, b in zip(p.to_complex().as_tuple(), q.to_complex().as_tuple()))


def _chart_fiber(k, p: SurfacePoint, f: FibrationData, samples: int, rng: random.Random, tol: float) -> ChartFiber:
    n = f.n
    x, y, z, lam = p.as_tuple()
    zs = _z_values(f, z, lam)
    big_a = _product(zs[k + 1:], 1j)
    big_b = _product(zs[:k], 1j)
    w = zs[k]
    small = lambda c: abs(c) <= tol  # noqa: E731
    sols, family = [], None
    if not small(big_a):
        b = x / big_a
        if not small(big_b):
            sols = [(y / big_b, b)]
        elif small(y):
            if not small(b):
                sols = [(w / b, b)]
            elif small(w):
                family = lambda s: (s, 0j)  # noqa: E731
    elif small(x):
        if not small(big_b):
            a = y / big_b
            if not small(a):
                sols = [(a, w / a)]
            elif small(w):
                family = lambda s: (0j, s)  # noqa: E731
        elif small(y):
            if small(w):
                family = lambda s: (s, 0j) if rng.random() < 0.5 else (0j, s)  # noqa: E731
            else:
                family = lambda s: (s, w / s)  # noqa: E731
    fiber = ChartFiber(k, None)
    candidates = [_from_ab(k, n, a, b, lam) for a, b in sols]
    if family is not None:
        for _ in range(samples):
            s = complex(rng.uniform(-3, 3), rng.uniform(-3, 3)) or 1.0
            candidates.append(_from_ab(k, n, *family(s), lam))
    verified = []
    for c in candidates:
        r = _point_distance(chart_point(c, f), p)
        fiber.max_residual = max(fiber.max_residual, r)
        if r <= tol * 10:
            verified.append(c)
    if family is not None and len(verified) == len(candidates) and samples > 0:
        fiber.dimension = 1
        fiber.samples = samples
    elif verified:
        fiber.dimension = 0
        fiber.points = verified
    return fiber


def fiber_probe(p, f: FibrationData, samples: int = 16, seed: int = 0, tol: float = 1e-9) -> FiberProbeReport:
    """Preimages of ``p`` in every resolution chart, with a dimension estimate per chart."""
    _require_type_a(f)
    if not genericity_check(f).generic:
        raise NonGenericError("fiber_probe requires a generic fibration")
    if isinstance(p, SingularPoint):
        p = p.point
    pc = p.to_complex()
    scale = max(1.0, *(abs(c) for c in pc.as_tuple()))
    if hypersurface_residual(pc, threefold_equation(f)) > tol * scale ** (f.n + 2):
        raise ValueError("point does not lie on the threefold")
    rng = random.Random(seed)
    charts = {k: _chart_fiber(k, pc, f, samples, rng, tol * scale) for k in range(f.n + 1)}
    dims = [c.dimension for c in charts.values() if c.dimension is not None]
    dimension = max(dims) if dims else None
    reps: list[list[tuple]] = []
    for fib in charts.values():
        for c in fib.points:
            proj = projective_coordinates(c, f)
            if not any(_same_projective(proj, other, tol * scale) for other in reps):
                reps.append(proj)
    return FiberProbeReport(pc, charts, dimension, len(reps))


def _same_projective(p: list[tuple], q: list[tuple], tol: float) -> bool:
    return all(abs(a * d - b * c) <= tol * max(1.0, abs(a * d), abs(b * c)) for (a, b), (c, d) in zip(p, q))


def random_chart_point(k: int, n: int, rng: random.Random, lam=None) -> ChartPoint:
    a = ex.random_exact(rng, nonzero=True)
    b = ex.random_exact(rng, nonzero=True)
    lam = ex.random_exact(rng) if lam is None else lam
    return _from_ab(k, n, a, b, lam)
