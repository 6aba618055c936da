"""Extended Dynkin quivers Q, their doubles, and the hatted quivers with loops."""
from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

from sympy import Poly

from . import exact as ex
from .dynkin import DynkinType, FibrationData, affine_edges, delta

PLAIN, STAR, LOOP = "plain", "star", "loop"


@dataclass(frozen=True)
class Arrow:
    id: str
    tail: int
    head: int
    kind: str = PLAIN
    star_of: str | None = None


@dataclass(frozen=True)
class Quiver:
    vertices: tuple[int, ...]
    arrows: tuple[Arrow, ...]
    dtype: DynkinType | None = None

    def __post_init__(self):
        ids = [a.id for a in self.arrows]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate arrow ids")
        by_id = {a.id: a for a in self.arrows}
        vs = set(self.vertices)
        for a in self.arrows:
            if a.tail not in vs or a.head not in vs:
                raise ValueError(f"arrow {a.id} has an endpoint outside the vertex set")
            if a.kind == LOOP and a.tail != a.head:
                raise ValueError(f"loop {a.id} must have tail == head")
            if a.kind == STAR:
                partner = by_id.get(a.star_of)
                if partner is None or partner.kind != PLAIN or partner.star_of != a.id:
                    raise ValueError(f"star arrow {a.id} is not paired with a plain arrow")
                if (partner.tail, partner.head) != (a.head, a.tail):
                    raise ValueError(f"star arrow {a.id} does not reverse {partner.id}")

    def arrow(self, arrow_id: str) -> Arrow:
        for a in self.arrows:
            if a.id == arrow_id:
                return a
        raise KeyError(arrow_id)

    @property
    def plain(self) -> list[Arrow]:
        return [a for a in self.arrows if a.kind == PLAIN]

    @property
    def stars(self) -> list[Arrow]:
        return [a for a in self.arrows if a.kind == STAR]

    @property
    def loops(self) -> list[Arrow]:
        return [a for a in self.arrows if a.kind == LOOP]

    @property
    def is_doubled(self) -> bool:
        return bool(self.stars)

    @property
    def is_hatted(self) -> bool:
        return bool(self.loops)

    def star(self, a: Arrow) -> Arrow:
        return self.arrow(a.star_of)

    def loop(self, vertex: int) -> Arrow:
        for a in self.loops:
            if a.tail == vertex:
                return a
        raise KeyError(f"no loop at vertex {vertex}")

    def to_json(self) -> dict:
        return {
            "vertices": list(self.vertices),
            "arrows": [
                {"id": a.id, "tail": a.tail, "head": a.head, "kind": a.kind, "star_of": a.star_of}
                for a in self.arrows
            ],
        }

    @classmethod
    def from_json(cls, obj: dict, dtype: DynkinType | None = None) -> "Quiver":
        arrows = tuple(
            Arrow(str(a["id"]), int(a["tail"]), int(a["head"]), a.get("kind", PLAIN), a.get("star_of"))
            for a in obj["arrows"]
        )
        return cls(tuple(int(v) for v in obj["vertices"]), arrows, dtype)


def _default_orientation(t: DynkinType) -> list[tuple[int, int]]:
    edges = affine_edges(t)
    if t.family == "A":
        return edges
    # orient every edge away from the extending vertex 0
    dist = {0: 0}
    frontier = [0]
    while frontier:
        nxt = []
        for v in frontier:
            for i, j in edges:
                for p, q in ((i, j), (j, i)):
                    if p == v and q not in dist:
                        dist[q] = dist[v] + 1
                        nxt.append(q)
        frontier = nxt
    return [(i, j) if dist[i] < dist[j] else (j, i) for i, j in edges]


def mckay_quiver(t: DynkinType, orientation: Sequence[tuple[int, int]] | None = None) -> Quiver:
    """One plain arrow a_k per edge of the extended diagram.

    ``orientation`` is a list of (tail, head) pairs, one per edge in
    :func:`affine_edges` order; None selects the default (cyclic i -> i+1 for
    type A, away from vertex 0 for D/E).
    """
    edges = affine_edges(t)
    if orientation is None:
        orientation = _default_orientation(t)
    orientation = [(int(a), int(b)) for a, b in orientation]
    want = Counter(frozenset(e) if e[0] != e[1] else e for e in edges)
    got = Counter(frozenset(e) if e[0] != e[1] else e for e in orientation)
    if len(orientation) != len(edges) or want != got:
        raise ValueError(f"orientation {orientation} does not match the edges of {t}~")
    arrows = tuple(Arrow(f"a{k}", i, j) for k, (i, j) in enumerate(orientation))
    return Quiver(tuple(range(t.n_vertices)), arrows, t)


def double_quiver(q: Quiver) -> Quiver:
    if q.is_doubled or q.is_hatted:
        raise ValueError("quiver is already doubled")
    arrows = []
    for a in q.arrows:
        arrows.append(Arrow(a.id, a.tail, a.head, PLAIN, a.id + "*"))
    arrows += [Arrow(a.id + "*", a.head, a.tail, STAR, a.id) for a in q.arrows]
    return Quiver(q.vertices, tuple(arrows), q.dtype)


def hat_quiver(q: Quiver) -> Quiver:
    if not q.is_doubled:
        raise ValueError("hat_quiver expects a doubled quiver")
    if q.is_hatted:
        raise ValueError("quiver already has loops")
    loops = tuple(Arrow(f"u{i}", i, i, LOOP) for i in q.vertices)
    return Quiver(q.vertices, q.arrows + loops, q.dtype)


def hatted_quiver(t: DynkinType, orientation=None) -> Quiver:
    return hat_quiver(double_quiver(mckay_quiver(t, orientation)))


def is_default_orientation(q: Quiver) -> bool:
    return [(a.tail, a.head) for a in q.plain] == _default_orientation(q.dtype)


# -- deformation data -----------------------------------------------------


@dataclass(frozen=True)
class TauPolys:
    polys: tuple[Poly, ...]

    def __len__(self) -> int:
        return len(self.polys)

    def __getitem__(self, i: int) -> Poly:
        return self.polys[i]

    def __iter__(self):
        return iter(self.polys)

    def at(self, lam) -> list:
        """tau_i(lambda) for every vertex (exact if lambda is exact)."""
        return [ex.evaluate(p, lam) for p in self.polys]

    def weighted_sum(self, weights: Sequence[int]) -> Poly:
        acc = ex.zero_poly()
        for w, p in zip(weights, self.polys):
            acc = acc + p * int(w)
        return acc

    def to_json(self) -> list:
        return [ex.poly_to_json(p) for p in self.polys]

    @classmethod
    def from_json(cls, obj) -> "TauPolys":
        return cls(tuple(ex.poly_from_json(p) for p in obj))

    @classmethod
    def zero(cls, size: int) -> "TauPolys":
        return cls(tuple(ex.zero_poly() for _ in range(size)))


class ConstraintError(ValueError):
    """sum_i delta_i tau_i does not vanish."""


def tau_from_fibration(f: FibrationData) -> TauPolys:
    tau = TauPolys(tuple(f.tau()))
    if not tau.weighted_sum(delta(f.dtype)).is_zero:
        raise ConstraintError("sum delta_i tau_i is not the zero polynomial")
    return tau


def tau_from_superpotential(eta: Sequence[Poly]) -> TauPolys:
    """tau_i = eta_i' for the superpotential terms eta_i(u)."""
    return TauPolys(tuple(ex.derivative(p) for p in eta))


def superpotential_from_tau(tau: TauPolys) -> list[Poly]:
    """eta_i with eta_i' = tau_i and eta_i(0) = 0."""
    return [ex.antiderivative(p) for p in tau]


# -- stability parameters ------------------------------------------------


def validate_theta(theta: Sequence[int], dim: Sequence[int]) -> bool:
    if len(theta) != len(dim):
        raise ValueError("theta and dimension vector have different lengths")
    return sum(int(a) * int(b) for a, b in zip(theta, dim)) == 0


def theta_is_generic(theta: Sequence[int], dim: Sequence[int]) -> bool:
    """True when no sub-dimension vector 0 < beta < dim has theta(beta) = 0."""
    if not validate_theta(theta, dim):
        return False
    full = tuple(dim)
    for beta in itertools.product(*(range(d + 1) for d in dim)):
        if any(beta) and beta != full and sum(t * b for t, b in zip(theta, beta)) == 0:
            return False
    return True


def default_theta(t: DynkinType) -> tuple[int, ...]:
    """(-n, 1, ..., 1) for type A; for D/E, -(sum of others) at vertex 0, 1 elsewhere."""
    d = delta(t)
    return (-sum(d[1:]),) + (1,) * t.rank
