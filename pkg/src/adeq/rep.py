"""Representations of the hatted quiver and the N=1 ADE quiver algebra.

A :class:`Representation` holds one matrix per arrow of the hatted quiver;
arrow ``a: i -> j`` carries a ``dim[j] x dim[i]`` matrix.  Exact
representations use numpy object arrays of ``QQ_I`` entries, float ones use
``complex128`` arrays.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from sympy import QQ_I

from . import exact as ex
from .quiver import LOOP, Quiver, TauPolys, validate_theta

EXACT, FLOAT = "exact", "float"

DEFAULT_TOL = 1e-9


class NotARepresentationError(ValueError):
    """The matrices do not satisfy the relations of the quiver algebra."""


@dataclass(frozen=True, eq=False)
class Representation:
    quiver: Quiver
    dim: tuple[int, ...]
    mats: Mapping[str, np.ndarray]
    field: str = EXACT

    def __post_init__(self):
        object.__setattr__(self, "dim", tuple(int(d) for d in self.dim))
        if self.field not in (EXACT, FLOAT):
            raise ValueError(f"unknown field {self.field!r}")
        if len(self.dim) != len(self.quiver.vertices) or min(self.dim, default=0) < 0:
            raise ValueError("dimension vector does not match the quiver")
        mats = {}
        for a in self.quiver.arrows:
            if a.id not in self.mats:
                raise ValueError(f"missing matrix for arrow {a.id}")
            m = np.asarray(self.mats[a.id])
            shape = (self.dim[a.head], self.dim[a.tail])
            if m.shape != shape:
                raise ValueError(f"arrow {a.id}: shape {m.shape}, expected {shape}")
            if self.field == EXACT:
                if m.size and (m.dtype != object or not all(isinstance(c, QQ_I.dtype) for c in m.flat)):
                    raise ValueError(f"arrow {a.id}: exact representation needs QQ_I entries")
                if not m.size:
                    m = ex.zeros(*shape)
            else:
                if m.dtype == object:
                    raise ValueError(f"arrow {a.id}: float representation got exact entries")
                m = m.astype(complex)
            mats[a.id] = m
        extra = set(self.mats) - set(mats)
        if extra:
            raise ValueError(f"matrices for unknown arrows {sorted(extra)}")
        object.__setattr__(self, "mats", mats)

    @property
    def exact(self) -> bool:
        return self.field == EXACT

    @property
    def total_dim(self) -> int:
        return sum(self.dim)

    def __getitem__(self, arrow_id: str) -> np.ndarray:
        return self.mats[arrow_id]

    def zeros(self, rows: int, cols: int) -> np.ndarray:
        return ex.zeros(rows, cols) if self.exact else np.zeros((rows, cols), dtype=complex)

    def largest_norm(self) -> float:
        return max((ex.frobenius(m) for m in self.mats.values()), default=0.0)

    def to_float(self) -> "Representation":
        if not self.exact:
            return self
        mats = {k: np.vectorize(ex.to_complex, otypes=[complex])(m) if m.size else
                np.zeros(m.shape, dtype=complex) for k, m in self.mats.items()}
        return Representation(self.quiver, self.dim, mats, FLOAT)

    @classmethod
    def zero(cls, quiver: Quiver, dim: Sequence[int], field: str = EXACT) -> "Representation":
        mats = {}
        for a in quiver.arrows:
            shape = (dim[a.head], dim[a.tail])
            mats[a.id] = ex.zeros(*shape) if field == EXACT else np.zeros(shape, dtype=complex)
        return cls(quiver, tuple(dim), mats, field)

    @classmethod
    def thin(cls, quiver: Quiver, values: Mapping[str, object], field: str = EXACT) -> "Representation":
        """Dimension vector (1,...,1) from one scalar per arrow; missing arrows are zero."""
        mats = {}
        for a in quiver.arrows:
            v = values.get(a.id, 0)
            if field == EXACT:
                mats[a.id] = ex.exact_matrix([[v]])
            else:
                mats[a.id] = np.array([[complex(v)]])
        return cls(quiver, (1,) * len(quiver.vertices), mats, field)


def default_tolerance(v: Representation) -> float:
    """0 for exact data; 1e-9 scaled by the largest matrix norm otherwise."""
    if v.exact:
        return 0.0
    return DEFAULT_TOL * max(1.0, v.largest_norm())


def _resolve_tol(v: Representation, tol: float | None) -> float:
    if tol is None:
        return default_tolerance(v)
    if v.exact and tol != 0:
        raise ValueError("exact representations require tol = 0")
    return float(tol)


# -- relations ------------------------------------------------------------


def moment_map(v: Representation) -> list[np.ndarray]:
    """mu(x)_i = sum_{h(a)=i} x_a x_a* - sum_{t(a)=i} x_a* x_a over plain arrows a."""
    q = v.quiver
    out = [v.zeros(d, d) for d in v.dim]
    for a in q.plain:
        s = q.star(a)
        out[a.head] = out[a.head] + ex.matmul(v[a.id], v[s.id])
        out[a.tail] = out[a.tail] - ex.matmul(v[s.id], v[a.id])
    return out


@dataclass(frozen=True)
class ResidualReport:
    vertex: tuple[float, ...]
    commutation: dict = field(default_factory=dict)
    max_residual: float = 0.0
    exact: bool = False

    @property
    def is_zero(self) -> bool:
        return self.max_residual == 0.0


def relation_residual(v: Representation, tau: TauPolys) -> ResidualReport:
    q = v.quiver
    if len(tau) != len(v.dim):
        raise ValueError(f"tau has {len(tau)} components but the quiver has {len(v.dim)} vertices")
    if not q.is_hatted:
        raise ValueError("relation_residual needs a representation of the hatted quiver")
    mu = moment_map(v)
    vertex = []
    for i, d in enumerate(v.dim):
        loop = v[q.loop(i).id]
        r = mu[i] - ex.evaluate(tau[i], loop) if d else mu[i]
        vertex.append(ex.frobenius(r))
    comm = {}
    for a in q.arrows:
        if a.kind == LOOP:
            continue
        r = ex.matmul(v[a.id], v[q.loop(a.tail).id]) - ex.matmul(v[q.loop(a.head).id], v[a.id])
        comm[a.id] = ex.frobenius(r)
    max_r = max(list(vertex) + list(comm.values()), default=0.0)
    return ResidualReport(tuple(vertex), comm, max_r, v.exact)


def is_representation(v: Representation, tau: TauPolys, tol: float | None = None) -> bool:
    return relation_residual(v, tau).max_residual <= _resolve_tol(v, tol)


def trace_identity(v: Representation, tau: TauPolys, tol: float | None = None):
    """sum_i tr tau_i(x_{u_i}); vanishes on every representation of the algebra."""
    if not is_representation(v, tau, tol):
        raise NotARepresentationError("trace identity requires a representation of the algebra")
    total = ex.ZERO if v.exact else 0j
    for i, d in enumerate(v.dim):
        if d:
            m = ex.evaluate(tau[i], v[v.quiver.loop(i).id])
            total = total + (sum(m.diagonal(), ex.ZERO) if v.exact else complex(np.trace(m)))
    return total


def scalar_loop_lambda(v: Representation, tol: float | None = None):
    """Common scalar lambda with x_{u_i} = lambda * I for all i, or None."""
    tol = _resolve_tol(v, tol)
    lam = None
    for i, d in enumerate(v.dim):
        if not d:
            continue
        m = v[v.quiver.loop(i).id]
        if lam is None:
            lam = m[0, 0]
        diff = m - (ex.identity(d) if v.exact else np.eye(d)) * lam
        if ex.frobenius(diff) > tol:
            return None
    return lam


def central_constraint(alpha: Sequence[int], tau: TauPolys, lam):
    """sum_i alpha_i tau_i(lambda)."""
    vals = tau.at(lam)
    total = ex.ZERO if isinstance(vals[0], QQ_I.dtype) else 0j
    for a, t in zip(alpha, vals):
        total = total + t * int(a)
    return total


# -- simplicity -----------------------------------------------------------


def _block_embed(v: Representation, mat: np.ndarray, tail: int, head: int) -> np.ndarray:
    offs = np.concatenate([[0], np.cumsum(v.dim)]).astype(int)
    big = ex.zeros(v.total_dim, v.total_dim)
    big[offs[head]:offs[head + 1], offs[tail]:offs[tail + 1]] = mat
    return big


def _primitive(vec: list) -> list[int]:
    """Clear denominators and content: QQ_I vector -> list of Gaussian-integer pairs."""
    den = 1
    for c in vec:
        den = math.lcm(den, int(c.x.denominator), int(c.y.denominator))
    ints = [(int(c.x * den), int(c.y * den)) for c in vec]
    return _remove_content(ints)


def _remove_content(ints: list) -> list:
    g = 0
    for re, im in ints:
        g = math.gcd(g, re, im)
    if g > 1:
        ints = [(re // g, im // g) for re, im in ints]
    return ints


def _gmul(a, b):
    return (a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0])


def _gsub(a, b):
    return (a[0] - b[0], a[1] - b[1])


class _FractionFreeSpan:
    """Incremental echelon basis over Z[i] using cross-multiplication (no division)."""

    def __init__(self):
        self.rows: dict[int, list] = {}

    def __len__(self) -> int:
        return len(self.rows)

    def add(self, vec: list) -> bool:
        w = _primitive(vec)
        for p in sorted(self.rows):
            c = w[p]
            if c == (0, 0):
                continue
            row = self.rows[p]
            piv = row[p]
            w = [_gsub(_gmul(piv, x), _gmul(c, y)) for x, y in zip(w, row)]
            w = _remove_content(w)
        lead = next((k for k, c in enumerate(w) if c != (0, 0)), None)
        if lead is None:
            return False
        self.rows[lead] = w
        return True


def burnside_closure_dim(v: Representation) -> int:
    """Dimension of the algebra generated by the vertex idempotents and all arrow matrices."""
    if not v.exact:
        raise ValueError("Burnside simplicity needs exact input; rank decisions on floats are unreliable")
    n = v.total_dim
    if n == 0:
        raise ValueError("total dimension must be at least 1")
    gens = [_block_embed(v, v[a.id], a.tail, a.head) for a in v.quiver.arrows if v.dim[a.tail] and v.dim[a.head]]
    idem = [_block_embed(v, ex.identity(d), i, i) for i, d in enumerate(v.dim) if d]
    span = _FractionFreeSpan()
    queue = idem + gens
    while queue and len(span) < n * n:
        m = queue.pop()
        if span.add(list(m.flat)):
            queue.extend(ex.matmul(g, m) for g in gens)
    return len(span)


def is_simple_burnside(v: Representation) -> bool:
    return burnside_closure_dim(v) == v.total_dim ** 2


# -- thin subrepresentations and stability ---------------------------------


def _nonzero(m: np.ndarray, tol: float) -> bool:
    if m.size == 0:
        return False
    if m.dtype == object:
        return not ex.is_exact_zero(m)
    return float(np.max(np.abs(m))) > tol


def closed_supports(v: Representation, tol: float | None = None) -> list[frozenset]:
    """Vertex subsets S of the support with no nonzero arrow leaving S.

    For thin dimension vectors these are exactly the subrepresentations.
    """
    if max(v.dim, default=0) > 1:
        raise ValueError("closed_supports needs a thin dimension vector (entries <= 1)")
    tol = _resolve_tol(v, tol)
    support = [i for i, d in enumerate(v.dim) if d]
    edges = [(a.tail, a.head) for a in v.quiver.arrows
             if a.kind != LOOP and v.dim[a.tail] and v.dim[a.head] and _nonzero(v[a.id], tol)]
    out = []
    for r in range(len(support) + 1):
        for combo in itertools.combinations(support, r):
            s = frozenset(combo)
            if all(h in s for t, h in edges if t in s):
                out.append(s)
    return out


STABLE = "stable"
SEMISTABLE = "semistable-not-stable"
UNSTABLE = "unstable"
UNDECIDED = "undecided"


@dataclass(frozen=True)
class StabilityVerdict:
    status: str
    witness: frozenset | None = None
    method: str = "none"

    def __post_init__(self):
        if (self.witness is not None) != (self.status in (SEMISTABLE, UNSTABLE)):
            raise ValueError("witness must be present exactly for unstable or strictly semistable verdicts")


def theta_stability(v: Representation, theta: Sequence[int], tol: float | None = None) -> StabilityVerdict:
    """King's subobject criterion: theta(S) > 0 (stable) or >= 0 (semistable) on proper subobjects."""
    if not validate_theta(theta, v.dim):
        raise ValueError("theta . dim must vanish")
    if max(v.dim, default=0) <= 1:
        full = frozenset(i for i, d in enumerate(v.dim) if d)
        worst = None
        for s in closed_supports(v, tol):
            if not s or s == full:
                continue
            w = sum(theta[i] for i in s)
            if worst is None or w < worst[0]:
                worst = (w, s)
        if worst is None or worst[0] > 0:
            return StabilityVerdict(STABLE, None, "thin-enumeration")
        status = UNSTABLE if worst[0] < 0 else SEMISTABLE
        return StabilityVerdict(status, worst[1], "thin-enumeration")
    if v.exact and is_simple_burnside(v):
        return StabilityVerdict(STABLE, None, "burnside-simple")
    return StabilityVerdict(UNDECIDED, None, "none")


def loop_endomorphism_check(v: Representation) -> bool:
    """Simple implies scalar loops; True when the implication holds for ``v``."""
    return (not is_simple_burnside(v)) or scalar_loop_lambda(v) is not None


# -- constructions --------------------------------------------------------


def direct_sum(v: Representation, w: Representation) -> Representation:
    if v.quiver != w.quiver or v.field != w.field:
        raise ValueError("direct sum needs matching quivers and fields")
    dim = tuple(a + b for a, b in zip(v.dim, w.dim))
    mats = {}
    for a in v.quiver.arrows:
        m = v.zeros(dim[a.head], dim[a.tail])
        x, y = v[a.id], w[a.id]
        m[: x.shape[0], : x.shape[1]] = x
        m[x.shape[0]:, x.shape[1]:] = y
        mats[a.id] = m
    return Representation(v.quiver, dim, mats, v.field)


def conjugate(v: Representation, g: Sequence[np.ndarray]) -> Representation:
    """Action of GL(dim): x_a -> g_{h(a)} x_a g_{t(a)}^{-1}."""
    if v.exact:
        inv = [ex.exact_inverse(m) if m.size else m for m in g]
    else:
        inv = [np.linalg.inv(m) if m.size else m for m in g]
    mats = {a.id: ex.matmul(ex.matmul(g[a.head], v[a.id]), inv[a.tail]) for a in v.quiver.arrows}
    return Representation(v.quiver, v.dim, mats, v.field)
