"""Cartan data for simply-laced Dynkin diagrams and the genericity test on t.

Vertex labels follow Bourbaki for the finite diagram (1..n); the extending
vertex of the affine diagram is 0.  For type A the affine diagram is the
cycle 0-1-...-n-0, so vertex i is adjacent to i+1 mod n+1.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import sympy
from sympy import Poly

from . import exact as ex

FAMILIES = ("A", "D", "E")


@dataclass(frozen=True)
class DynkinType:
    family: str
    rank: int

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown Dynkin family {self.family!r}")
        ok = {
            "A": self.rank >= 1,
            "D": self.rank >= 4,
            "E": self.rank in (6, 7, 8),
        }[self.family]
        if not ok:
            raise ValueError(f"invalid rank {self.rank} for type {self.family}")

    def __str__(self) -> str:
        return f"{self.family}{self.rank}"

    @property
    def n_vertices(self) -> int:
        """Vertex count of the extended diagram."""
        return self.rank + 1


def all_types(max_rank: int = 8) -> list[DynkinType]:
    out = [DynkinType("A", n) for n in range(1, max_rank + 1)]
    out += [DynkinType("D", n) for n in range(4, max_rank + 1)]
    out += [DynkinType("E", n) for n in (6, 7, 8) if n <= max_rank]
    return out


def finite_edges(t: DynkinType) -> list[tuple[int, int]]:
    n = t.rank
    if t.family == "A":
        return [(i, i + 1) for i in range(1, n)]
    if t.family == "D":
        return [(i, i + 1) for i in range(1, n - 1)] + [(n - 2, n)]
    return [(1, 3)] + [(i, i + 1) for i in range(3, n)] + [(2, 4)]


def affine_edges(t: DynkinType) -> list[tuple[int, int]]:
    """Edges of the extended diagram; Ã_1 yields the double edge (0,1), (1,0)."""
    n = t.rank
    if t.family == "A":
        return [(i, (i + 1) % (n + 1)) for i in range(n + 1)]
    if t.family == "D":
        return [(0, 2)] + finite_edges(t)
    attach = {6: 2, 7: 1, 8: 8}[n]
    return [(0, attach)] + finite_edges(t)


def _cartan(size: int, edges: Sequence[tuple[int, int]], offset: int) -> np.ndarray:
    c = 2 * np.eye(size, dtype=int)
    for i, j in edges:
        c[i - offset, j - offset] -= 1
        c[j - offset, i - offset] -= 1
    return c


@dataclass(frozen=True)
class CartanMatrix:
    entries: np.ndarray = field(compare=False)
    labeling: tuple[int, ...]

    def __eq__(self, other):
        return (isinstance(other, CartanMatrix) and self.labeling == other.labeling
                and np.array_equal(self.entries, other.entries))

    def __hash__(self):
        return hash((self.labeling, self.entries.tobytes()))

    def tolist(self) -> list[list[int]]:
        return self.entries.tolist()


def cartan_matrix(t: DynkinType) -> CartanMatrix:
    """Finite-type Cartan matrix, rows/columns labelled 1..n."""
    return CartanMatrix(_cartan(t.rank, finite_edges(t), 1), tuple(range(1, t.rank + 1)))


def affine_cartan_matrix(t: DynkinType) -> CartanMatrix:
    """Extended-diagram Cartan matrix, rows/columns labelled 0..n."""
    return CartanMatrix(_cartan(t.rank + 1, affine_edges(t), 0), tuple(range(t.rank + 1)))


def delta(t: DynkinType) -> tuple[int, ...]:
    """Primitive positive kernel vector of the affine Cartan matrix (delta_0 = 1)."""
    m = sympy.Matrix(affine_cartan_matrix(t).tolist())
    ker = m.nullspace()
    if len(ker) != 1:
        raise ArithmeticError(f"affine Cartan matrix of {t} has kernel dimension {len(ker)}")
    v = ker[0]
    denom = sympy.ilcm(*[sympy.fraction(sympy.nsimplify(e))[1] for e in v])
    ints = [int(e * denom) for e in v]
    g = sympy.igcd(*ints)
    ints = [e // g for e in ints]
    if ints[0] < 0:
        ints = [-e for e in ints]
    if ints[0] != 1 or min(ints) <= 0:
        raise ArithmeticError(f"unexpected kernel vector {ints} for {t}")
    return tuple(ints)


def positive_roots(t: DynkinType) -> list[tuple[int, ...]]:
    """All positive roots in simple-root coordinates, sorted by (height, coords).

    Grows the root set from the simple roots: whenever <beta, alpha_i^vee> < 0
    the reflection s_i(beta) is a higher positive root.
    """
    c = cartan_matrix(t).entries
    n = t.rank
    simple = [tuple(int(i == j) for j in range(n)) for i in range(n)]
    seen = set(simple)
    frontier = list(simple)
    while frontier:
        nxt = []
        for beta in frontier:
            pairing = c @ np.array(beta)
            for i in range(n):
                if pairing[i] < 0:
                    gamma = list(beta)
                    gamma[i] -= int(pairing[i])
                    gamma = tuple(gamma)
                    if gamma not in seen:
                        seen.add(gamma)
                        nxt.append(gamma)
        frontier = nxt
    return sorted(seen, key=lambda r: (sum(r), r))


def root_norm(t: DynkinType, root: Sequence[int]) -> int:
    r = np.array(root)
    return int(r @ cartan_matrix(t).entries @ r)


# -- fibration data and genericity ---------------------------------------


@dataclass(frozen=True)
class FibrationData:
    """The polynomial map t: C -> h.

    ``form`` is "t" (type A only: eigenvalue polynomials t_0..t_n with
    tau_i = t_i - t_{i+1}) or "tau" (one polynomial per affine vertex with
    sum_i delta_i tau_i = 0).
    """

    dtype: DynkinType
    polys: tuple[Poly, ...]
    form: str = "t"

    def __post_init__(self):
        if self.form not in ("t", "tau"):
            raise ValueError(f"unknown fibration form {self.form!r}")
        if self.form == "t" and self.dtype.family != "A":
            raise ValueError("eigenvalue form 't' is only defined for type A")
        if len(self.polys) != self.dtype.n_vertices:
            raise ValueError(
                f"{self.dtype} needs {self.dtype.n_vertices} polynomials, got {len(self.polys)}")
        if self.form == "tau":
            d = delta(self.dtype)
            total = ex.zero_poly()
            for di, p in zip(d, self.polys):
                total = total + p * di
            if not total.is_zero:
                raise ValueError(f"sum delta_i tau_i = {total.as_expr()} is not zero")

    @classmethod
    def from_coeffs(cls, dtype: DynkinType, coeff_lists, form: str = "t") -> "FibrationData":
        return cls(dtype, tuple(ex.poly(cs) for cs in coeff_lists), form)

    @property
    def n(self) -> int:
        return self.dtype.rank

    def tau(self) -> tuple[Poly, ...]:
        if self.form == "tau":
            return self.polys
        m = len(self.polys)
        return tuple(self.polys[i] - self.polys[(i + 1) % m] for i in range(m))

    def eigenvalues(self) -> tuple[Poly, ...]:
        """t_0..t_n for type A; recovered from tau with sum_i t_i = 0 when needed."""
        if self.dtype.family != "A":
            raise ValueError("eigenvalue polynomials exist only for type A")
        if self.form == "t":
            return self.polys
        m = len(self.polys)
        partial = [ex.zero_poly()]
        for i in range(1, m):
            partial.append(partial[-1] + self.polys[i - 1])
        shift = ex.zero_poly()
        for p in partial:
            shift = shift + p
        shift = shift * sympy.Rational(1, m)
        return tuple(shift - p for p in partial)


@dataclass(frozen=True)
class Violation:
    root: tuple[int, ...]
    poly: Poly
    kind: str  # "identically-zero" or "multiple-root"
    points: tuple = ()


@dataclass(frozen=True)
class GenericityReport:
    generic: bool
    violations: tuple[Violation, ...]


def root_polynomial(f: FibrationData, root: Sequence[int]) -> Poly:
    """rho(t(lambda)) = sum_i rho_i tau_i(lambda) over finite vertices 1..n.

    For type A in eigenvalue form this is t_i - t_{j+1} for the root
    e_i + ... + e_j.
    """
    tau = f.tau()
    acc = ex.zero_poly()
    for i, r in enumerate(root, start=1):
        if r:
            acc = acc + tau[i] * r
    return acc


def genericity_check(f: FibrationData) -> GenericityReport:
    violations = []
    for rho in positive_roots(f.dtype):
        p = root_polynomial(f, rho)
        if p.is_zero:
            violations.append(Violation(rho, p, "identically-zero"))
            continue
        g = ex.repeated_factor(p)
        if g is not None:
            pts = tuple(r for r, _ in ex.roots(g))
            violations.append(Violation(rho, p, "multiple-root", pts))
    return GenericityReport(not violations, tuple(violations))
