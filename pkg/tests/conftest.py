"""Shared fixtures, hypothesis strategies and independent oracles.

The oracles here deliberately avoid the library's own code paths: they use
plain sympy expressions, float linear algebra or brute-force enumeration.
"""
from __future__ import annotations

import itertools
import random
from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import strategies as st

from adeq import exact as ex
from adeq.dynkin import DynkinType, FibrationData
from adeq.quiver import hatted_quiver
from adeq.rep import Representation

# -- strategies ----------------------------------------------------------

small_fractions = st.fractions(min_value=-5, max_value=5, max_denominator=4)
exact_scalars = st.builds(ex.gaussian, small_fractions, small_fractions)
nonzero_exact = exact_scalars.filter(bool)


@st.composite
def type_a_fibrations(draw, max_n=3, max_degree=2):
    n = draw(st.integers(1, max_n))
    deg = draw(st.integers(0, max_degree))
    coeffs = [[draw(exact_scalars) for _ in range(deg + 1)] for _ in range(n + 1)]
    return FibrationData.from_coeffs(DynkinType("A", n), coeffs)


def random_type_a(rng: random.Random, n: int, degree: int) -> FibrationData:
    coeffs = [[ex.random_exact(rng) for _ in range(degree + 1)] for _ in range(n + 1)]
    return FibrationData.from_coeffs(DynkinType("A", n), coeffs)


def worked_a1():
    """t = (lambda, -lambda); x = (1, 1), y = (-1, 1); loops 1."""
    t = DynkinType("A", 1)
    f = FibrationData.from_coeffs(t, [[0, 1], [0, -1]])
    v = Representation.thin(hatted_quiver(t), {"a0": 1, "a0*": -1, "a1": 1, "a1*": 1, "u0": 1, "u1": 1})
    return f, v


@pytest.fixture
def a1_example():
    return worked_a1()


# -- oracles -------------------------------------------------------------

LAM = sympy.Symbol("lam")
XS = sympy.symbols("x y z lam")


def sym(c) -> sympy.Expr:
    """QQ_I element as a sympy number."""
    return sympy.Rational(int(c.x.numerator), int(c.x.denominator)) + sympy.I * sympy.Rational(
        int(c.y.numerator), int(c.y.denominator))


def poly_expr(p, var=LAM) -> sympy.Expr:
    return sum(sym(c) * var ** k for k, c in enumerate(ex.coeffs(p)))


def oracle_threefold(f: FibrationData) -> sympy.Expr:
    x, y, z, lam = XS
    ts = [poly_expr(t, lam) for t in f.eigenvalues()]
    m = len(ts)
    return sympy.expand(x * y - sympy.prod([z + ts[(i + 1) % m] for i in range(m)]))


def oracle_burnside_dim(v: Representation) -> int:
    """Dimension of the algebra generated by block-embedded arrows and vertex
    idempotents: grow the span under left multiplication by generators, with
    float SVD ranks."""
    off = np.concatenate([[0], np.cumsum(v.dim)]).astype(int)
    total = int(off[-1])
    gens = []
    for i, d in enumerate(v.dim):
        e = np.zeros((total, total), dtype=complex)
        e[off[i]:off[i + 1], off[i]:off[i + 1]] = np.eye(d)
        gens.append(e)
    vf = v.to_float()
    for a in v.quiver.arrows:
        m = np.zeros((total, total), dtype=complex)
        m[off[a.head]:off[a.head + 1], off[a.tail]:off[a.tail + 1]] = vf[a.id]
        gens.append(m)
    basis, rank = list(gens), -1
    while True:
        cand = basis + [g @ b for g in gens for b in basis]
        s_vals, vh = np.linalg.svd(np.array([m.ravel() for m in cand]), full_matrices=False)[1:]
        r = int((s_vals > 1e-9 * max(1.0, s_vals[0])).sum())
        basis = [vh[k].reshape(total, total) for k in range(r)]
        if r == rank:
            return r
        rank = r


def oracle_subrep_supports(v: Representation) -> set[frozenset]:
    """Thin case: supports S whose span is invariant under every arrow matrix."""
    n = len(v.dim)
    vf = v.to_float()
    out = set()
    for r in range(n + 1):
        for s in itertools.combinations(range(n), r):
            proj = np.diag([0.0 if i in s else 1.0 for i in range(n)])
            ok = True
            for a in v.quiver.arrows:
                m = np.zeros((n, n), dtype=complex)
                m[a.head, a.tail] = vf[a.id][0, 0]
                for i in s:
                    vec = np.zeros(n)
                    vec[i] = 1
                    if np.linalg.norm(proj @ (m @ vec)) > 1e-12:
                        ok = False
            if ok:
                out.add(frozenset(s))
    return out


def random_pattern(n: int, rng: random.Random, p_zero=0.4, lam=ex.ONE) -> Representation:
    """Thin rep of the hatted cyclic quiver with random zero/nonzero doubled arrows."""
    q = hatted_quiver(DynkinType("A", n))
    values = {}
    for a in q.arrows:
        if a.kind == "loop":
            values[a.id] = lam
        else:
            values[a.id] = ex.ZERO if rng.random() < p_zero else ex.random_exact(rng, nonzero=True)
    return Representation.thin(q, values)


def fr(x) -> Fraction:
    return Fraction(x)


# -- acceptance reporting --------------------------------------------------

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
