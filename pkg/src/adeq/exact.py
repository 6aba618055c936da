"""Exact Gaussian-rational scalars and univariate polynomials.

Scalars live in sympy's ``QQ_I`` domain (a + b*i with a, b rational).
Polynomials are ``sympy.Poly`` objects in the generator ``u`` over ``QQ_I``.

Note that ``QQ_I(0) == 0`` is False in sympy; test for zero with ``not c``.
"""
from __future__ import annotations

import math
import random
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np
from sympy import QQ, QQ_I, Poly, Symbol

U = Symbol("u")

ZERO = QQ_I.zero
ONE = QQ_I.one


class EncodingError(ValueError):
    """Raised for malformed scalar or polynomial encodings."""


def exact(value) -> "QQ_I.dtype":
    """Coerce ints, Fractions, "p/q" strings and QQ_I elements to QQ_I."""
    if isinstance(value, QQ_I.dtype):
        return value
    if isinstance(value, bool):
        raise EncodingError(f"boolean is not a scalar: {value!r}")
    if isinstance(value, int):
        return QQ_I(value)
    if isinstance(value, Fraction):
        return QQ_I(QQ(value.numerator, value.denominator))
    if isinstance(value, str):
        try:
            fr = Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise EncodingError(f"cannot parse exact scalar {value!r}") from exc
        return exact(fr)
    if isinstance(value, (list, tuple)):
        return decode_exact(value)
    raise EncodingError(f"not an exact scalar: {value!r}")


def gaussian(re, im=0) -> "QQ_I.dtype":
    """Build re + im*i from two rationals (ints, Fractions or strings)."""
    r, i = Fraction(re), Fraction(im)
    return QQ_I(QQ(r.numerator, r.denominator), QQ(i.numerator, i.denominator))


def encode_exact(c) -> list[int]:
    """Quadruple encoding ``[re_num, re_den, im_num, im_den]``."""
    c = exact(c)
    return [int(c.x.numerator), int(c.x.denominator), int(c.y.numerator), int(c.y.denominator)]


def decode_exact(obj) -> "QQ_I.dtype":
    """Inverse of :func:`encode_exact`; also accepts bare ints and "p/q" strings."""
    if isinstance(obj, (int, str, Fraction)) and not isinstance(obj, bool):
        return exact(obj)
    if isinstance(obj, (list, tuple)) and len(obj) == 4 and all(
        isinstance(v, int) and not isinstance(v, bool) for v in obj
    ):
        rn, rd, im_n, im_d = obj
        if rd == 0 or im_d == 0:
            raise EncodingError(f"zero denominator in {obj!r}")
        return QQ_I(QQ(rn, rd), QQ(im_n, im_d))
    raise EncodingError(f"malformed exact scalar {obj!r}")


def to_complex(c) -> complex:
    if isinstance(c, QQ_I.dtype):
        return complex(float(c.x), float(c.y))
    return complex(c)


def abs2(c) -> Fraction:
    """Exact squared modulus of a Gaussian rational."""
    return Fraction(int(c.x.numerator), int(c.x.denominator)) ** 2 + Fraction(
        int(c.y.numerator), int(c.y.denominator)
    ) ** 2


def random_exact(rng: random.Random, bound: int = 4, denom: int = 3, imaginary: bool = True,
                 nonzero: bool = False):
    while True:
        re = Fraction(rng.randint(-bound * denom, bound * denom), rng.randint(1, denom))
        im = Fraction(rng.randint(-bound * denom, bound * denom), rng.randint(1, denom)) if imaginary else 0
        c = gaussian(re, im)
        if c or not nonzero:
            return c


# -- polynomials ---------------------------------------------------------


def poly(coeffs: Sequence) -> Poly:
    """Polynomial in ``u`` from ascending-degree coefficients."""
    desc = [exact(c) for c in reversed(list(coeffs))] or [ZERO]
    return Poly.from_list(desc, U, domain=QQ_I)


def zero_poly() -> Poly:
    return poly([0])


def coeffs(p: Poly) -> list:
    """Ascending-degree coefficients as QQ_I elements (at least one entry)."""
    desc = p.rep.to_list()
    return list(reversed(desc)) if desc else [ZERO]


def poly_to_json(p: Poly) -> list[list[int]]:
    return [encode_exact(c) for c in coeffs(p)]


def poly_from_json(obj) -> Poly:
    if not isinstance(obj, (list, tuple)) or not obj:
        raise EncodingError(f"polynomial must be a non-empty coefficient list, got {obj!r}")
    return poly([decode_exact(c) for c in obj])


def evaluate(p: Poly, value):
    """Evaluate at an exact scalar, a Python/numpy complex, or a square matrix.

    Exact input gives an exact result; float input gives complex; matrices are
    evaluated by Horner's rule with the identity of matching dtype.
    """
    cs = coeffs(p)
    if isinstance(value, np.ndarray):
        n = value.shape[0]
        if value.dtype == object:
            eye = identity(n)
            acc = eye * cs[-1]
            for c in reversed(cs[:-1]):
                acc = matmul(acc, value) + eye * c
            return acc
        eye = np.eye(n, dtype=complex)
        acc = to_complex(cs[-1]) * eye
        for c in reversed(cs[:-1]):
            acc = acc @ value + to_complex(c) * eye
        return acc
    if isinstance(value, QQ_I.dtype) or isinstance(value, (int, Fraction)):
        v = exact(value)
        acc = ZERO
        for c in reversed(cs):
            acc = acc * v + c
        return acc
    v = complex(value)
    acc = 0j
    for c in reversed(cs):
        acc = acc * v + to_complex(c)
    return acc


def derivative(p: Poly) -> Poly:
    return p.diff(U)


def antiderivative(p: Poly) -> Poly:
    """Antiderivative with zero constant term."""
    cs = coeffs(p)
    return poly([ZERO] + [c * QQ_I(QQ(1, k + 1)) for k, c in enumerate(cs)])


def is_zero_poly(p: Poly) -> bool:
    return p.is_zero


def repeated_factor(p: Poly) -> Poly | None:
    """gcd(p, p') when non-constant, else None. ``p`` must be nonzero."""
    g = p.gcd(derivative(p))
    return g if g.degree() >= 1 else None


def roots(p: Poly) -> list[tuple[object, int]]:
    """Roots with multiplicity: exact QQ_I for linear factors over QQ_I, complex otherwise."""
    out: list[tuple[object, int]] = []
    if p.degree() <= 0:
        return out
    _, factors = p.factor_list()
    for fac, mult in factors:
        cs = coeffs(fac)
        if fac.degree() == 1:
            out.append((-cs[0] / cs[1], mult))
        else:
            desc = [to_complex(c) for c in reversed(cs)]
            out.extend((complex(r), mult) for r in np.roots(desc))
    return out


# -- exact matrices (numpy object arrays of QQ_I) -------------------------


def zeros(rows: int, cols: int) -> np.ndarray:
    m = np.empty((rows, cols), dtype=object)
    m.fill(ZERO)
    return m


def identity(n: int) -> np.ndarray:
    m = zeros(n, n)
    for i in range(n):
        m[i, i] = ONE
    return m


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Matrix product that keeps exact arrays exact when the inner dimension is 0."""
    if a.dtype == object or b.dtype == object:
        if a.shape[1] == 0:
            return zeros(a.shape[0], b.shape[1])
        return a @ b
    return a @ b


def exact_matrix(rows: Iterable[Iterable]) -> np.ndarray:
    rows = [[exact(v) for v in row] for row in rows]
    if not rows:
        return zeros(0, 0)
    m = zeros(len(rows), len(rows[0]))
    for i, row in enumerate(rows):
        if len(row) != m.shape[1]:
            raise EncodingError("ragged matrix")
        for j, v in enumerate(row):
            m[i, j] = v
    return m


def exact_inverse(m: np.ndarray) -> np.ndarray:
    from sympy.polys.matrices import DomainMatrix

    n = m.shape[0]
    dm = DomainMatrix([list(row) for row in m], (n, n), QQ_I)
    inv = dm.inv().to_list()
    return exact_matrix(inv)


def frobenius(m: np.ndarray) -> float:
    if m.size == 0:
        return 0.0
    if m.dtype == object:
        return math.sqrt(sum(abs2(c) for c in m.flat))
    return float(np.linalg.norm(m))


def is_exact_zero(m: np.ndarray) -> bool:
    return all(not c for c in m.flat)
