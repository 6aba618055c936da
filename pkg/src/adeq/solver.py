"""Points of the representation locus with scalar loops.

Type A has an exact closed-form construction.  For D/E the moment-map
equations mu(x)_i = tau_i(lambda) I are solved by damped least squares
(Levenberg-Marquardt) on the real and imaginary parts of the arrow matrices.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from sympy import QQ_I

from . import exact as ex
from .dynkin import DynkinType, FibrationData, delta
from .quiver import ConstraintError, Quiver, TauPolys, hatted_quiver, tau_from_fibration
from .rep import FLOAT, Representation, is_simple_burnside


@dataclass(frozen=True)
class SolveOptions:
    max_iterations: int = 2000
    residual_target: float = 1e-10
    damping: float = 1e-3
    seed: int = 0
    start: str = "random"  # or "zero"

    def __post_init__(self):
        if self.residual_target <= 0:
            raise ValueError("residual_target must be positive")
        if self.start not in ("random", "zero"):
            raise ValueError(f"unknown start {self.start!r}")


@dataclass
class SolveResult:
    rep: Representation
    residual: float
    iterations: int
    converged: bool
    history: list[float] = field(default_factory=list, repr=False)


# -- type A --------------------------------------------------------------


def construct_type_a(f: FibrationData, lam, z_value, x_choices: Sequence | None = None,
                     seed: int | None = None, zero_edge: str = "x") -> Representation:
    """Exact thin representation with loops lambda and x_i y_i = z_value + t_{i+1}(lambda).

    Edges with z_i = 0 get (x_i, y_i) = (x_choice or 1, 0) when ``zero_edge``
    is "x", (0, random nonzero) when it is "y", and (0, 0) when it is "zero".
    """
    if f.dtype.family != "A":
        raise ValueError("construct_type_a needs a type-A fibration")
    if zero_edge not in ("x", "y", "zero"):
        raise ValueError("zero_edge must be 'x', 'y' or 'zero'")
    rng = random.Random(seed)
    lam, z_value = ex.exact(lam), ex.exact(z_value)
    ts = [ex.evaluate(t, lam) for t in f.eigenvalues()]
    m = len(ts)
    if x_choices is not None and len(x_choices) != m:
        raise ValueError(f"need {m} x choices")
    values = {}
    for i in range(m):
        zi = z_value + ts[(i + 1) % m]
        xi = ex.exact(x_choices[i]) if x_choices is not None else ex.random_exact(rng, nonzero=True)
        if x_choices is not None and not xi:
            raise ValueError("x choices must be nonzero")
        if zi:
            yi = zi / xi
        elif zero_edge == "x":
            xi, yi = (xi if x_choices is not None else ex.ONE), ex.ZERO
        elif zero_edge == "y":
            xi, yi = ex.ZERO, ex.random_exact(rng, nonzero=True)
        else:
            xi, yi = ex.ZERO, ex.ZERO
        values[f"a{i}"] = xi
        values[f"a{i}*"] = yi
        values[f"u{i}"] = lam
    return Representation.thin(hatted_quiver(f.dtype), values)


# -- least squares for the moment map -------------------------------------


class MomentMapProblem:
    """Residual r(x) = mu(x) - tau(lambda) I packed as a real vector."""

    def __init__(self, quiver: Quiver, dim: Sequence[int], targets: Sequence[complex]):
        self.quiver = quiver
        self.dim = tuple(dim)
        self.targets = [complex(t) for t in targets]
        self.blocks = []  # (arrow id, shape, offset) in complex entries
        off = 0
        for a in quiver.arrows:
            if a.kind == "loop":
                continue
            shape = (self.dim[a.head], self.dim[a.tail])
            self.blocks.append((a.id, shape, off))
            off += shape[0] * shape[1]
        self.n_complex = off
        self.res_offsets = np.concatenate([[0], np.cumsum([d * d for d in self.dim])]).astype(int)

    @property
    def size(self) -> int:
        return 2 * self.n_complex

    def unpack(self, x: np.ndarray) -> dict[str, np.ndarray]:
        c = x[: self.n_complex] + 1j * x[self.n_complex:]
        return {aid: c[o: o + s[0] * s[1]].reshape(s) for aid, s, o in self.blocks}

    def pack(self, mats: dict[str, np.ndarray]) -> np.ndarray:
        c = np.concatenate([np.asarray(mats[aid], dtype=complex).ravel() for aid, _, _ in self.blocks])
        return np.concatenate([c.real, c.imag])

    def _complex_residual(self, mats) -> np.ndarray:
        out = []
        q = self.quiver
        for i, d in enumerate(self.dim):
            acc = -self.targets[i] * np.eye(d, dtype=complex)
            for a in q.plain:
                s = a.star_of
                if a.head == i:
                    acc = acc + mats[a.id] @ mats[s]
                if a.tail == i:
                    acc = acc - mats[s] @ mats[a.id]
            out.append(acc.ravel())
        return np.concatenate(out) if out else np.zeros(0, dtype=complex)

    def residual(self, x: np.ndarray) -> np.ndarray:
        r = self._complex_residual(self.unpack(x))
        return np.concatenate([r.real, r.imag])

    def jacobian(self, x: np.ndarray) -> np.ndarray:
        """Real Jacobian of the (holomorphic) residual w.r.t. (Re x, Im x)."""
        mats = self.unpack(x)
        q = self.quiver
        col = {aid: (o, s) for aid, s, o in self.blocks}
        jc = np.zeros((int(self.res_offsets[-1]), self.n_complex), dtype=complex)
        for a in q.plain:
            s = a.star_of
            xa, xs = mats[a.id], mats[s]
            oa, sa = col[a.id]
            os_, ss = col[s]
            # vec_r(A X B) = (A kron B^T) vec_r(X)
            h, t = a.head, a.tail
            rh = slice(self.res_offsets[h], self.res_offsets[h + 1])
            rt = slice(self.res_offsets[t], self.res_offsets[t + 1])
            dh, dt = self.dim[h], self.dim[t]
            # + x_a x_s at the head
            jc[rh, oa: oa + sa[0] * sa[1]] += np.kron(np.eye(dh), xs.T)
            jc[rh, os_: os_ + ss[0] * ss[1]] += np.kron(xa, np.eye(dh))
            # - x_s x_a at the tail
            jc[rt, os_: os_ + ss[0] * ss[1]] -= np.kron(np.eye(dt), xa.T)
            jc[rt, oa: oa + sa[0] * sa[1]] -= np.kron(xs, np.eye(dt))
        return np.block([[jc.real, -jc.imag], [jc.imag, jc.real]])

    def objective(self, x: np.ndarray) -> float:
        r = self.residual(x)
        return 0.5 * float(r @ r)

    def gradient(self, x: np.ndarray) -> np.ndarray:
        return self.jacobian(x).T @ self.residual(x)


def gradient_fd_check(problem: MomentMapProblem, x: np.ndarray, h: float = 1e-6) -> float:
    """Max relative discrepancy between the analytic gradient and central differences."""
    g = problem.gradient(x)
    fd = np.empty_like(g)
    for k in range(len(x)):
        e = np.zeros_like(x)
        e[k] = h
        fd[k] = (problem.objective(x + e) - problem.objective(x - e)) / (2 * h)
    err = float(np.max(np.abs(fd - g))) if len(g) else 0.0
    if err == 0.0:
        return 0.0
    return err / max(float(np.max(np.abs(g))), np.finfo(float).tiny)


def _central_value(dtype: DynkinType, tau: TauPolys, lam):
    vals = tau.at(lam)
    total = sum((v * d for v, d in zip(vals, delta(dtype))), ex.ZERO if isinstance(vals[0], QQ_I.dtype) else 0j)
    return total, vals


def solve_moment_map(dtype: DynkinType, tau: TauPolys, lam, opts: SolveOptions | None = None,
                     orientation=None) -> SolveResult:
    """Levenberg-Marquardt solve of mu(x)_i = tau_i(lambda) I with loops pinned to lambda I."""
    opts = opts or SolveOptions()
    quiver = hatted_quiver(dtype, orientation)
    dim = delta(dtype)
    if len(tau) != len(dim):
        raise ValueError("tau does not match the quiver")
    central, vals = _central_value(dtype, tau, lam)
    targets = [ex.to_complex(v) for v in vals]
    scale = max([1.0] + [abs(t) for t in targets])
    if (not isinstance(central, QQ_I.dtype) and abs(central) > 1e-12 * scale) or (
            isinstance(central, QQ_I.dtype) and central):
        raise ConstraintError(f"sum delta_i tau_i(lambda) = {central} != 0")

    problem = MomentMapProblem(quiver, dim, targets)
    rng = np.random.default_rng(opts.seed)
    if opts.start == "zero":
        x = np.zeros(problem.size)
    else:
        x = rng.standard_normal(problem.size) * np.sqrt(scale / 2)

    def cost_of(r):
        return float(r @ r)

    r = problem.residual(x)
    cost = cost_of(r)
    history = [cost]
    mu = opts.damping
    it = 0
    while np.sqrt(cost) > opts.residual_target and it < opts.max_iterations:
        it += 1
        jac = problem.jacobian(x)
        g = jac.T @ r
        a = jac.T @ jac
        step = np.linalg.solve(a + mu * np.eye(len(x)), -g)
        x_new = x + step
        r_new = problem.residual(x_new)
        cost_new = cost_of(r_new)
        if cost_new < cost:
            x, r, cost = x_new, r_new, cost_new
            history.append(cost)
            mu = max(mu / 3.0, 1e-15)
        else:
            mu *= 2.0
            if mu > 1e16:
                break
    mats = problem.unpack(x)
    lam_c = ex.to_complex(ex.exact(lam)) if not isinstance(lam, (complex, float)) else complex(lam)
    for i in quiver.vertices:
        mats[f"u{i}"] = lam_c * np.eye(dim[i], dtype=complex)
    rep = Representation(quiver, dim, mats, FLOAT)
    residual = float(np.sqrt(cost))
    return SolveResult(rep, residual, it, residual <= opts.residual_target, history)


# -- sampling ------------------------------------------------------------


@dataclass
class SampleBatch:
    reps: list[Representation]
    simple_fraction: float | None
    residuals: list[float] = field(default_factory=list)


def random_valid_sample(f: FibrationData, lam, count: int, seed: int = 0, z_value=None,
                        opts: SolveOptions | None = None, zero_edge: str = "x") -> SampleBatch:
    """``count`` points of the representation locus over ``lam``.

    Type A uses the exact construction with random nonzero z (redrawn until
    every z_i is nonzero) unless ``z_value`` is fixed; D/E use the solver with
    seeds ``seed, seed+1, ...``.  ``zero_edge`` is passed to
    :func:`construct_type_a` for edges where a fixed ``z_value`` makes z_i = 0.
    """
    rng = random.Random(seed)
    if f.dtype.family == "A":
        lam_e = ex.exact(lam)
        ts = [ex.evaluate(t, lam_e) for t in f.eigenvalues()]
        reps = []
        for _ in range(count):
            if z_value is None:
                while True:
                    z = ex.random_exact(rng, nonzero=True)
                    if all(z + t for t in ts):
                        break
            else:
                z = ex.exact(z_value)
            reps.append(construct_type_a(f, lam_e, z, seed=rng.randrange(2 ** 31), zero_edge=zero_edge))
        simple = sum(is_simple_burnside(r) for r in reps)
        return SampleBatch(reps, simple / count if count else None, [0.0] * count)
    tau = tau_from_fibration(f)
    base = opts or SolveOptions()
    reps, residuals = [], []
    for k in range(count):
        res = solve_moment_map(f.dtype, tau, lam, SolveOptions(
            base.max_iterations, base.residual_target, base.damping, seed + k, base.start))
        reps.append(res.rep)
        residuals.append(res.residual)
    return SampleBatch(reps, None, residuals)
