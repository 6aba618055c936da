"""adeq command line: JSON in, JSON out.

Exit status 0 on success, 1 on domain errors (non-generic data, violated
constraints, not a representation), 2 on malformed input.  Every failure
still prints ``{"error": ...}`` on stdout.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import warnings

from . import exact as ex
from . import geometry as geo
from . import serialize as ser
from .dynkin import FibrationData, affine_cartan_matrix, delta, genericity_check, positive_roots
from .exact import EncodingError
from .quiver import (
    default_theta, hatted_quiver, mckay_quiver, superpotential_from_tau, tau_from_fibration,
    theta_is_generic, validate_theta,
)
from .rep import (
    burnside_closure_dim, closed_supports, is_representation,
    is_simple_burnside, relation_residual, scalar_loop_lambda, theta_stability, trace_identity,
)
from .solver import SolveOptions, random_valid_sample, solve_moment_map
from .verify import verify_all


class InputError(Exception):
    """Malformed command-line or JSON input (exit status 2)."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(message)


# -- argument decoding ----------------------------------------------------


def _load_json(text: str, what: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{what}: invalid JSON ({exc.msg})") from exc


def _read_input(args):
    if args.input is None:
        raise InputError("this command needs --input (a JSON file, or - for stdin)")
    if args.input == "-":
        return _load_json(sys.stdin.read(), "stdin")
    try:
        with open(args.input) as fh:
            return _load_json(fh.read(), args.input)
    except OSError as exc:
        raise InputError(f"cannot read {args.input}: {exc.strerror}") from exc


def _fibration(args) -> FibrationData:
    if args.type is None or args.n is None:
        raise InputError("--type and --n are required")
    obj = {"type": args.type, "n": args.n}
    if (args.t is None) == (args.tau is None):
        raise InputError("give exactly one of --t or --tau")
    if args.t is not None:
        obj["t"] = _load_json(args.t, "--t")
    else:
        obj["tau"] = _load_json(args.tau, "--tau")
    return ser.fibration_from_json(obj)


def _dtype(args):
    if args.type is None or args.n is None:
        raise InputError("--type and --n are required")
    return ser.dtype_from_json(args.type, args.n)


def _lambda(args, default=0):
    if args.lam is None:
        return ex.exact(default)
    try:
        obj = json.loads(args.lam)
    except json.JSONDecodeError:
        obj = args.lam
    return ser.scalar_from_json(obj)


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("ADEQ_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError as exc:
        raise InputError(f"ADEQ_SEED must be an integer, got {env!r}") from exc


def _theta(args, dtype):
    if args.theta is None:
        return default_theta(dtype)
    theta = _load_json(args.theta, "--theta")
    if not isinstance(theta, list) or not all(isinstance(t, int) and not isinstance(t, bool) for t in theta):
        raise InputError("--theta must be a JSON list of integers")
    return tuple(theta)


def _solve_options(args) -> SolveOptions:
    return SolveOptions(max_iterations=args.max_iter, residual_target=args.target, seed=_seed(args))


# -- commands -------------------------------------------------------------


def cmd_quiver(args):
    t = _dtype(args)
    orientation = _load_json(args.orientation, "--orientation") if args.orientation else None
    return {
        "type": str(t),
        "delta": list(delta(t)),
        "affine_cartan": affine_cartan_matrix(t).tolist(),
        "positive_roots": len(positive_roots(t)),
        "quiver": mckay_quiver(t, orientation).to_json(),
        "hatted": hatted_quiver(t, orientation).to_json(),
    }


def cmd_tau(args):
    f = _fibration(args)
    tau = tau_from_fibration(f)
    return {
        "fibration": ser.fibration_to_json(f),
        "tau": tau.to_json(),
        "superpotential": [ex.poly_to_json(p) for p in superpotential_from_tau(tau)],
        "delta": list(delta(f.dtype)),
    }


def _rep_input(args, f):
    return ser.rep_from_json(_read_input(args), hatted_quiver(f.dtype))


def cmd_check_rep(args):
    f = _fibration(args)
    tau = tau_from_fibration(f)
    v = _rep_input(args, f)
    tol = args.tol if not v.exact else None
    report = relation_residual(v, tau)
    ok = is_representation(v, tau, tol)
    out = {
        "is_representation": ok,
        "max_residual": report.max_residual,
        "vertex_residuals": list(report.vertex),
        "commutation_residuals": dict(sorted(report.commutation.items())),
        "scalar_loop": None,
        "trace_identity": None,
    }
    lam = scalar_loop_lambda(v, tol)
    if lam is not None:
        out["scalar_loop"] = ser.scalar_to_json(lam)
    if ok:
        out["trace_identity"] = ser.scalar_to_json(trace_identity(v, tau, tol))
    if v.exact:
        out["burnside_dim"] = burnside_closure_dim(v)
        out["simple"] = is_simple_burnside(v)
    return out


def cmd_sample(args):
    f = _fibration(args)
    lam = _lambda(args, default=1)
    z = None
    if args.z is not None:
        z = ser.scalar_from_json(_load_json(args.z, "--z"))
    batch = random_valid_sample(f, lam, args.samples, seed=_seed(args), z_value=z, opts=_solve_options(args))
    return {
        "lambda": ser.scalar_to_json(lam),
        "simple_fraction": batch.simple_fraction,
        "residuals": batch.residuals,
        "reps": [ser.rep_to_json(v) for v in batch.reps],
    }


def cmd_equation(args):
    return geo.threefold_equation(_fibration(args)).to_json()


def cmd_singular(args):
    f = _fibration(args)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", geo.NonGenericWarning)
        pts = geo.singular_points(f)
    return {
        "generic": not any(issubclass(w.category, geo.NonGenericWarning) for w in caught),
        "points": [
            {"lambda": ser.scalar_to_json(p.lambda_star), "pairs": [list(q) for q in p.pairs],
             "point": ser.surface_point_to_json(p.point)}
            for p in pts
        ],
    }


def cmd_charts(args):
    f = _fibration(args)
    out = {"charts": {}}
    for k in range(f.n + 1):
        out["charts"][str(k)] = {
            "coordinates": list(geo.chart_coordinate_names(k, f.n)),
            "identity": geo.chart_identity_check(k, f),
        }
    if args.input is not None:
        c = ser.chart_point_from_json(_read_input(args))
        out["image"] = ser.surface_point_to_json(geo.chart_point(c, f))
    return out


def cmd_transition(args):
    f = _fibration(args)
    c = ser.chart_point_from_json(_read_input(args))
    d = geo.chart_transition(c.k, c, f, args.target_chart)
    return {
        "source": c.to_json(),
        "target": d.to_json(),
        "source_image": ser.surface_point_to_json(geo.chart_point(c, f)),
        "target_image": ser.surface_point_to_json(geo.chart_point(d, f)),
    }


def cmd_stability(args):
    f = _fibration(args)
    v = _rep_input(args, f)
    theta = _theta(args, f.dtype)
    if not validate_theta(theta, v.dim):
        raise ValueError("theta . dim must vanish")
    tol = args.tol if not v.exact else None
    verdict = theta_stability(v, theta, tol)
    out = {
        "theta": list(theta),
        "theta_generic": theta_is_generic(theta, v.dim),
        "status": verdict.status,
        "method": verdict.method,
        "witness": sorted(verdict.witness) if verdict.witness is not None else None,
    }
    if max(v.dim) <= 1:
        out["closed_supports"] = [sorted(s) for s in closed_supports(v, tol)]
    if v.exact:
        out["simple"] = is_simple_burnside(v)
    return out


def cmd_genericity(args):
    report = genericity_check(_fibration(args))
    return {
        "generic": report.generic,
        "violations": [
            {"root": list(v.root), "kind": v.kind, "poly": ex.poly_to_json(v.poly),
             "points": [ser.scalar_to_json(p) for p in v.points]}
            for v in report.violations
        ],
    }


def cmd_solve(args):
    f = _fibration(args)
    tau = tau_from_fibration(f)
    res = solve_moment_map(f.dtype, tau, _lambda(args), _solve_options(args))
    return {
        "converged": res.converged,
        "residual": res.residual,
        "iterations": res.iterations,
        "rep": ser.rep_to_json(res.rep),
    }


def cmd_verify_all(args):
    f = _fibration(args)
    theta = _theta(args, f.dtype) if args.theta is not None else None
    return verify_all(f, samples=args.samples, seed=_seed(args), theta=theta, opts=_solve_options(args))


COMMANDS = {
    "quiver": (cmd_quiver, "extended Dynkin quiver, its double and hat"),
    "tau": (cmd_tau, "vertex polynomials tau_i and superpotential terms"),
    "check-rep": (cmd_check_rep, "relation residuals of a representation"),
    "sample": (cmd_sample, "random points of the representation locus"),
    "equation": (cmd_equation, "type-A threefold hypersurface"),
    "singular": (cmd_singular, "singular points of the threefold"),
    "charts": (cmd_charts, "resolution chart identities (and an optional chart image)"),
    "transition": (cmd_transition, "move a chart point to a neighbouring chart"),
    "stability": (cmd_stability, "King theta-stability of a representation"),
    "genericity": (cmd_genericity, "root-polynomial genericity test"),
    "solve": (cmd_solve, "least-squares moment-map solve"),
    "verify-all": (cmd_verify_all, "run every consistency suite"),
}


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--type", help="A, D or E")
    common.add_argument("--n", type=int, help="rank")
    common.add_argument("--t", help="eigenvalue polynomials (type A), JSON list of coefficient lists")
    common.add_argument("--tau", help="vertex polynomials, JSON list of coefficient lists")
    common.add_argument("--theta", help="stability parameter, JSON list of ints")
    common.add_argument("--lambda", dest="lam", help="base point: quadruple, int, 'p/q' or [re, im]")
    common.add_argument("--seed", type=int, help="random seed (falls back to $ADEQ_SEED, then 0)")
    common.add_argument("--samples", type=int, default=20)
    common.add_argument("--tol", type=float, default=None, help="tolerance for float data")
    common.add_argument("--max-iter", type=int, default=2000)
    common.add_argument("--target", type=float, default=1e-10, help="residual target for the solver")
    common.add_argument("--input", help="JSON input file, - for stdin")
    common.add_argument("--output", help="write JSON here instead of stdout")

    parser = _Parser(prog="adeq", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, parents=[common], help=help_text)
        if name == "quiver":
            p.add_argument("--orientation", help="JSON list of [tail, head] pairs")
        if name == "sample":
            p.add_argument("--z", help="fixed z value (type A), exact scalar JSON")
        if name == "transition":
            p.add_argument("--to", dest="target_chart", type=int, default=None,
                           help="target chart (default k+1)")
    return parser


def run(argv=None) -> tuple[int, dict, str | None]:
    """Execute one command; returns (exit status, JSON payload, output path)."""
    output = None
    try:
        args = build_parser().parse_args(argv)
        output = args.output
        if args.samples < 0:
            raise InputError("--samples must be nonnegative")
        if not args.target > 0 or args.max_iter < 0:
            raise InputError("--target must be positive and --max-iter nonnegative")
        result = COMMANDS[args.command][0](args)
    except (InputError, EncodingError) as exc:
        return 2, {"error": str(exc)}, None
    except (ValueError, ArithmeticError) as exc:
        return 1, {"error": str(exc)}, None
    return 0, result, output


def main(argv=None) -> int:
    code, payload, output = run(argv)
    text = json.dumps(payload, indent=2, sort_keys=True)
    if output:
        with open(output, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
