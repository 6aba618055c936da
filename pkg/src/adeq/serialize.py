"""JSON codecs.  Every ``*_to_json`` has a matching parser that raises
:class:`EncodingError` on malformed input (the CLI maps that to exit 2)."""
from __future__ import annotations

import numpy as np
from sympy import QQ_I

from . import exact as ex
from .dynkin import DynkinType, FibrationData
from .exact import EncodingError
from .geometry import ChartPoint, SurfacePoint
from .quiver import Quiver, hatted_quiver
from .rep import EXACT, FLOAT, Representation


def _int(obj, what: str) -> int:
    if isinstance(obj, bool) or not isinstance(obj, int):
        raise EncodingError(f"{what} must be an integer, got {obj!r}")
    return obj


def scalar_to_json(c):
    if isinstance(c, QQ_I.dtype):
        return ex.encode_exact(c)
    c = complex(c)
    return [c.real, c.imag]


def scalar_from_json(obj):
    """Quadruple/int/"p/q" give exact scalars; a pair of numbers gives a complex."""
    if isinstance(obj, (list, tuple)) and len(obj) == 2 and all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in obj):
        return complex(obj[0], obj[1])
    if isinstance(obj, float):
        return complex(obj)
    return ex.decode_exact(obj)


# -- fibrations ----------------------------------------------------------


def dtype_from_json(family, n) -> DynkinType:
    if not isinstance(family, str):
        raise EncodingError(f"type must be a string, got {family!r}")
    try:
        return DynkinType(family.upper(), _int(n, "n"))
    except EncodingError:
        raise
    except ValueError as exc:
        raise EncodingError(str(exc)) from exc


def fibration_to_json(f: FibrationData) -> dict:
    return {"type": f.dtype.family, "n": f.n, f.form: [ex.poly_to_json(p) for p in f.polys]}


def fibration_from_json(obj) -> FibrationData:
    """Parse ``{"type","n","t"|"tau"}``.  Shape errors raise EncodingError; a
    violated sum constraint on tau is a domain error (plain ValueError)."""
    if not isinstance(obj, dict):
        raise EncodingError("fibration must be a JSON object")
    try:
        dtype = dtype_from_json(obj["type"], obj["n"])
    except KeyError as exc:
        raise EncodingError(f"fibration is missing {exc}") from exc
    forms = [k for k in ("t", "tau") if k in obj]
    if len(forms) != 1:
        raise EncodingError('fibration needs exactly one of "t" or "tau"')
    form = forms[0]
    lists = obj[form]
    if not isinstance(lists, list) or len(lists) != dtype.n_vertices:
        raise EncodingError(f'"{form}" must list {dtype.n_vertices} coefficient arrays')
    polys = tuple(ex.poly_from_json(p) for p in lists)
    if form == "t" and dtype.family != "A":
        raise EncodingError('"t" form is only defined for type A')
    return FibrationData(dtype, polys, form)


# -- representations -----------------------------------------------------


def rep_to_json(v: Representation) -> dict:
    mats = {}
    for aid, m in v.mats.items():
        mats[aid] = [[scalar_to_json(c) for c in row] for row in m.tolist()]
    return {"dim": list(v.dim), "field": v.field, "mats": mats}


def rep_from_json(obj, quiver: Quiver) -> Representation:
    if not isinstance(obj, dict) or not {"dim", "mats"} <= set(obj):
        raise EncodingError('representation needs "dim" and "mats"')
    field = obj.get("field", EXACT)
    if field not in (EXACT, FLOAT):
        raise EncodingError(f"unknown field {field!r}")
    dim = [_int(d, "dimension") for d in obj["dim"]]
    if not isinstance(obj["mats"], dict):
        raise EncodingError('"mats" must be an object keyed by arrow id')
    mats = {}
    for aid, rows in obj["mats"].items():
        if not isinstance(rows, list) or any(not isinstance(r, list) for r in rows):
            raise EncodingError(f"arrow {aid}: matrix must be a list of rows")
        try:
            a = quiver.arrow(aid)
        except KeyError as exc:
            raise EncodingError(f"unknown arrow {aid!r}") from exc
        shape = (dim[a.head], dim[a.tail]) if max(a.head, a.tail) < len(dim) else None
        if field == EXACT:
            m = ex.exact_matrix(rows) if rows and rows[0] else ex.zeros(*(shape or (len(rows), 0)))
        else:
            m = np.array([[complex(*c) if isinstance(c, list) else complex(c) for c in r] for r in rows],
                         dtype=complex)
            if not rows or not rows[0]:
                m = np.zeros(shape or (len(rows), 0), dtype=complex)
        mats[aid] = m
    try:
        return Representation(quiver, tuple(dim), mats, field)
    except ValueError as exc:
        raise EncodingError(str(exc)) from exc


def default_quiver_for(dtype: DynkinType) -> Quiver:
    return hatted_quiver(dtype)


# -- points --------------------------------------------------------------


def surface_point_to_json(p: SurfacePoint) -> dict:
    return dict(zip(("x", "y", "z", "lambda"), (scalar_to_json(c) for c in p.as_tuple())))


def surface_point_from_json(obj) -> SurfacePoint:
    if isinstance(obj, list) and len(obj) == 4:
        return SurfacePoint(*(scalar_from_json(c) for c in obj))
    if isinstance(obj, dict) and {"x", "y", "z", "lambda"} <= set(obj):
        return SurfacePoint(*(scalar_from_json(obj[k]) for k in ("x", "y", "z", "lambda")))
    raise EncodingError("point must be [x, y, z, lambda] or an object with those keys")


def chart_point_from_json(obj) -> ChartPoint:
    if not isinstance(obj, dict) or "k" not in obj or "coords" not in obj:
        raise EncodingError('chart point needs "k" and "coords"')
    coords = obj["coords"]
    if not isinstance(coords, list) or len(coords) != 3:
        raise EncodingError("chart point needs three coordinates")
    return ChartPoint(_int(obj["k"], "chart index"), tuple(scalar_from_json(c) for c in coords))
