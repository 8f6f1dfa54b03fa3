"""JSON forms of functions, atlases, operators and number literals.

A function document is either raw::

    {"grid": {"a": 0, "b": 1, "n": 8}, "degree": 0, "coeffs": [[[1, 0]], ...]}

or a builder::

    {"indicator": {"lo": 0, "hi": 1}}            # optional "n" or "grid"
    {"bump": {"center": 0, "halfwidth": 1, "m": 2}}
    {"shift": {"f": <function>, "by": 0.25}}
    {"scale": {"f": <function>, "by": 2}}
    {"convolve": [<function>, <function>, ...]}
    {"add": [<function>, <function>, ...]}

Real numbers may be given as strings such as ``"181/128"``, ``"pi"`` or
``"2*pi"``, and complex numbers as ``[re, im]`` or ``{"re": .., "im": ..}``.
"""

import math
from fractions import Fraction

import numpy as np

from .errors import ConfigError, ShiftSpanError
from .fourier import Rect
from .opalg import OperatorQuotient
from .pwfunc import (
    Grid,
    PiecewisePoly,
    add,
    build_indicator,
    build_poly_bump,
    convolve,
    scale,
    shift,
)

BUILDERS = ("indicator", "bump", "shift", "scale", "convolve", "add")


def parse_real(v, path):
    """Number or string literal (``"p/q"``, ``"pi"``, ``"c*pi"``, ``"pi/c"``) to float."""
    if isinstance(v, bool):
        raise ConfigError(path, "expected a number, got a boolean")
    if isinstance(v, (int, float)):
        if not math.isfinite(v):
            raise ConfigError(path, "number must be finite")
        return float(v)
    if isinstance(v, str):
        s = v.replace(" ", "")
        try:
            if "pi" in s:
                head, _, tail = s.partition("pi")
                c = 1.0
                if head:
                    c *= float(Fraction(head.rstrip("*")))
                if tail:
                    if not tail.startswith("/"):
                        raise ValueError
                    c /= float(Fraction(tail[1:]))
                return c * math.pi
            return float(Fraction(s))
        except (ValueError, ZeroDivisionError):
            raise ConfigError(path, f"cannot parse number {v!r}") from None
    raise ConfigError(path, f"expected a number, got {type(v).__name__}")


def parse_complex(v, path):
    if isinstance(v, dict):
        return complex(parse_real(v.get("re", 0), f"{path}.re"), parse_real(v.get("im", 0), f"{path}.im"))
    if isinstance(v, (list, tuple)):
        if len(v) != 2:
            raise ConfigError(path, "complex number must be [re, im]")
        return complex(parse_real(v[0], f"{path}[0]"), parse_real(v[1], f"{path}[1]"))
    return complex(parse_real(v, path))


def parse_int(v, path, lo=None, hi=None):
    if isinstance(v, bool) or not isinstance(v, (int, float)) or int(v) != v:
        raise ConfigError(path, f"expected an integer, got {v!r}")
    v = int(v)
    if lo is not None and v < lo:
        raise ConfigError(path, f"must be >= {lo}, got {v}")
    if hi is not None and v > hi:
        raise ConfigError(path, f"must be <= {hi}, got {v}")
    return v


def parse_rect(v, path):
    if not isinstance(v, (list, tuple)) or len(v) != 4:
        raise ConfigError(path, "rect must be [x0, x1, y0, y1]")
    vals = [parse_real(x, f"{path}[{i}]") for i, x in enumerate(v)]
    try:
        return Rect.of(vals)
    except ValueError as exc:
        raise ConfigError(path, str(exc)) from None


def require(doc, key, path):
    if not isinstance(doc, dict) or key not in doc:
        raise ConfigError(f"{path}.{key}", "missing required field")
    return doc[key]


def _grid_from(doc, path):
    if not isinstance(doc, dict):
        raise ConfigError(path, "grid must be an object")
    a = parse_real(require(doc, "a", path), f"{path}.a")
    b = parse_real(require(doc, "b", path), f"{path}.b")
    n = parse_int(require(doc, "n", path), f"{path}.n", lo=1)
    try:
        return Grid(a, b, n)
    except ValueError as exc:
        raise ConfigError(path, str(exc)) from None


def _list_of_functions(v, path):
    if not isinstance(v, list) or not v:
        raise ConfigError(path, "expected a nonempty list of functions")
    return [function_from_json(x, f"{path}[{i}]") for i, x in enumerate(v)]


def _build(kind, body, path):
    p = f"{path}.{kind}"
    if kind == "indicator":
        lo = parse_real(require(body, "lo", p), f"{p}.lo")
        hi = parse_real(require(body, "hi", p), f"{p}.hi")
        grid = _grid_from(body["grid"], f"{p}.grid") if "grid" in body else Grid(lo, hi, parse_int(body.get("n", 8), f"{p}.n", lo=1))
        return build_indicator(lo, hi, grid)
    if kind == "bump":
        c = parse_real(require(body, "center", p), f"{p}.center")
        hw = parse_real(require(body, "halfwidth", p), f"{p}.halfwidth")
        m = parse_int(require(body, "m", p), f"{p}.m", lo=1)
        grid = _grid_from(body["grid"], f"{p}.grid") if "grid" in body else Grid(c - hw, c + hw, parse_int(body.get("n", 16), f"{p}.n", lo=1))
        return build_poly_bump(c, hw, m, grid)
    if kind in ("shift", "scale"):
        f = function_from_json(require(body, "f", p), f"{p}.f")
        if kind == "shift":
            return shift(f, parse_real(require(body, "by", p), f"{p}.by"))
        return scale(f, parse_complex(require(body, "by", p), f"{p}.by"))
    fs = _list_of_functions(body, p)
    out = fs[0]
    for g in fs[1:]:
        out = convolve(out, g) if kind == "convolve" else add(out, g)
    return out


def function_from_json(doc, path="function"):
    """Build a :class:`PiecewisePoly` from a raw or builder document."""
    if not isinstance(doc, dict):
        raise ConfigError(path, "function must be an object")
    kinds = [k for k in BUILDERS if k in doc]
    try:
        if len(kinds) > 1:
            raise ConfigError(path, f"several builders given: {kinds}")
        if kinds:
            return _build(kinds[0], doc[kinds[0]], path)
        if "grid" not in doc:
            raise ConfigError(path, f"expected raw form with 'grid' or one of {list(BUILDERS)}")
        grid = _grid_from(doc["grid"], f"{path}.grid")
        raw = require(doc, "coeffs", path)
        try:
            arr = np.asarray(raw, dtype=float)
        except (TypeError, ValueError):
            raise ConfigError(f"{path}.coeffs", "coefficients must be numeric [re, im] pairs") from None
        if arr.ndim != 3 or arr.shape[2] != 2 or arr.shape[0] != grid.n:
            raise ConfigError(f"{path}.coeffs", f"expected shape ({grid.n}, degree+1, 2), got {arr.shape}")
        if "degree" in doc and parse_int(doc["degree"], f"{path}.degree", lo=0) != arr.shape[1] - 1:
            raise ConfigError(f"{path}.degree", "does not match the coefficient arrays")
        return PiecewisePoly(grid, arr[..., 0] + 1j * arr[..., 1], float(doc.get("error", 0.0)))
    except ConfigError:
        raise
    except ShiftSpanError as exc:
        raise ConfigError(path, str(exc)) from None


def function_to_json(f):
    c = np.asarray(f.coeffs)
    return {
        "grid": {"a": f.grid.a, "b": f.grid.b, "n": f.grid.n},
        "degree": f.degree,
        "coeffs": np.stack([c.real, c.imag], axis=-1).tolist(),
        "error": float(f.error),
    }


def operator_to_json(xi):
    return {"num": function_to_json(xi.num), "den": function_to_json(xi.den)}


def operator_from_json(doc, path="operator"):
    return OperatorQuotient(
        function_from_json(require(doc, "num", path), f"{path}.num"),
        function_from_json(require(doc, "den", path), f"{path}.den"),
    )


def to_jsonable(obj):
    """Recursively convert numpy scalars, arrays and complex numbers."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        obj = float(obj)
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    return obj
