"""Command-line front end.

Every command reads one JSON config and writes ``result.json`` (sorted keys,
schema version, resolved config), a CSV, optional SVG plots and a separate
``timing.json``.  Exit codes: 0 pass, 1 failed predicate, 2 bad config or
input, 3 numerical budget exhausted.
"""

import argparse
import copy
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import deltaseq, fourier, opalg, spanlab
from .errors import ConfigError, NumericalBudgetError, PreconditionError, ShiftSpanError
from .parallel import get_threads, set_threads
from .pwfunc import support_endpoints
from .serialize import (
    function_from_json,
    function_to_json,
    parse_complex,
    parse_int,
    parse_real,
    parse_rect,
    require,
    to_jsonable,
)
from .svg import line_plot

SCHEMA_VERSION = "1.0"
EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_BUDGET = 0, 1, 2, 3


class Outcome:
    """Files to write plus the verdict of one command."""

    def __init__(self, result, passed=True, csv=None, svgs=None):
        self.result = result
        self.passed = passed
        self.csv = csv
        self.svgs = svgs or {}


def _opt(cfg, key, default):
    """Read an optional field, recording the default so the output carries the resolved config."""
    return cfg.setdefault(key, default)


def _rows_csv(header, rows):
    lines = [",".join(header)]
    lines += [",".join(v if isinstance(v, str) else repr(to_jsonable(v)) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


# ----------------------------------------------------------------------------
# commands


def cmd_transform(cfg):
    f = function_from_json(require(cfg, "function", "config"), "config.function")
    zdoc = require(cfg, "z", "config")
    if not isinstance(zdoc, dict):
        raise ConfigError("config.z", "must be an object")
    parts = []
    if "real" in zdoc:
        r = zdoc["real"]
        lo = parse_real(require(r, "lo", "config.z.real"), "config.z.real.lo")
        hi = parse_real(require(r, "hi", "config.z.real"), "config.z.real.hi")
        num = parse_int(require(r, "num", "config.z.real"), "config.z.real.num", lo=1)
        if hi < lo:
            raise ConfigError("config.z.real", "hi < lo gives an empty grid")
        parts.append(np.linspace(lo, hi, num).astype(complex))
    if "rect" in zdoc:
        r = zdoc["rect"]
        rect = parse_rect(require(r, "bounds", "config.z.rect"), "config.z.rect.bounds")
        nx = parse_int(require(r, "nx", "config.z.rect"), "config.z.rect.nx", lo=1)
        ny = parse_int(require(r, "ny", "config.z.rect"), "config.z.rect.ny", lo=1)
        X, Y = np.meshgrid(np.linspace(rect.x0, rect.x1, nx), np.linspace(rect.y0, rect.y1, ny))
        parts.append((X + 1j * Y).ravel())
    if "points" in zdoc:
        pts = zdoc["points"]
        if not isinstance(pts, list) or not pts:
            raise ConfigError("config.z.points", "must be a nonempty list")
        parts.append(np.array([parse_complex(p, f"config.z.points[{i}]") for i, p in enumerate(pts)]))
    if not parts:
        raise ConfigError("config.z", "expected at least one of 'real', 'rect', 'points'")
    zs = np.concatenate(parts)
    F = fourier.ft_eval(f, zs)
    rows = [(z.real, z.imag, v.real, v.imag, abs(v)) for z, v in zip(zs, F)]
    svgs = {}
    if _opt(cfg, "svg", False) and "real" in zdoc:
        n = len(parts[0])
        svgs["transform.svg"] = line_plot([(zs[:n].real, np.abs(F[:n]), "|F|")], title="|F| on the real axis")
    result = {"n_points": len(zs), "max_abs": float(np.max(np.abs(F))), "function_error": float(f.error)}
    return Outcome(result, True, _rows_csv(["re_z", "im_z", "re_F", "im_F", "abs_F"], rows), svgs)


def cmd_zeros(cfg):
    f = function_from_json(require(cfg, "function", "config"), "config.function")
    rect = parse_rect(require(cfg, "rect", "config"), "config.rect")
    tol = parse_real(_opt(cfg, "zero_tol", fourier.ZERO_TOL), "config.zero_tol")
    budget = parse_int(_opt(cfg, "budget", fourier.BOX_BUDGET), "config.budget", lo=1)
    atlas = fourier.zero_search(f, rect, tol, budget=budget)
    if not atlas.complete:
        raise NumericalBudgetError("zero atlas incomplete: " + "; ".join(atlas.notes))
    res = atlas.to_dict()
    res["summary"] = atlas.describe()
    return Outcome(res, True, atlas.to_csv())


def cmd_remove_zero(cfg):
    f = function_from_json(require(cfg, "function", "config"), "config.function")
    z0 = parse_complex(require(cfg, "z0", "config"), "config.z0")
    k = parse_int(require(cfg, "k", "config"), "config.k", lo=1)
    tol = parse_real(_opt(cfg, "zero_tol", fourier.ZERO_TOL), "config.zero_tol")
    tail_tol = _opt(cfg, "tail_tol", None)
    tail_tol = None if tail_tol is None else parse_real(tail_tol, "config.tail_tol")
    psi, info = opalg.remove_zero(f, z0, k, tol, tail_tol, return_info=True)
    st = support_endpoints(psi)
    res = {
        "function": function_to_json(psi),
        "tail_mass": info.tail_mass,
        "tail_tol": info.tail_tol,
        "interp_error": info.interp_error,
        "support": [st.lam, st.gamma],
        "transform_at_0": complex(fourier.ft_eval(psi, 0.0)),
    }
    t = np.linspace(psi.grid.a, psi.grid.b, 8 * psi.grid.n + 1)
    v = psi(t)
    return Outcome(res, True, _rows_csv(["t", "re", "im"], zip(t, v.real, v.imag)))


def _family(doc, path):
    kind = require(doc, "kind", path)
    if kind == "standard":
        return deltaseq.standard_family()
    if kind == "weak":
        return deltaseq.weak_nonstandard_family(parse_real(doc.get("alpha", 2.0), f"{path}.alpha"))
    if kind == "constant":
        f = function_from_json(doc["function"], f"{path}.function") if "function" in doc else None
        return deltaseq.constant_family(f)
    raise ConfigError(f"{path}.kind", f"unknown family {kind!r}; use standard, weak or constant")


def cmd_delta_check(cfg):
    fam = _family(require(cfg, "family", "config"), "config.family")
    n_max = parse_int(_opt(cfg, "n_max", deltaseq.N_MAX), "config.n_max", lo=4)
    eps = [parse_real(e, f"config.eps_list[{i}]") for i, e in enumerate(_opt(cfg, "eps_list", list(deltaseq.EPS_LIST)))]
    cond = deltaseq.verify_conditions(fam, n_max, eps)
    res = {"conditions": cond.to_dict()}
    passed = cond.passed
    if "target" in cfg:
        f = function_from_json(cfg["target"], "config.target")
        win = parse_real(_opt(cfg, "alpha_window", 3.0), "config.alpha_window")
        ident = deltaseq.convolution_identity_check(fam, f, win, n_max)
        res["identity"] = ident.to_dict()
        passed &= ident.passed
    if "zs" in cfg:
        zs = [parse_complex(z, f"config.zs[{i}]") for i, z in enumerate(cfg["zs"])]
        tl = deltaseq.transform_limit_check(fam, zs, n_max)
        res["transform"] = tl.to_dict()
        passed &= tl.passed
    res["passed"] = bool(passed)
    return Outcome(res, passed, cond.to_csv())


def _span_spec(cfg):
    gens = require(cfg, "generators", "config")
    if not isinstance(gens, list) or not gens:
        raise ConfigError("config.generators", "expected a nonempty list of functions")
    E = [function_from_json(g, f"config.generators[{i}]") for i, g in enumerate(gens)]
    sh = require(cfg, "shift", "config")
    lo = parse_real(require(sh, "lo", "config.shift"), "config.shift.lo")
    hi = parse_real(require(sh, "hi", "config.shift"), "config.shift.hi")
    step = parse_real(require(sh, "step", "config.shift"), "config.shift.step")
    try:
        return spanlab.ShiftSpanSpec(E, lo, hi, step)
    except PreconditionError as exc:
        raise ConfigError("config.shift", str(exc)) from None


def _sweep(cfg, need_z0):
    spec = _span_spec(cfg)
    target = function_from_json(require(cfg, "target", "config"), "config.target")
    refinements = parse_int(_opt(cfg, "refinements", 0), "config.refinements", lo=0, hi=spanlab.MAX_REFINEMENTS)
    rect = _opt(cfg, "rect", None)
    rect = None if rect is None else parse_rect(rect, "config.rect")
    z0 = require(cfg, "z0", "config") if need_z0 else _opt(cfg, "z0", None)
    z0 = None if z0 is None else parse_complex(z0, "config.z0")
    ridge = _opt(cfg, "ridge", None)
    ridge = None if ridge is None else parse_real(ridge, "config.ridge")
    cap = parse_int(_opt(cfg, "dict_cap", spanlab.DICT_CAP), "config.dict_cap", lo=1)
    sw = spanlab.density_sweep(target, spec, refinements, rect=rect, z0=z0, ridge=ridge, cap=cap)
    return target, sw


def cmd_approximate(cfg):
    target, sw = _sweep(cfg, need_z0=False)
    res = sw.to_dict()
    svgs = {}
    if _opt(cfg, "svg", False):
        last = sw.rows[-1]
        t = np.linspace(last.window[0], last.window[1], 1001)
        svgs["approximation.svg"] = line_plot(
            [(t, target(t).real, "target"), (t, last.approximation(t).real, "approximation")],
            title="target vs approximation",
        )
        svgs["error_curve.svg"] = line_plot(
            [(np.arange(len(sw.rows)), sw.l1_errs, "log10 L1 error")], title="error vs level", logy=True
        )
    return Outcome(res, sw.passed, sw.to_csv(), svgs)


def cmd_certify(cfg):
    _, sw = _sweep(cfg, need_z0=True)
    res = sw.to_dict()
    return Outcome(res, sw.passed, sw.to_csv())


def cmd_example(cfg):
    phi = function_from_json(require(cfg, "function", "config"), "config.function")
    K = parse_int(require(cfg, "K", "config"), "config.K", lo=1)
    rect = parse_rect(require(cfg, "rect", "config"), "config.rect")
    rep = spanlab.nondensity_evidence(phi, K, rect)
    rows = []
    for c in rep.generator_checks:
        rows += [(c["k"], z.real, z.imag, m) for z, m in c["atlas"]]
    return Outcome(rep.to_dict(), rep.passed, _rows_csv(["k", "re", "im", "mult"], rows))


COMMANDS = {
    "transform": cmd_transform,
    "zeros": cmd_zeros,
    "remove-zero": cmd_remove_zero,
    "delta-check": cmd_delta_check,
    "approximate": cmd_approximate,
    "certify": cmd_certify,
    "example": cmd_example,
}


# ----------------------------------------------------------------------------
# driver


def _parser():
    p = argparse.ArgumentParser(prog="shiftspan", description="Shift-span experiments on piecewise polynomials.")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", required=True, help="JSON config file")
    p.add_argument("--out", required=True, help="output directory (created if absent)")
    p.add_argument("--overwrite", action="store_true", help="replace existing output files")
    p.add_argument("--threads", type=int, default=None, help="worker threads (default: $SHIFTSPAN_THREADS or 1)")
    p.add_argument("--seed", type=int, default=0, help="seed for randomized sweeps")
    return p


def _dump(obj):
    return json.dumps(to_jsonable(obj), sort_keys=True, indent=2) + "\n"


def run(argv=None):
    """Run one command; returns ``(exit_code, message)``."""
    args = _parser().parse_args(argv)
    if args.threads is not None:
        if args.threads < 1:
            return EXIT_CONFIG, "--threads must be >= 1"
        set_threads(args.threads)
    try:
        cfg = json.loads(Path(args.config).read_text())
    except OSError as exc:
        return EXIT_CONFIG, f"cannot read config: {exc}"
    except json.JSONDecodeError as exc:
        return EXIT_CONFIG, f"config is not valid JSON: {exc}"
    if not isinstance(cfg, dict):
        return EXIT_CONFIG, "config: top level must be an object"

    out = Path(args.out)
    t0 = time.perf_counter()
    try:
        resolved = copy.deepcopy(cfg)
        outcome = COMMANDS[args.command](resolved)
    except ConfigError as exc:
        return EXIT_CONFIG, f"config error at {exc}"
    except NumericalBudgetError as exc:
        return EXIT_BUDGET, f"numerical budget exhausted: {exc}"
    except (PreconditionError, ShiftSpanError) as exc:
        return EXIT_CONFIG, f"invalid input: {exc}"
    elapsed = time.perf_counter() - t0

    doc = {
        "schema_version": SCHEMA_VERSION,
        "command": args.command,
        "config": resolved,
        "options": {"seed": args.seed},
        "passed": bool(outcome.passed),
        "result": outcome.result,
    }
    files = {"result.json": _dump(doc), "timing.json": _dump({"seconds": elapsed, "threads": get_threads()})}
    if outcome.csv is not None:
        files["result.csv"] = outcome.csv
    files.update(outcome.svgs)

    out.mkdir(parents=True, exist_ok=True)
    clash = [n for n in files if (out / n).exists()]
    if clash and not args.overwrite:
        return EXIT_CONFIG, f"refusing to overwrite {', '.join(sorted(clash))} in {out}; pass --overwrite"
    for name, text in files.items():
        (out / name).write_text(text)
    code = EXIT_OK if outcome.passed else EXIT_FAIL
    return code, f"{args.command}: {'pass' if outcome.passed else 'FAIL'} -> {out}"


def main(argv=None):
    code, msg = run(argv)
    print(msg, file=sys.stderr if code else sys.stdout)
    return code


if __name__ == "__main__":
    sys.exit(main())
