import json
import math
from pathlib import Path

import numpy as np
import pytest

from shiftspan.cli import run
from shiftspan.errors import ConfigError
from shiftspan.opalg import OperatorQuotient
from shiftspan.parallel import set_threads
from shiftspan.pwfunc import l1_norm
from shiftspan.serialize import (
    function_from_json,
    function_to_json,
    operator_from_json,
    operator_to_json,
    parse_complex,
    parse_real,
    to_jsonable,
)

CONFIGS = Path(__file__).resolve().parent.parent / "configs"
IND = {"indicator": {"lo": 0, "hi": 1}}


@pytest.fixture(autouse=True)
def _reset_threads():
    yield
    set_threads(1)


class TestSerialize:
    def test_literals(self):
        assert parse_real("181/128", "x") == 181 / 128
        assert parse_real("2*pi", "x") == 2 * math.pi
        assert parse_real("pi/2", "x") == math.pi / 2
        assert parse_complex([1, "1/2"], "x") == 1 + 0.5j
        assert parse_complex({"im": 2}, "x") == 2j
        with pytest.raises(ConfigError, match="x: cannot parse"):
            parse_real("two", "x")
        with pytest.raises(ConfigError):
            parse_real(True, "x")

    def test_roundtrip(self, bump):
        f = bump * (1 - 0.5j)
        g = function_from_json(json.loads(json.dumps(function_to_json(f))))
        np.testing.assert_array_equal(g.coeffs, f.coeffs)
        assert g.grid.same_as(f.grid)

    def test_builders(self, tri):
        doc = {"convolve": [IND, {"shift": {"f": IND, "by": 0}}]}
        f = function_from_json(doc)
        np.testing.assert_allclose(f.coeffs, tri.coeffs)
        s = function_from_json({"scale": {"f": IND, "by": [0, 2]}})
        assert l1_norm(s) == pytest.approx(2.0)
        a = function_from_json({"add": [IND, {"bump": {"center": 0, "halfwidth": 1, "m": 2}}]})
        assert l1_norm(a) > 1

    def test_error_paths(self):
        with pytest.raises(ConfigError, match=r"function\.indicator\.hi"):
            function_from_json({"indicator": {"lo": 0}})
        with pytest.raises(ConfigError, match="several builders"):
            function_from_json({"indicator": {}, "bump": {}})
        with pytest.raises(ConfigError, match="coeffs"):
            function_from_json({"grid": {"a": 0, "b": 1, "n": 2}, "coeffs": [[[1, 0]]]})
        with pytest.raises(ConfigError, match="function: "):
            function_from_json({"indicator": {"lo": 0, "hi": 0.3, "grid": {"a": 0, "b": 1, "n": 8}}})

    def test_operator(self, chi, tri):
        q = operator_from_json(operator_to_json(OperatorQuotient(tri, chi)))
        assert q.equals(OperatorQuotient(tri, chi))

    def test_jsonable(self):
        d = to_jsonable({"a": np.float64(1.5), "b": 1 + 2j, "c": np.array([1, 2]), "d": np.inf, "e": np.bool_(True)})
        assert d == {"a": 1.5, "b": {"re": 1.0, "im": 2.0}, "c": [1, 2], "d": "inf", "e": True}


def _run(tmp_path, command, cfg, *extra):
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(cfg))
    out = tmp_path / "out"
    code, msg = run([command, "--config", str(p), "--out", str(out), "--overwrite", *extra])
    return code, msg, out


class TestCommands:
    def test_transform(self, tmp_path):
        cfg = {"function": IND, "z": {"real": {"lo": -10, "hi": 10, "num": 201}, "points": ["2*pi"]}, "svg": True}
        code, _, out = _run(tmp_path, "transform", cfg)
        assert code == 0
        rows = np.loadtxt(out / "result.csv", delimiter=",", skiprows=1)
        assert rows[100, 4] == pytest.approx(1.0)
        assert rows[-1, 4] < 1e-12
        assert (out / "transform.svg").read_text().startswith("<svg")
        doc = json.loads((out / "result.json").read_text())
        assert doc["schema_version"] == "1.0" and doc["config"]["svg"] is True

    def test_transform_empty_grid(self, tmp_path):
        code, msg, _ = _run(tmp_path, "transform", {"function": IND, "z": {"real": {"lo": 1, "hi": 0, "num": 3}}})
        assert code == 2 and "config.z.real" in msg

    def test_zeros_triangle(self, tmp_path):
        code, _, out = _run(tmp_path, "zeros", json.loads((CONFIGS / "zeros_triangle.json").read_text()))
        res = json.loads((out / "result.json").read_text())["result"]
        assert code == 0 and len(res["zeros"]) == 1 and res["zeros"][0]["mult"] == 2

    def test_zeros_budget(self, tmp_path):
        code, msg, _ = _run(tmp_path, "zeros", {"function": IND, "rect": [1, 40, -1, 1], "budget": 4})
        assert code == 3

    def test_remove_zero(self, tmp_path):
        code, _, out = _run(tmp_path, "remove-zero", {"function": IND, "z0": "2*pi", "k": 1})
        res = json.loads((out / "result.json").read_text())["result"]
        assert code == 0
        assert res["transform_at_0"]["re"] == pytest.approx(-1 / (2 * np.pi), abs=1e-12)
        psi = function_from_json(res["function"])
        assert psi.grid.b == 1.0

    def test_remove_zero_not_a_zero(self, tmp_path):
        code, msg, _ = _run(tmp_path, "remove-zero", {"function": IND, "z0": "pi", "k": 1})
        assert code == 2 and "not a zero" in msg

    def test_delta_check(self, tmp_path):
        code, _, out = _run(tmp_path, "delta-check", json.loads((CONFIGS / "delta_standard.json").read_text()))
        assert code == 0 and (out / "result.csv").read_text().count("\n") == 33
        code, _, _ = _run(tmp_path, "delta-check", {"family": {"kind": "constant"}})
        assert code == 1
        code, msg, _ = _run(tmp_path, "delta-check", {"family": {"kind": "other"}})
        assert code == 2 and "config.family.kind" in msg

    def test_certify(self, tmp_path):
        cfg = json.loads((CONFIGS / "certify_half_indicator.json").read_text())
        cfg["refinements"] = 1
        code, _, out = _run(tmp_path, "certify", cfg)
        res = json.loads((out / "result.json").read_text())["result"]
        assert code == 0 and res["certificate"]["bound"] == pytest.approx(1 / np.pi, abs=1e-9)

    def test_certify_requires_common_zero(self, tmp_path):
        cfg = json.loads((CONFIGS / "certify_half_indicator.json").read_text())
        cfg["z0"] = "pi"
        assert _run(tmp_path, "certify", cfg)[0] == 2

    def test_approximate_cap(self, tmp_path):
        cfg = {"generators": [IND], "target": IND, "shift": {"lo": -1, "hi": 1, "step": "1/16"}, "dict_cap": 10}
        assert _run(tmp_path, "approximate", cfg)[0] == 3

    def test_approximate_svg(self, tmp_path):
        cfg = {"generators": [IND], "target": {"indicator": {"lo": 0, "hi": 0.5, "n": 4}},
               "shift": {"lo": -1, "hi": 1, "step": 0.25}, "refinements": 1, "svg": True}
        code, _, out = _run(tmp_path, "approximate", cfg)
        assert code == 0 and (out / "approximation.svg").exists() and (out / "error_curve.svg").exists()

    def test_example(self, tmp_path):
        code, _, out = _run(tmp_path, "example", json.loads((CONFIGS / "example_bump.json").read_text()))
        assert code == 0 and json.loads((out / "result.json").read_text())["passed"]


class TestDriver:
    def test_refuses_overwrite(self, tmp_path):
        p = tmp_path / "c.json"
        p.write_text(json.dumps({"function": IND, "z": {"points": [0]}}))
        args = ["transform", "--config", str(p), "--out", str(tmp_path / "o")]
        assert run(args)[0] == 0
        code, msg = run(args)
        assert code == 2 and "--overwrite" in msg
        assert run(args + ["--overwrite"])[0] == 0

    def test_bad_json(self, tmp_path):
        p = tmp_path / "c.json"
        p.write_text("{not json")
        assert run(["zeros", "--config", str(p), "--out", str(tmp_path)])[0] == 2
        assert run(["zeros", "--config", str(tmp_path / "missing.json"), "--out", str(tmp_path)])[0] == 2

    def test_timing_isolated(self, tmp_path):
        _, _, out = _run(tmp_path, "transform", {"function": IND, "z": {"points": [0]}}, "--threads", "2")
        assert "seconds" in json.loads((out / "timing.json").read_text())
        assert "seconds" not in (out / "result.json").read_text()
