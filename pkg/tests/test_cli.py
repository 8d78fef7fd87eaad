import json

import pytest

from zustint.cli import main

AREA = {"d": 2, "f": {"kind": "preset", "name": "constant", "value": 1.0},
        "g": [{"kind": "preset", "name": "coordinate", "axis": 1},
              {"kind": "preset", "name": "coordinate", "axis": 2}]}
CONSTANT_G = {"d": 2, "f": {"kind": "preset", "name": "coordinate", "axis": 1},
              "g": [{"kind": "preset", "name": "constant", "value": 3.0},
                    {"kind": "preset", "name": "coordinate", "axis": 2}]}
_ROUGH = {"kind": "tensor1d", "axis": 1, "of": {"kind": "schauder", "gamma": 0.3, "J": 14}}
# f(x) d(f(x) + f(y)) ^ dy with f of exponent 0.3: germ-sum gaps grow with the level
DIVERGENT = {"d": 2, "f": _ROUGH,
             "g": [{"kind": "sum", "of": [_ROUGH, {**_ROUGH, "axis": 2}]},
                   {"kind": "preset", "name": "coordinate", "axis": 2}]}


def _write(tmp_path, name, obj):
    path = tmp_path / name
    path.write_text(json.dumps(obj))
    return str(path)


def _run(tmp_path, *args):
    out = tmp_path / "out"
    code = main([*args, "--out", str(out)])
    return code, out


def _report(out, name):
    return json.loads((out / name).read_text())


def test_integrate_rect_area(tmp_path):
    code, out = _run(tmp_path, "integrate-rect", "--spec", _write(tmp_path, "s.json", AREA))
    assert code == 0
    rep = _report(out, "integral.json")
    assert rep["result"]["value"] == 1.0
    assert rep["config"]["command"] == "integrate-rect"
    assert "timestamp" in rep["metadata"]


def test_integrate_rect_constant_integrator(tmp_path):
    code, out = _run(tmp_path, "integrate-rect", "--spec", _write(tmp_path, "s.json", CONSTANT_G))
    assert code == 0 and _report(out, "integral.json")["result"]["value"] == 0.0


def test_max_level_override(tmp_path):
    spec = _write(tmp_path, "s.json", AREA)
    code, out = _run(tmp_path, "integrate-rect", "--spec", spec, "--max-level", "5", "--tol", "1e-3")
    assert code == 0
    sewing = _report(out, "integral.json")["config"]["sewing"]
    assert sewing["max_level"] == 5 and sewing["tolerance"] == 1e-3


def test_no_convergence_exit_code(tmp_path):
    spec = _write(tmp_path, "s.json", DIVERGENT)
    code, out = _run(tmp_path, "integrate-rect", "--spec", spec, "--max-level", "9")
    assert code == 3
    assert _report(out, "integral.json")["result"]["error"] == "no-convergence"


def test_bad_input_exit_code(tmp_path):
    assert _run(tmp_path, "integrate-rect", "--spec", str(tmp_path / "missing.json"))[0] == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert _run(tmp_path, "integrate-rect", "--spec", str(bad))[0] == 2
    wrong = _write(tmp_path, "w.json", {**AREA, "g": AREA["g"][:1]})
    assert _run(tmp_path, "integrate-rect", "--spec", wrong)[0] == 2
    assert main(["no-such-command"]) == 2


def test_boxdim_square(tmp_path):
    dom = _write(tmp_path, "d.json", {"kind": "rectangle", "a": [0, 0], "b": [1, 1]})
    code, out = _run(tmp_path, "boxdim", "--domain", dom, "--levels", "2:8")
    assert code == 0
    assert _report(out, "boxdim.json")["result"]["dimension"] == pytest.approx(1.0, abs=1e-9)
    assert (out / "boxcounts.csv").read_text().startswith("# config=")


def test_besov_check_graph(tmp_path):
    dom = _write(tmp_path, "g.json", {"kind": "graph", "beta": 1.5, "J": 14})
    code, out = _run(tmp_path, "besov-check", "--domain", dom, "--beta", "1.5", "--levels", "2:12")
    assert code == 0
    assert _report(out, "besov.json")["result"]["verdict"] == "converging"


def test_coeffs_of_area_form(tmp_path):
    # dx ^ dy is Lebesgue measure: every detail coefficient vanishes up to roundoff
    code, out = _run(tmp_path, "coeffs", "--spec", _write(tmp_path, "s.json", AREA),
                     "--levels", "0:2")
    assert code == 0
    lines = (out / "coeffs.csv").read_text().splitlines()
    header = lines[1].split(",")
    details = [dict(zip(header, ln.split(","))) for ln in lines[2:]]
    details = [r for r in details if r["i"] != "0"]
    assert details and max(abs(float(r["value"])) for r in details) <= 1e-12


def test_integrate_domain_epigraph(tmp_path):
    spec = _write(tmp_path, "s.json", AREA)
    dom = _write(tmp_path, "e.json", {"kind": "epigraph", "beta": 1.5, "J": 14})
    code, out = _run(tmp_path, "integrate-domain", "--spec", spec, "--domain", dom)
    assert code == 0
    res = _report(out, "pairing.json")["result"]
    assert res["value"] == pytest.approx(0.2254, abs=1e-3)
    assert res["tail_is_heuristic"] is True


def test_convergence_study(tmp_path):
    spec = {"d": 2, "f": {"kind": "preset", "name": "coordinate", "axis": 1},
            "g": [{"kind": "preset", "name": "monomial", "axis": 1, "power": 2},
                  {"kind": "preset", "name": "coordinate", "axis": 2}]}
    code, out = _run(tmp_path, "convergence-study", "--spec", _write(tmp_path, "s.json", spec),
                     "--levels", "1:7")
    assert code == 0
    res = _report(out, "convergence.json")["result"]
    assert len(res["rows"]) == 7 and res["gap_slope"] < 0


def test_outputs_are_reproducible(tmp_path):
    spec = _write(tmp_path, "s.json", AREA)
    dom = _write(tmp_path, "d.json", {"kind": "disk", "center": [0.5, 0.5], "radius": 0.3})
    texts = []
    for _ in range(2):
        assert main(["coeffs", "--spec", spec, "--levels", "0:2", "--out", str(tmp_path / "o")]) == 0
        assert main(["boxdim", "--domain", dom, "--levels", "1:6", "--out", str(tmp_path / "o")]) == 0
        texts.append([(tmp_path / "o" / n).read_bytes() for n in ("coeffs.csv", "boxcounts.csv")])
    assert texts[0] == texts[1]
    config = json.loads(texts[0][0].decode().splitlines()[0][len("# config="):])
    assert config["spec"] == spec and config["levels"] == [0, 2]
