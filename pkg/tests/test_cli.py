from __future__ import annotations

import io
import json

import pytest

from mgbar.cli import EXIT_DOMAIN, EXIT_OK, EXIT_USAGE, run


def _run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), out=out, err=err)
    return code, out.getvalue(), err.getvalue()


def _json(*argv):
    code, out, _ = _run("--json", *argv)
    assert code == EXIT_OK
    return json.loads(out)


def test_nef_cone_json_schema():
    data = _json("nef-cone", "--genus", "4")
    assert data["genus"] == 4
    assert len(data["rays"]) == 5
    assert {"row", "family"} <= set(data["inequalities"][0])
    assert all(e["citation"] for e in data["entries"])


def test_hg():
    data = _json("hg", "--genus", "1")
    assert data["entries"][0]["result"] == "1/96"


def test_m3_minimize():
    data = _json("m3", "minimize")
    assert data["point"] == [840, 60, 60]
    assert data["value"] == "650924662500"


def test_json_flag_after_subcommand():
    code, out, _ = _run("hg", "--genus", "2", "--json")
    assert code == EXIT_OK and json.loads(out)["entries"][0]["result"] == "1/2880"


def test_m3_conditions_citations():
    data = _json("m3", "conditions")
    assert data["lattice"] == [[420, 0, 0], [0, 30, 0], [0, 0, 60]]
    kinds = {c["kind"] for c in data["conditions"]}
    assert kinds == {"derived", "paper-data", "hybrid"}
    assert all(c["citation"] for c in data["conditions"])


def test_lambda_and_kappa():
    assert _json("lambda", "m4-l9")["entries"][2]["result"] == "1/113400"
    assert _json("lambda", "l3cubed")["entries"][1]["result"] == "1/43545600"
    results = {e["command"]: e["result"] for e in _json("lambda", "schottky")["entries"]}
    assert results["lambda schottky: [J₄] / λ"] == "16"
    data = _json("kappa", "witten-check")
    assert data["entries"][-1]["result"] == "True"


def test_testsurface_namespaced():
    data = _json("testsurface", "solve")
    assert data["determined"]["coef.h"] == "27/5"
    assert data["free"] == ["coef.c", "coef.d", "coef.e", "coef.f", "coef.k"]


def test_integrality_analyze(tmp_path):
    poly = {"vars": ["a", "b"], "terms": [{"coeff": "1/5", "exps": [1, 1]}]}
    f = tmp_path / "p.json"
    f.write_text(json.dumps(poly))
    data = _json("integrality", "analyze", "--poly", str(f), "--prime", "5", "--power", "1", "--simplify")
    assert data["condition"]["admitted_count"] == 9
    assert data["condition"]["simplified"] == "5|a ∨ 5|b"


def test_exit_codes():
    assert _run("bogus")[0] == EXIT_USAGE
    assert _run()[0] == EXIT_USAGE
    assert _run("hg", "--genus", "0")[0] == EXIT_DOMAIN
    assert _run("integrality", "analyze", "--poly", "/nonexistent.json", "--prime", "2")[0] == EXIT_DOMAIN


def test_approx_marked():
    code, out, _ = _run("--approx", "hg", "--genus", "3")
    assert code == EXIT_OK and "non-authoritative" in out and "1/10080" in out


@pytest.mark.parametrize(
    "argv",
    [("nef-cone", "--genus", "5"), ("m2", "conditions"), ("m3", "mod-chain"), ("kappa", "table"), ("--json", "m2", "minimize")],
)
def test_deterministic(argv):
    assert _run(*argv) == _run(*argv)
