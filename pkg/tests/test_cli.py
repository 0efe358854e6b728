import io
import json
import subprocess
import sys

import numpy as np
import pytest

from kobalab import automorphisms as au
from kobalab import cli
from kobalab.cli import dumps, fmt_float, main
from kobalab.domains import Ellipse
from kobalab.errors import NumericError, SearchFailure

BALL2 = '{"kind":"ball","dim":2}'
DISC = '{"kind":"ball","dim":1}'
E12 = '{"kind":"ellipse","exponents":[1,2]}'


def aut(g):
    return json.dumps(au.automorphism_to_json(g))


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_float_format():
    assert fmt_float(1.0) == "1"
    assert fmt_float(0.1) == "0.10000000000000001"
    assert dumps({"a": [1.5, None, True, "x"]}) == '{"a":[1.5,null,true,"x"]}'


def test_metric_example(capsys):
    code, out, _ = run(capsys, "metric", "--domain", BALL2, "--point", "[0,0]", "--vector", "[1,0]")
    js = json.loads(out)
    assert code == 0 and js["lower"] <= 1 <= js["upper"] and js["estimate"] == pytest.approx(1.0)
    assert js["seed"] == 0


def test_classify_example(capsys):
    code, out, _ = run(capsys, "classify", "--domain", DISC, "--aut", aut(au.h_a(0.5)))
    assert code == 0
    assert out.startswith('{"classification":"hyperbolic","ell_plus":[1,0],')
    assert json.loads(out)["translation_length"] == pytest.approx(np.arctanh(0.5), abs=1e-3)


@pytest.mark.parametrize("argv", [
    ["classify", "--domain", DISC, "--aut", "{not json"],
    ["metric", "--domain", '{"kind":"ball","dim":2,"extra":1}', "--point", "[0,0]", "--vector", "[1,0]"],
    ["metric", "--domain", BALL2, "--point", "[0,0,0]", "--vector", "[1,0]"],
    ["metric", "--domain", BALL2, "--point", "[2,0]", "--vector", "[1,0]"],
    ["decompose", "--aut", aut(au.h_a(0.5))],
])
def test_input_errors_exit_1(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 1 and out == "" and "input error" in err


def test_unknown_flag_exit_1():
    r = subprocess.run([sys.executable, "-m", "kobalab.cli", "metric", "--bogus", "1"], capture_output=True)
    assert r.returncode == 1


def test_coincident_pingpong_is_input_error(capsys):
    code, _, _ = run(capsys, "pingpong", "--domain", DISC, "--aut", aut(au.h_a(0.5)), "--aut2", aut(au.h_a(0.5)))
    assert code == 1


@pytest.mark.parametrize("exc,code", [(SearchFailure("no"), 2), (NumericError("nan"), 3)])
def test_error_exit_codes(monkeypatch, exc, code):
    def boom(cfg):
        raise exc

    monkeypatch.setitem(cli.HANDLERS, "metric", boom)
    err = io.StringIO()
    assert cli.run(cli.RunConfig("metric"), io.StringIO(), err) == code
    assert err.getvalue()


def test_config_file_rejects_unknown_fields(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"command": "metric", "colour": 1}))
    code, _, err = run(capsys, "metric", "--config", str(cfg))
    assert code == 1 and "unknown config fields" in err
    cfg.write_text(json.dumps({"command": "metric", "domain": json.loads(BALL2), "point": [[0, 0]],
                               "vector": "[0,1]"}))
    code, out, _ = run(capsys, "metric", "--config", str(cfg))
    assert code == 0 and json.loads(out)["estimate"] == pytest.approx(1.0)


def test_decompose_outputs(capsys):
    g = au.random_moebius(2, np.random.default_rng(1))
    code, out, _ = run(capsys, "decompose", "--aut", aut(g), "--kak")
    js = json.loads(out)
    assert code == 0 and js["t"] >= 0 and js["residuals"]["reconstruction"] < 1e-9
    code, out, _ = run(capsys, "decompose", "--aut", aut(g), "--jordan")
    assert code == 0 and json.loads(out)["label"] in ("L-elliptic", "L-hyperbolic", "L-unipotent", "mixed")


def test_csv_outputs(capsys, tmp_path):
    code, out, _ = run(capsys, "orbit", "--domain", DISC, "--aut", aut(au.h_a(0.5)), "--point", "[0]",
                       "--n-max", "3")
    lines = out.strip().split("\n")
    assert code == 0 and lines[0] == "seed,n,re_z1,im_z1,boundary_distance" and len(lines) == 5
    path = tmp_path / "geo.csv"
    code, _, _ = run(capsys, "geodesic", "--domain", BALL2, "--point", "[0.1,0]", "--point", "[0,0.5]",
                     "--samples", "8", "--out", str(path))
    assert code == 0 and path.read_text().startswith("seed,t,re_z1")


def test_limit_set_and_equivariance(capsys):
    E = Ellipse((1, 2))
    g = aut(au.webster_from_moebius(E, au.h_a(0.5), [0.3]))
    g2 = aut(au.webster_from_moebius(E, au.rotation(1.0)))
    code, out, _ = run(capsys, "limit-set", "--domain", E12, "--aut", g, "--aut2", g2, "--samples", "20")
    assert code == 0 and len(out.strip().split("\n")) == 21
    code, out, _ = run(capsys, "equivariance", "--domain", E12, "--aut", g, "--samples", "100", "--seed", "5")
    js = json.loads(out)
    assert code == 0 and js["max_residual"] <= 1e-9 and js["seed"] == 5


def test_byte_identical_runs():
    argv = [sys.executable, "-m", "kobalab.cli", "distance", "--domain", E12, "--point", "[0.1,0.2]",
            "--point", '["0.3+0.1j",0]', "--seed", "3"]
    a = subprocess.run(argv, capture_output=True, check=True).stdout
    b = subprocess.run(argv, capture_output=True, check=True).stdout
    assert a == b and b'"seed":3' in a


def test_threads_env(capsys, monkeypatch):
    monkeypatch.setenv("KOBA_THREADS", "zero")
    code, _, err = run(capsys, "metric", "--domain", BALL2, "--point", "[0,0]", "--vector", "[1,0]")
    assert code == 1
