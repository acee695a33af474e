"""Command-line interface and the compiled/fallback kernel pair."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from specdet import _pykernels, kernels
from specdet.cli import fmt_number, parse_complex, parse_grid, run


def call(argv, capsys):
    code = run(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


# -- CLI ----------------------------------------------------------------------------

def test_regdet_integers(capsys):
    code, out, _ = call(["regdet", "--model", "integers"], capsys)
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["model", "kernel_dim", "det", "log_det", "error"]
    assert float(rows[1][2]) == pytest.approx(math.sqrt(2 * math.pi), rel=1e-12)


def test_charfn_json_and_complex_lambda(capsys):
    code, out, _ = call(["charfn", "--model", "circle-full", "--lambda", "2+3i", "--format", "json"], capsys)
    assert code == 0
    doc = json.loads(out)
    val = doc["rows"][0][1]
    z = complex(val["re"], val["im"])
    want = 4 * np.sinh(2 * math.pi * np.sqrt(2 + 3j) / 2) ** 2
    assert z == pytest.approx(want, rel=1e-9)


def test_seventeen_digits():
    assert fmt_number(0.1) == "0.10000000000000001"
    assert fmt_number(2.0) == "2"
    assert fmt_number(1 + 2j) == "1+2j"
    for x in (math.pi, 1 / 3, 1e-300, 12345.678):
        assert float(fmt_number(x)) == x


def test_json_numbers_have_seventeen_digits(capsys):
    _, out, _ = call(["regdet", "--model", "integers", "--format", "json"], capsys)
    assert "2.5066282746310" in out
    det = json.loads(out)["rows"][0][2]
    assert det == pytest.approx(math.sqrt(2 * math.pi), rel=1e-12)


def test_output_is_deterministic(capsys):
    argv = ["tower", "--experiment", "det", "--levels", "1,2,4", "--lambda", "1"]
    _, a, _ = call(argv, capsys)
    _, b, _ = call(argv, capsys)
    assert a == b and a


def test_out_file(tmp_path, capsys):
    path = tmp_path / "o.csv"
    code, out, _ = call(["regdet", "--model", "circle-reduced", "--out", str(path)], capsys)
    assert code == 0 and out == ""
    assert path.read_text().startswith("model,")


@pytest.mark.parametrize("argv", [
    ["regdet", "--model", "nope"],
    ["charfn", "--model", "integers", "--lambda", "-2"],
    ["charfn", "--model", "integers", "--lambda", "abc"],
    ["regdet", "--model", "integers", "--tol-rel", "-1"],
    ["surface", "--lambda", "1"],
    ["regdet", "--spectrum", "/nonexistent/file.json"],
    ["bogus"],
])
def test_input_errors_exit_2(argv, capsys):
    code, _, err = call(argv, capsys)
    assert code == 2
    assert err


def test_nonconvergence_exit_3(capsys):
    code, _, err = call(["regdet", "--model", "integers", "--tol-abs", "1e-300", "--tol-rel", "1e-300"], capsys)
    assert code == 3
    assert "nonconvergence" in err


def test_allow_cut(capsys):
    code, out, _ = call(["charfn", "--model", "integers", "--lambda", "-2.5", "--allow-cut"], capsys)
    assert code == 0
    assert len(out.splitlines()) == 2


def test_surface_with_file(tmp_path, capsys):
    p = tmp_path / "ls.json"
    p.write_text(json.dumps({"genus": 2, "primitives": [{"length": 3.0, "count": 2}]}))
    code, out, _ = call(["surface", "--spectrum", str(p), "--lambda-grid", "0.5:1.5:3"], capsys)
    assert code == 0
    assert len(out.splitlines()) == 4


def test_parsers():
    assert parse_complex("2+3i") == 2 + 3j
    assert list(parse_grid("0:1:3")) == [0.0, 0.5, 1.0]
    with pytest.raises(ValueError):
        parse_grid("0:1")


def test_console_script_entry_point():
    proc = subprocess.run([sys.executable, "-m", "specdet.cli", "regdet", "--model", "integers"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert proc.stdout.startswith("model,")


# -- kernels ------------------------------------------------------------------------

def test_backend_reported():
    assert kernels.BACKEND in ("cython", "python")


@settings(max_examples=25, deadline=None)
@given(t=st.floats(0.01, 5.0), n=st.integers(10, 3000))
def test_theta_kernels_agree(t, n):
    k = np.arange(1, n + 1, dtype=float)
    vr, vi = k * 0.7, np.sin(k) * 0.1
    m = np.ones(n)
    ts = np.array([t])
    a, ua = kernels.theta_sum(vr, vi, m, ts, 1e-14, 1e-300)
    b, ub = _pykernels.theta_sum(vr, vi, m, ts, 1e-14, 1e-300)
    assert a[0] == pytest.approx(b[0], rel=1e-13)
    assert int(ua[0]) == int(ub[0])


def test_zero_weight_does_not_stop_sum():
    vr = np.array([1.0, 2.0, 3.0, 4.0])
    vi = np.zeros(4)
    m = np.array([1.0, 0.0, 0.0, 1.0])
    for impl in (kernels, _pykernels):
        s, _ = impl.theta_sum(vr, vi, m, np.array([1.0]), 1e-16, 1e-300)
        assert s[0].real == pytest.approx(math.exp(-1) + math.exp(-4), rel=1e-15)


def test_geodesic_kernels_agree():
    L = np.array([3.0, 3.5, 5.0])
    c = np.array([2.0, 2.0, 4.0])
    a = kernels.geodesic_log_sum(L, c, 1.2, 1e-16, 10_000_000)
    b = _pykernels.geodesic_log_sum(L, c, 1.2, 1e-16, 10_000_000)
    assert a[0] == pytest.approx(b[0], rel=1e-14)
    assert a[1] <= 1e-16


def test_pure_python_switch():
    env = dict(os.environ, SPECDET_PURE_PYTHON="1")
    code = ("import math; from specdet import kernels; from specdet.determinants import reg_det; "
            "from specdet.spectrum import integer_spectrum; "
            "print(kernels.BACKEND, abs(reg_det(integer_spectrum()).real - math.sqrt(2*math.pi)) < 1e-12)")
    proc = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert proc.stdout.split() == ["python", "True"]
