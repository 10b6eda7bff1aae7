import csv
import io
import json
import subprocess
import sys

import pytest

from alpha_farey.cli import run


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def call_json(*argv):
    code, out, err = call(*argv)
    assert code == 0, err
    return json.loads(out)


def test_theta_example():
    d = call_json("theta", "-p", "harmonic", "-d", "[2,3]")
    assert d["value"] == 0.4375 and d["error_bound"] == 0.0
    assert d["config"]["partition"] == "harmonic" and d["config"]["digits"] == "[2,3]"


def test_dims_example():
    d = call_json("dims", "-p", "geometric:3")
    assert d["dim_theta_inf"] == pytest.approx(0.9791, abs=1e-4)
    assert d["dim_theta_sim"] == d["dim_theta_inf"] and d["dim_theta_0"] == 1.0
    assert d["tolerance"] > 0


def test_dyadic_classify_exit_3():
    code, out, err = call("classify", "-p", "dyadic", "-d", "[2 per]")
    assert code == 3 and out == ""
    payload = json.loads(err)
    assert "identity" in payload["error"] and payload["hypothesis"]


def test_out_of_range_exit_3():
    code, _, err = call("spectrum", "-p", "harmonic", "-s", "5")
    assert code == 3 and "s_minus < s < s_plus" in err


@pytest.mark.parametrize(
    "argv",
    [
        ["theta", "-p", "weird", "-d", "[2]"],
        ["theta", "-p", "harmonic", "-d", "[0]"],
        ["expand", "-p", "harmonic", "-x", "1/3"],
        ["theta", "-p", "harmonic", "-d", "[2]", "--bogus"],
        ["nosuchcommand"],
    ],
)
def test_input_errors_exit_2(argv):
    code, _, _ = call(*argv)
    assert code == 2


@pytest.mark.parametrize("digits", ["[2,3]", "[1,2]", "[7,1,4,2]", "[3,3,3,3,10]"])
def test_value_then_expand(digits):
    v = call_json("value", "-p", "harmonic", "-d", digits)
    e = call_json("expand", "-p", "harmonic", "-x", v["exact"], "--depth", "50")
    assert e["digits"] == digits and e["kind"] == "finite"


def test_bits_toggle():
    nats = call_json("lyapunov", "-p", "harmonic", "-d", "[2 per]")
    bits = call_json("lyapunov", "-p", "harmonic", "-d", "[2 per]", "--bits")
    assert bits["level"] == pytest.approx(nats["level"] / 0.6931471805599453)
    a = call_json("spectrum", "-p", "geometric:3", "-s", "1", "--bits")
    b = call_json("spectrum", "-p", "geometric:3", "-s", "0.6931471805599453")
    assert a["sigma"] == pytest.approx(b["sigma"], abs=1e-12) and a["s"] == pytest.approx(1.0)


def test_theta_inverse_and_convert():
    d = call_json("theta-inv", "-p", "harmonic", "-x", "7/8", "--depth", "3")
    assert d["left"]["exact"] == "3/4" and d["right"]["exact"] == "5/6"
    d = call_json("convert", "-p", "harmonic", "--to", "dyadic", "-d", "[2,3]")
    assert d["exact"] == "7/16" and d["theta_tolerance"] > 0


def test_orbit_and_verify():
    d = call_json("orbit", "-p", "harmonic", "-d", "[2,3]", "--steps", "4")
    assert [p["exact"] for p in d["orbit"]] == ["4/9", "5/6", "1/3", "1/2", "1"]
    d = call_json("verify-conjugacy", "-p", "powerlaw:1.5", "-d", "[2,3,1,5,2,2,7,1,1,3]", "--steps", "40")
    assert d["max_residual"] <= 1e-9 and "bound" in d


def test_classify_oscillating():
    d = call_json("classify", "-p", "harmonic", "-d", "oscillating(5,2)")
    assert d["verdict"] == "NotExist" and d["rule"] == "Straddle"


def test_partition_info_plain():
    code, out, _ = call("partition", "info", "-p", "harmonic", "--format", "plain")
    assert code == 0
    assert "family: harmonic" in out and "m_set.members: [1]" in out


def test_csv_experiment(tmp_path):
    code, out, _ = call("experiment", "census", "-p", "geometric:3", "--families", "[1 per];[3 per]",
                        "--format", "csv", "--out", str(tmp_path))
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [r["verdict"] for r in rows] == ["Zero", "Infinity"]
    assert sorted(p.suffix for p in tmp_path.iterdir()) == [".csv", ".json"]


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "alpha_farey", "theta", "-p", "harmonic", "-d", "[2]"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)["exact"] == "1/2"
