import json
import math

import pytest

from alpha_farey import HypothesisError, level_set_census, make_partition, singularity_experiment, spectrum_sweep

LOG2 = math.log(2)
H = make_partition("harmonic")
G3 = make_partition("geometric:3")


def test_singularity_is_deterministic():
    a = singularity_experiment(G3, n_samples=20, n_levels=200, seed=5)
    b = singularity_experiment(G3, n_samples=20, n_levels=200, seed=5)
    assert a.summary == b.summary and a.records == b.records
    assert a.inputs_hash == b.inputs_hash
    c = singularity_experiment(G3, n_samples=20, n_levels=200, seed=6)
    assert c.summary != a.summary


def test_singularity_parallel_matches_serial():
    a = singularity_experiment(G3, n_samples=12, n_levels=200, seed=1, n_jobs=1)
    b = singularity_experiment(G3, n_samples=12, n_levels=200, seed=1, n_jobs=3)
    assert a.records == b.records


def test_singularity_report_contents(tmp_path):
    rep = singularity_experiment(H, n_samples=10, n_levels=100, seed=0)
    d = rep.to_dict()
    assert d["partition"] == "harmonic" and d["thresholds"]["margin"] == 0.5
    assert len(d["inputs_hash"]) == 64
    j, c = rep.write(tmp_path)
    assert json.loads(j.read_text())["summary"] == json.loads(json.dumps(rep.summary))
    assert c.read_text().splitlines()[0] == "sample,level,drift,n_digits"


def test_singularity_drift_matches_typical_level():
    # digit-first sampling: the drift settles near s* - log 2
    rep = singularity_experiment(G3, n_samples=200, n_levels=2000, seed=0, margin=0.02, required_fraction=0.9)
    assert rep.summary["median_drift"] == pytest.approx(0.6365141682948128 - LOG2, abs=5e-3)
    assert rep.passed


def test_singularity_rejects_dyadic():
    with pytest.raises(HypothesisError):
        singularity_experiment(make_partition("dyadic"), n_samples=2)


def test_sweep_geometric():
    rep = spectrum_sweep(G3)
    s = [r["s"] for r in rep.records]
    assert LOG2 in s and len(s) == 21
    row = rep.records[s.index(LOG2)]
    assert row["sigma"] == pytest.approx(0.97907, abs=1e-4)
    assert rep.summary["concave"] and rep.summary["max_second_difference"] <= 1e-8
    assert rep.summary["sigma_at_s_star"] == pytest.approx(1.0, abs=1e-6)


def test_sweep_harmonic():
    rep = spectrum_sweep(H, s_grid=[0.3, 0.5, LOG2, 0.8, 1.2])
    assert all(0 < r["sigma"] <= 1 for r in rep.records)
    assert rep.summary["skipped"] == [{"s": 1.2, "note": "outside (0, 0.89588)"}]
    assert rep.summary["sigma_log2"] == pytest.approx(0.9594363064, abs=1e-9)


def test_census():
    rep = level_set_census(H, ["[2 per]", "[5 per]", "[1 per]", "oscillating(5,2)"])
    got = [(r["verdict"], r["rule"]) for r in rep.records]
    assert got == [
        ("Infinity", "LevelAboveLog2"),
        ("Zero", "LevelBelowLog2"),
        ("NotExist", "BMSet"),
        ("NotExist", "Straddle"),
    ]
    rep = level_set_census(G3, ["[1 per]", "[3 per]"])
    assert [r["verdict"] for r in rep.records] == ["Zero", "Infinity"]
    assert level_set_census(H, []).records == []


def test_census_rejects_finite_digits():
    with pytest.raises(ValueError):
        level_set_census(H, ["[2,3]"])
