"""Reproducible studies with machine-readable reports.

Random points are sampled digit-first: i.i.d. digits with ``P(l = k) = a_k``
are exactly the digits of a Lebesgue-uniform point.  Sample ``i`` of a run
with seed ``s`` uses the stream ``default_rng([s, i])``, so results do not
depend on worker count or order.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .codec import PERIODIC, parse_digits
from .derivative import (
    LOG2,
    classify_oscillating,
    classify_periodic,
    oscillating_digits,
    ratio_sequence,
)
from .errors import HypothesisError
from .partition import Partition
from .spectrum import legendre_sigma, mean_level, s_range

__all__ = [
    "ExperimentReport",
    "content_hash",
    "lebesgue_digits",
    "singularity_experiment",
    "spectrum_sweep",
    "level_set_census",
]


def content_hash(inputs: dict) -> str:
    blob = json.dumps(inputs, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode()).hexdigest()


@dataclass
class ExperimentReport:
    name: str
    partition: str
    seed: int | None
    n_samples: int
    records: list
    summary: dict
    thresholds: dict
    passed: bool | None
    inputs_hash: str = ""
    columns: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, default=_jsonable)

    def to_csv(self) -> str:
        buf = io.StringIO()
        cols = self.columns or (list(self.records[0]) if self.records else [])
        w = csv.DictWriter(buf, fieldnames=cols, extrasaction="ignore", lineterminator="\n")
        w.writeheader()
        for r in self.records:
            w.writerow({k: _jsonable(v) if isinstance(v, (list, tuple)) else v for k, v in r.items()})
        return buf.getvalue()

    def stem(self) -> str:
        part = re.sub(r"[^A-Za-z0-9.]+", "-", self.partition).strip("-")
        return f"{self.name}_{part}_{self.seed if self.seed is not None else 'noseed'}"

    def write(self, out_dir) -> tuple[Path, Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        j, c = out / f"{self.stem()}.json", out / f"{self.stem()}.csv"
        j.write_text(self.to_json() + "\n")
        c.write_text(self.to_csv())
        return j, c


def _jsonable(v):
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, (list, tuple)):
        return json.dumps([_jsonable(x) for x in v])
    return str(v)


# ----------------------------------------------------------------------
# singularity of theta


def lebesgue_digits(P: Partition, rng: np.random.Generator, levels: int) -> np.ndarray:
    """Digits of a Lebesgue-random point covering ``levels`` Farey levels.

    Digits above ``levels`` are capped: they fix the same level cylinders.
    """
    chunks, total = [], 0
    batch = max(16, levels // 2)
    while total < levels:
        u = 1.0 - rng.random(batch)  # uniform on (0, 1]
        d = P.index_of_array(u, cap=levels)
        chunks.append(d)
        total += int(d.sum())
    return np.concatenate(chunks)


def _singularity_sample(args):
    P, seed, i, levels = args
    rng = np.random.default_rng([seed, i])
    digits = lebesgue_digits(P, rng, levels)
    drift = float(ratio_sequence(P, digits, levels)[-1] / levels)
    return {"sample": i, "level": drift + LOG2, "drift": drift, "n_digits": int(np.searchsorted(np.cumsum(digits), levels) + 1)}


def singularity_experiment(P: Partition, n_samples: int = 200, n_levels: int = 300, seed: int = 0,
                           margin: float = 0.5, required_fraction: float = 0.95,
                           n_jobs: int = 1) -> ExperimentReport:
    """Fraction of Lebesgue-random points whose drift ``(1/n) log(2^-n / lambda(I_n))``
    is at most ``-margin`` at ``n = n_levels``."""
    if P.is_dyadic:
        raise HypothesisError("theta is the identity on the dyadic partition, hence not singular",
                              hypothesis="non-dyadic partition")
    jobs = [(P, seed, i, n_levels) for i in range(n_samples)]
    if n_jobs and n_jobs > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as ex:
            records = list(ex.map(_singularity_sample, jobs, chunksize=max(1, n_samples // (4 * n_jobs))))
    else:
        records = [_singularity_sample(j) for j in jobs]
    drifts = np.array([r["drift"] for r in records])
    frac = float(np.mean(drifts <= -margin))
    summary = {
        "fraction_below": frac,
        "median_drift": float(np.median(drifts)),
        "mean_drift": float(np.mean(drifts)),
        "q05_drift": float(np.quantile(drifts, 0.05)),
        "q95_drift": float(np.quantile(drifts, 0.95)),
        "mean_level_s_star": mean_level(P),
    }
    thresholds = {"n_levels": n_levels, "margin": margin, "required_fraction": required_fraction}
    inputs = {"name": "singularity", "partition": P.spec, "seed": seed, "n_samples": n_samples, **thresholds}
    return ExperimentReport("singularity", P.spec, seed, n_samples, records, summary, thresholds,
                            frac >= required_fraction, content_hash(inputs),
                            ["sample", "level", "drift", "n_digits"])


# ----------------------------------------------------------------------
# spectrum


def default_s_grid(P: Partition, n_points: int = 21) -> list:
    """``n_points - 1`` interior points of the level range plus ``log 2``."""
    sr = s_range(P)
    inner = np.linspace(sr.s_minus, sr.s_plus, n_points + 1)[1:-1]
    grid = set(float(s) for s in inner)
    if sr.contains(LOG2):
        grid.add(LOG2)
    return sorted(grid)


def spectrum_sweep(P: Partition, s_grid=None, n_points: int = 21) -> ExperimentReport:
    """One spectrum point per admissible level; out-of-range levels are skipped with a note."""
    sr = s_range(P)
    grid = default_s_grid(P, n_points) if s_grid is None else [float(s) for s in s_grid]
    records, skipped = [], []
    for s in grid:
        if not sr.contains(s):
            skipped.append({"s": s, "note": f"outside ({sr.s_minus:.6g}, {sr.s_plus:.6g})"})
            continue
        pt = legendre_sigma(P, s, check_range=False)
        records.append({"s": pt.s, "u_star": pt.u_star, "v": pt.v_at_u, "sigma": pt.sigma,
                        "boundary_branch": pt.boundary_branch})
    s = np.array([r["s"] for r in records])
    sig = np.array([r["sigma"] for r in records])
    if len(s) >= 3:
        # divided second differences handle uneven grids
        d1 = np.diff(sig) / np.diff(s)
        d2 = np.diff(d1) / ((s[2:] - s[:-2]) / 2)
        max_d2 = float(np.max(d2 * np.mean(np.diff(s)) ** 2))
    else:
        max_d2 = float("nan")
    s_star = mean_level(P)
    summary = {
        "s_minus": sr.s_minus,
        "s_plus": sr.s_plus,
        "max_second_difference": max_d2,
        "concave": bool(max_d2 <= 1e-8) if len(s) >= 3 else None,
        "max_sigma": float(sig.max()) if len(sig) else None,
        "all_in_unit_interval": bool(np.all((sig >= 0) & (sig <= 1))),
        "s_star": s_star if math.isfinite(s_star) else None,
        "skipped": skipped,
    }
    if any(abs(r["s"] - LOG2) < 1e-15 for r in records):
        summary["sigma_log2"] = next(r["sigma"] for r in records if abs(r["s"] - LOG2) < 1e-15)
    if math.isfinite(s_star) and sr.contains(s_star):
        summary["sigma_at_s_star"] = legendre_sigma(P, s_star, check_range=False).sigma
    passed = bool(summary["all_in_unit_interval"] and summary["concave"] is not False)
    inputs = {"name": "sweep", "partition": P.spec, "grid": grid}
    return ExperimentReport("sweep", P.spec, None, len(records), records, summary,
                            {"concavity_tol": 1e-8}, passed, content_hash(inputs),
                            ["s", "u_star", "v", "sigma"])


# ----------------------------------------------------------------------
# level sets

_OSC = re.compile(r"^\s*osc(?:illating)?\(\s*(\d+)\s*,\s*(\d+)\s*(?:,\s*([\w.]+)\s*)?\)\s*$")


def level_set_census(P: Partition, families) -> ExperimentReport:
    """Verdicts and levels for constructed points.

    Each family is a periodic digit string such as ``"[2 per]"`` or
    ``"oscillating(a,b[,growth])"`` with growth a ratio or
    ``superexponential``.
    """
    if P.is_dyadic:
        raise HypothesisError("theta is the identity on the dyadic partition", hypothesis="non-dyadic partition")
    sr = s_range(P)
    rows = []
    for spec in families:
        m = _OSC.match(spec)
        if m:
            a, b = int(m.group(1)), int(m.group(2))
            growth = m.group(3) or 10
            if growth != "superexponential":
                growth = float(growth)
            v = classify_oscillating(P, a, b, growth)
            digits = oscillating_digits(a, b, growth, v.n_used)
        else:
            d = parse_digits(spec)
            if d.kind != PERIODIC:
                raise ValueError(f"census entries must be periodic or oscillating: {spec!r}")
            v = classify_periodic(P, d)
            digits = d
        r = ratio_sequence(P, digits, v.n_used)
        rows.append({
            "digits": spec,
            "s_liminf": v.s_liminf,
            "s_limsup": v.s_limsup,
            "verdict": v.verdict,
            "rule": v.rule,
            "in_level_range": bool(sr.s_minus <= v.s_liminf and v.s_limsup <= sr.s_plus),
            "final_log_ratio": float(r[-1]),
            "min_log_ratio": float(r.min()),
            "max_log_ratio": float(r.max()),
        })
    inputs = {"name": "census", "partition": P.spec, "families": list(families)}
    return ExperimentReport("census", P.spec, None, len(rows), rows,
                            {"rows": len(rows)}, {}, None, content_hash(inputs),
                            ["digits", "s_liminf", "s_limsup", "verdict", "rule", "in_level_range", "final_log_ratio"])
