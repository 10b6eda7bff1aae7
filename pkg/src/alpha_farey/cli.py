"""Command-line interface.

Exit codes: 0 success, 2 input error, 3 a result's hypotheses are violated
(dyadic partition where excluded, level outside the admissible range).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import re
import sys
from dataclasses import asdict, is_dataclass
from fractions import Fraction

import mpmath

from . import codec, conjugacy, derivative, dynamics, experiments, spectrum
from .errors import AlphaFareyError, HypothesisError
from .partition import classify_partition, make_partition

LOG2 = math.log(2.0)
_OSC = re.compile(r"^\s*osc(?:illating)?\(\s*(\d+)\s*,\s*(\d+)\s*(?:,\s*([\w.]+)\s*)?\)\s*$")


class InputError(AlphaFareyError, ValueError):
    pass


# ----------------------------------------------------------------------
# helpers


def _real(text: str):
    """Parse ``3/4`` or ``0.75`` as an exact Fraction, anything else as mpf."""
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        try:
            return mpmath.mpf(text)
        except (ValueError, TypeError) as exc:
            raise InputError(f"not a real number: {text!r}") from exc


def _num(x):
    if isinstance(x, Fraction):
        return {"value": float(x), "exact": f"{x.numerator}/{x.denominator}" if x.denominator != 1 else str(x.numerator)}
    if isinstance(x, mpmath.mpf):
        return {"value": float(x), "decimal": mpmath.nstr(x, 30)}
    return {"value": float(x)}


def _plain(x):
    if isinstance(x, Fraction):
        return float(x)
    if isinstance(x, mpmath.mpf):
        return float(x)
    if is_dataclass(x):
        return _plain(asdict(x))
    if isinstance(x, dict):
        return {k: _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, set, frozenset)):
        return [_plain(v) for v in x]
    if hasattr(x, "item"):
        return x.item()
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    return x


def _level_out(s, bits):
    return s / LOG2 if bits else s


def _level_in(s, bits):
    return s * LOG2 if bits else s


def _need(args, *names):
    for n in names:
        if getattr(args, n, None) is None:
            raise InputError(f"--{n.replace('_', '-')} is required for {args.command}")


def _digits(args):
    _need(args, "digits")
    return codec.parse_digits(args.digits)


def _point_digits(args, P):
    """Digits from ``-d`` or, with ``--depth``, from ``-x``."""
    if args.digits is not None:
        return codec.parse_digits(args.digits)
    if args.x is None:
        raise InputError("give the point with -d DIGITS or -x REAL --depth N")
    if args.depth is None:
        raise InputError("real input needs --depth to bound digit extraction")
    x = _real(args.x)
    if isinstance(x, Fraction) and not P.exact:
        x = mpmath.mpf(x.numerator) / x.denominator
    return codec.luroth_digits(P, x, depth=args.depth)


# ----------------------------------------------------------------------
# commands


def cmd_partition(args, P):
    if args.action != "info":
        raise InputError(f"unknown partition action {args.action!r}")
    n = list(range(1, (args.depth or 8) + 1))
    cls = classify_partition(P)
    sr = spectrum.s_range(P)
    out = {
        "family": P.family.value,
        "param": None if P.param is None else float(P.param),
        "exact_arithmetic": P.exact,
        "horizon": P.horizon,
        "class": asdict(cls),
        "atoms": [P.atom(k) for k in n],
        "tails": [P.tail(k) for k in n],
        "s_range": {**asdict(sr), "s_minus": _level_out(sr.s_minus, args.bits), "s_plus": _level_out(sr.s_plus, args.bits)},
    }
    if not P.is_dyadic:
        m = derivative.m_set(P)
        out["m_set"] = {"members": sorted(m.members), "complete": m.complete}
    return out


def cmd_expand(args, P):
    _need(args, "x", "depth")
    x = _real(args.x)
    if isinstance(x, Fraction) and not P.exact:
        x = mpmath.mpf(x.numerator) / x.denominator
    d = codec.luroth_digits(P, x, depth=args.depth)
    return {"digits": str(d), "kind": d.kind, "farey_word": str(codec.luroth_to_farey(d))}


def cmd_value(args, P):
    d = _digits(args)
    mode = "exact" if P.exact else "high"
    with mpmath.workdps(max(30, 10 * (args.depth or 0))):
        v = codec.luroth_value(P, d, depth=args.depth if d.kind != codec.FINITE else None, mode=mode)
    return {**_num(v.value), "error_bound": v.error_bound, "terms": v.terms}


def cmd_theta(args, P):
    tol = args.tol or 1e-12
    t = conjugacy.theta(_point_digits(args, P), tol)
    return {**_num(t.value), "error_bound": t.error_bound, "terms_used": t.terms_used, "partial": t.partial}


def cmd_theta_inv(args, P):
    _need(args, "x")
    y = _real(args.x)
    inv = conjugacy.theta_inverse(P, Fraction(y) if not isinstance(y, Fraction) else y, args.depth or 20)
    c = inv.interval
    return {
        "word": str(inv.word),
        "left": _num(c.left),
        "right": _num(c.right),
        "theta_left": _num(inv.theta_left),
        "theta_right": _num(inv.theta_right),
        "log_lambda": c.log_lambda,
    }


def cmd_orbit(args, P):
    steps = args.steps
    f = dynamics.farey_map if args.map == "farey" else dynamics.luroth_map
    if args.digits is not None:
        d = codec.parse_digits(args.digits)
        mode = "exact" if P.exact else "high"
        with mpmath.workdps(50):
            x = codec.luroth_value(P, d, depth=None if d.kind != codec.TRUNCATED else None, mode=mode).value
    else:
        _need(args, "x")
        x = _real(args.x)
        if isinstance(x, Fraction) and not P.exact:
            x = mpmath.mpf(x.numerator) / x.denominator
    with mpmath.workdps(50):
        pts = dynamics.orbit(lambda y: f(P, y), x, steps)
    return {"map": args.map, "orbit": [_num(p) for p in pts]}


def cmd_lyapunov(args, P):
    d = _point_digits(args, P)
    if d.kind == codec.PERIODIC and args.steps is None:
        lam = dynamics.lyapunov_farey(P, d)
        exact = True
    else:
        lam = dynamics.lyapunov_farey(P, d, args.steps or sum(d.digits))
        exact = False
    pi = dynamics.pi_luroth(P, d) if d.kind == codec.PERIODIC else dynamics.pi_luroth(P, d, len(d.digits))
    return {"lyapunov": _level_out(lam, args.bits), "pi_luroth": _level_out(pi, args.bits),
            "level": _level_out(-pi, args.bits), "exact_cycle": exact, "units": "bits" if args.bits else "nats"}


def cmd_classify(args, P):
    _need(args, "digits")
    m = _OSC.match(args.digits)
    if m:
        growth = m.group(3) or 10
        if growth != "superexponential":
            growth = float(growth)
        v = derivative.classify_oscillating(P, int(m.group(1)), int(m.group(2)), growth)
    else:
        d = codec.parse_digits(args.digits)
        if d.kind == codec.PERIODIC:
            v = derivative.classify_periodic(P, d)
        else:
            v = derivative.classify_empirical(P, list(d.digits), args.n_max, args.margin)
    out = v.to_dict(evidence=args.evidence)
    out["s_liminf"] = _level_out(out["s_liminf"], args.bits)
    out["s_limsup"] = _level_out(out["s_limsup"], args.bits)
    return out


def cmd_spectrum(args, P):
    if args.s is not None:
        s = _level_in(args.s, args.bits)
        pt = spectrum.legendre_sigma(P, s)
        return {"s": _level_out(pt.s, args.bits), "u_star": pt.u_star, "v": pt.v_at_u, "sigma": pt.sigma,
                "boundary_branch": pt.boundary_branch, "tolerance": 1e-10}
    rep = experiments.spectrum_sweep(P, n_points=args.points)
    rows = [{**r, "s": _level_out(r["s"], args.bits)} for r in rep.records]
    return {"s_range": {"s_minus": _level_out(rep.summary["s_minus"], args.bits),
                        "s_plus": _level_out(rep.summary["s_plus"], args.bits)},
            "rows": rows, "_table": rows}


def cmd_dims(args, P):
    d = spectrum.theorem_dimensions(P)
    return {**d, "tolerance": 1e-10}


def cmd_verify(args, P):
    d = _point_digits(args, P)
    chk = conjugacy.check_conjugacy(P, d, args.steps, args.tol or 1e-12)
    return {"max_residual": chk.max_residual, "bound": chk.bound, "steps": chk.steps}


def cmd_experiment(args, P):
    kind = args.kind
    if kind == "singularity":
        rep = experiments.singularity_experiment(
            P, args.samples, args.levels, args.seed or 0, args.margin, args.required, args.jobs)
    elif kind == "sweep":
        rep = experiments.spectrum_sweep(P, n_points=args.points)
    elif kind == "census":
        fams = [f.strip() for f in re.split(r";(?![^(]*\))", args.families or "") if f.strip()]
        rep = experiments.level_set_census(P, fams)
    else:
        raise InputError(f"unknown experiment {kind!r}")
    out = {"report": rep.to_dict(), "_table": rep.records}
    if args.out:
        j, c = rep.write(args.out)
        out["files"] = [str(j), str(c)]
    return out


def cmd_convert(args, P):
    _need(args, "to")
    dst = make_partition(args.to)
    d = _point_digits(args, P)
    depth = args.depth or 40
    x = conjugacy.conjugate_between(P, dst, d, depth)
    return {**_num(x), "target": dst.spec, "theta_tolerance": 2.0 ** (1 - depth)}


COMMANDS = {
    "partition": cmd_partition,
    "expand": cmd_expand,
    "value": cmd_value,
    "theta": cmd_theta,
    "theta-inv": cmd_theta_inv,
    "orbit": cmd_orbit,
    "lyapunov": cmd_lyapunov,
    "classify": cmd_classify,
    "spectrum": cmd_spectrum,
    "dims": cmd_dims,
    "verify-conjugacy": cmd_verify,
    "experiment": cmd_experiment,
    "convert": cmd_convert,
}


# ----------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-p", "--partition", default="harmonic", help="dyadic | harmonic | geometric:T | powerlaw:T | custom:PATH")
    common.add_argument("-d", "--digits", help="digit string such as [2,3], [1;(2,5)] or [2,3,...]")
    common.add_argument("-x", help="real number (exact as p/q or decimal)")
    common.add_argument("--depth", type=int, help="digit / level depth")
    common.add_argument("--tol", type=float, help="series tolerance")
    common.add_argument("--seed", type=int, help="random seed")
    common.add_argument("--format", choices=["json", "csv", "plain"], default="json")
    common.add_argument("--bits", action="store_true", help="levels in bits instead of nats")
    common.add_argument("--horizon", type=int, default=10**6)

    parser = argparse.ArgumentParser(prog="alpha-farey", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("partition", parents=[common], help="describe a partition")
    p.add_argument("action", choices=["info"])
    sub.add_parser("expand", parents=[common], help="digits of a real number")
    sub.add_parser("value", parents=[common], help="value of a digit string")
    sub.add_parser("theta", parents=[common], help="conjugacy theta at a point")
    sub.add_parser("theta-inv", parents=[common], help="invert theta at -x")
    p = sub.add_parser("orbit", parents=[common], help="orbit under the Farey or Lüroth map")
    p.add_argument("--steps", type=int, default=10)
    p.add_argument("--map", choices=["farey", "luroth"], default="farey")
    p = sub.add_parser("lyapunov", parents=[common], help="Lyapunov exponent and level")
    p.add_argument("--steps", type=int)
    p = sub.add_parser("classify", parents=[common], help="classify the derivative of theta")
    p.add_argument("--n-max", type=int, default=400)
    p.add_argument("--margin", type=float, default=0.05)
    p.add_argument("--evidence", action="store_true")
    p = sub.add_parser("spectrum", parents=[common], help="dimension spectrum sigma(s)")
    p.add_argument("-s", type=float, help="level (nats, or bits with --bits)")
    p.add_argument("--points", type=int, default=21)
    sub.add_parser("dims", parents=[common], help="dimensions of the derivative level sets")
    p = sub.add_parser("verify-conjugacy", parents=[common], help="check theta F = T theta along an orbit")
    p.add_argument("--steps", type=int, default=10)
    p = sub.add_parser("experiment", parents=[common], help="run a reproducible study")
    p.add_argument("kind", choices=["singularity", "sweep", "census"])
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--levels", type=int, default=300)
    p.add_argument("--margin", type=float, default=0.5)
    p.add_argument("--required", type=float, default=0.95)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--points", type=int, default=21)
    p.add_argument("--families", help="';'-separated digit specs, e.g. '[2 per];oscillating(5,2)'")
    p.add_argument("--out", help="directory for JSON/CSV report files")
    p = sub.add_parser("convert", parents=[common], help="transport a point to another partition")
    p.add_argument("--to", help="target partition spec")
    return parser


def _render(payload: dict, fmt: str) -> str:
    table = payload.pop("_table", None)
    if fmt == "json":
        return json.dumps(_plain(payload), indent=2)
    if fmt == "csv":
        rows = table if table is not None else [_flatten(_plain(payload))]
        buf = io.StringIO()
        cols = list(dict.fromkeys(k for r in rows for k in r))
        w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow(_flatten(_plain(r)))
        return buf.getvalue().rstrip("\n")
    return "\n".join(f"{k}: {v}" for k, v in _flatten(_plain(payload)).items())


def _flatten(d, prefix=""):
    out = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        elif isinstance(v, list):
            out[key] = json.dumps(v)
        else:
            out[key] = v
    return out


def _config(args) -> dict:
    return {k: v for k, v in vars(args).items() if v is not None and v is not False}


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        P = make_partition(args.partition, args.horizon)
        payload = COMMANDS[args.command](args, P)
    except HypothesisError as exc:
        stderr.write(json.dumps({"error": str(exc), "hypothesis": exc.hypothesis, "exit": 3}) + "\n")
        return 3
    except (AlphaFareyError, ValueError, ArithmeticError) as exc:
        stderr.write(json.dumps({"error": str(exc), "exit": 2}) + "\n")
        return 2
    payload = {**payload, "config": {**_config(args), "partition": P.spec}}
    stdout.write(_render(payload, args.format) + "\n")
    return 0


def main(argv=None):
    sys.exit(run(argv))
