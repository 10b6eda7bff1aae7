"""Classification of the derivative of ``theta`` into zero, infinity or neither.

Everything is driven by the Farey cylinders ``I_n(x)`` around a point: the
log-ratio ``log(2^-n / lambda(I_n))`` and the running level
``s_n = -log(lambda(I_n)) / n``.  A level above ``log 2`` pushes the
derivative to infinity, below ``log 2`` to zero.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from .codec import PERIODIC, LurothDigits, luroth_digits
from .dynamics import cycle_level
from .errors import DigitError, HypothesisError
from .partition import Family, Partition

__all__ = [
    "LOG2",
    "ZERO",
    "INFINITY",
    "NOT_EXIST",
    "UNDETERMINED",
    "DerivativeVerdict",
    "MSet",
    "m_set",
    "ratio_sequence",
    "running_levels",
    "approximant_ratio",
    "approximant_ratios",
    "zero_criterion",
    "zero_criteria",
    "FactorLimit",
    "alpha_rational_factor",
    "classify_periodic",
    "oscillating_digits",
    "oscillation_limits",
    "classify_oscillating",
    "classify_empirical",
]

LOG2 = math.log(2.0)

ZERO = "Zero"
INFINITY = "Infinity"
NOT_EXIST = "NotExist"
UNDETERMINED = "Undetermined"

LEVEL_BELOW = "LevelBelowLog2"
LEVEL_ABOVE = "LevelAboveLog2"
STRADDLE = "Straddle"
BM_SET = "BMSet"
FACTOR = "AlphaRationalFactor"
INCONCLUSIVE = "Inconclusive"

BAND = 1e-12


@dataclass(frozen=True)
class DerivativeVerdict:
    verdict: str
    rule: str
    s_liminf: float
    s_limsup: float
    n_used: int
    evidence: dict = field(default_factory=dict, compare=False)

    def to_dict(self, evidence: bool = False) -> dict:
        d = asdict(self)
        if not evidence:
            d.pop("evidence")
        return d


def _reject_dyadic(P: Partition):
    if P.is_dyadic:
        raise HypothesisError(
            "theta is the identity on the dyadic partition, so its derivative is 1 "
            "everywhere and the zero/infinity classification is vacuous",
            hypothesis="non-dyadic partition",
        )


# ----------------------------------------------------------------------
# the set M = {i : a_i = 2^-i}


@dataclass(frozen=True)
class MSet:
    members: frozenset
    complete: bool
    scanned: int

    def __contains__(self, i):
        return i in self.members


def _is_half_power(P: Partition, i: int) -> bool:
    if P.exact:
        return P.atom_exact(i) == Fraction(1, 1 << i)
    return abs(P.log_atom(i) + i * LOG2) <= 1e-15 * i * LOG2


def m_set(P: Partition, scan: int = 2000) -> MSet:
    """Indices with ``a_i = 2^-i``.

    Exact for rational families; otherwise a relative ``1e-15`` comparison
    with a warning.  ``complete`` records whether the tail model rules out
    further members beyond the scan.
    """
    fam = P.family
    if fam is Family.DYADIC:
        return MSet(frozenset(range(1, P.horizon + 1)), True, P.horizon)
    if fam is Family.HARMONIC:
        # i(i+1) is a power of two only for i = 1
        return MSet(frozenset({1}), True, P.horizon)
    if not P.exact:
        warnings.warn(f"M-set membership for {P.spec} tested in floating point", RuntimeWarning)
    if fam is Family.GEOMETRIC:
        # (tau - 1) tau^-i = 2^-i has at most the single solution i = K(tau)
        from .spectrum import pvb_threshold

        k = pvb_threshold(float(P.param))
        i = round(k)
        found = {i} if i >= 1 and abs(k - i) < 1e-9 and _is_half_power(P, i) else set()
        return MSet(frozenset(found), True, P.horizon)
    n = min(scan, P.horizon)
    idx = np.arange(1, n + 1)
    gap = P.log_atom(idx) + idx * LOG2
    found = {int(i) for i in idx[np.abs(gap) <= 1e-9 * idx] if _is_half_power(P, int(i))}
    # settled once the gap grows monotonically away from zero at the end
    tail = gap[-max(10, n // 10):]
    complete = bool(np.all(np.diff(np.abs(tail)) > 0) and np.min(np.abs(tail)) > 1.0)
    return MSet(frozenset(found), complete, n)


# ----------------------------------------------------------------------
# cylinder measures along a point


def _digits_covering(P: Partition, d, levels: int) -> np.ndarray:
    if isinstance(d, LurothDigits):
        return np.asarray(d.prefix_covering(levels), dtype=np.int64)
    if isinstance(d, (Fraction, float, int)) and not isinstance(d, bool):
        return np.asarray(_real_digits(P, d, levels), dtype=np.int64)
    arr = np.asarray(d, dtype=np.int64)
    if arr.sum() < levels:
        raise DigitError(f"digits cover only {int(arr.sum())} Farey levels, need {levels}")
    return arr


def _real_digits(P: Partition, x, levels: int) -> list:
    if isinstance(x, Fraction):
        if not P.exact:
            raise DigitError("exact rational input needs a rational partition")
        d = luroth_digits(P, x, depth=levels)
        digits = list(d.digits)
        if sum(digits) < levels:
            # finite expansion: the point is an endpoint of every deeper cylinder
            raise DigitError(f"{x} has a finite expansion covering only {sum(digits)} levels")
        return digits
    d = luroth_digits(P, x)
    if sum(d.digits) < levels:
        raise DigitError(
            f"float input yields {sum(d.digits)} reliable Farey levels, need {levels}; pass digits instead"
        )
    return list(d.digits)


def _log_lambda_levels(P: Partition, digits: np.ndarray, n_max: int) -> np.ndarray:
    """``log lambda(I_n)`` for ``n = 1..n_max``."""
    csum = np.cumsum(digits)
    clog = np.concatenate([[0.0], np.cumsum(P.log_atom(digits))])
    n = np.arange(1, n_max + 1)
    k = np.searchsorted(csum, n, side="right")  # complete digits inside the first n bits
    used = np.where(k > 0, csum[np.maximum(k - 1, 0)], 0)
    m = n - used
    return clog[k] + P.log_tail(m + 1)


def ratio_sequence(P: Partition, d, n_max: int) -> np.ndarray:
    """``log(2^-n / lambda(I_n))`` for ``n = 1..n_max``."""
    digits = _digits_covering(P, d, n_max)
    n = np.arange(1, n_max + 1)
    return -n * LOG2 - _log_lambda_levels(P, digits, n_max)


def running_levels(P: Partition, d, n_max: int) -> np.ndarray:
    """``s_n = -log(lambda(I_n)) / n`` for ``n = 1..n_max``."""
    digits = _digits_covering(P, d, n_max)
    n = np.arange(1, n_max + 1)
    return -_log_lambda_levels(P, digits, n_max) / n


def _prefix(d, k):
    if isinstance(d, LurothDigits):
        return np.asarray(d.prefix(k), dtype=np.int64)
    arr = np.asarray(d, dtype=np.int64)
    if arr.size < k:
        raise DigitError(f"need {k} digits, only {arr.size} available")
    return arr[:k]


def approximant_ratios(P: Partition, d, k_max: int) -> np.ndarray:
    """Log of ``mu / lambda`` on the approximant intervals, ``k = 1..k_max``.

    ``log 2 - S_{k+1} log 2 - sum_{i<=k} log a_{l_i} - log t_{l_{k+1}}``.
    """
    digits = _prefix(d, k_max + 1)
    s = np.cumsum(digits)
    la = np.cumsum(P.log_atom(digits))
    k = np.arange(1, k_max + 1)
    return LOG2 - s[k] * LOG2 - la[k - 1] - P.log_tail(digits[k])


def approximant_ratio(P: Partition, d, k: int) -> float:
    return float(approximant_ratios(P, d, k)[-1])


def zero_criteria(P: Partition, d, k_max: int) -> np.ndarray:
    """``log(2 * 2^-S_{k+1} / (a_{l_1} ... a_{l_{k+1}}))`` for ``k = 1..k_max``."""
    digits = _prefix(d, k_max + 1)
    s = np.cumsum(digits)
    la = np.cumsum(P.log_atom(digits))
    k = np.arange(1, k_max + 1)
    return LOG2 - s[k] * LOG2 - la[k]


def zero_criterion(P: Partition, d, k: int) -> float:
    return float(zero_criteria(P, d, k)[-1])


# ----------------------------------------------------------------------
# alpha-rational points


@dataclass(frozen=True)
class FactorLimit:
    """Limit of ``2^-m / t_m`` as ``m`` grows."""

    kind: str  # zero | finite | infinity | divergent
    value: float
    trend: str = ""


def alpha_rational_factor(P: Partition, probe: int = 200) -> FactorLimit:
    """Limit behaviour of ``2^-m / t_m``.

    Geometric tails give ``(tau/2)^m / tau``: zero for ``tau < 2``, infinite
    for ``tau > 2``, and ``1/2`` in the dyadic case.  Power tails always give
    zero.
    """
    fam = P.family
    if fam is Family.DYADIC:
        return FactorLimit("finite", 0.5)
    if fam in (Family.HARMONIC, Family.POWERLAW):
        return FactorLimit("zero", 0.0)
    if fam is Family.GEOMETRIC:
        tau = float(P.param)
        return FactorLimit("zero", 0.0) if tau < 2 else FactorLimit("infinity", math.inf)
    m = np.arange(max(1, min(probe, P.horizon) // 2), min(probe, P.horizon) + 1)
    logf = -m * LOG2 - P.log_tail(m)
    slope = float(np.polyfit(m, logf, 1)[0])
    trend = f"log-factor slope {slope:.3g} per index over m in [{m[0]}, {m[-1]}]"
    if P.tail_model.kind == "power" or slope < -1e-6:
        return FactorLimit("zero", 0.0, trend)
    if slope > 1e-6:
        return FactorLimit("infinity", math.inf, trend)
    spread = float(np.ptp(logf[-10:]))
    if spread < 1e-9:
        return FactorLimit("finite", float(math.exp(logf[-1])), trend)
    return FactorLimit("divergent", math.nan, trend)


# ----------------------------------------------------------------------
# classifiers


def _at_log2_exact(P: Partition, period) -> bool | None:
    """Exact test of ``prod a_l = 2^-sum(l)``; ``None`` when unavailable."""
    if not P.exact:
        return None
    prod = Fraction(1)
    for ell in period:
        prod *= P.atom_exact(int(ell))
    return prod == Fraction(1, 1 << int(sum(period)))


def _verdict_from_limits(lo: float, hi: float, band: float = BAND):
    eps = band * LOG2
    if hi < LOG2 - eps:
        return ZERO, LEVEL_BELOW
    if lo > LOG2 + eps:
        return INFINITY, LEVEL_ABOVE
    if lo < LOG2 - eps and hi > LOG2 + eps:
        return NOT_EXIST, STRADDLE
    return UNDETERMINED, INCONCLUSIVE


def _ratio_samples(P, d, n_max):
    r = ratio_sequence(P, d, n_max)
    picks = sorted({min(n_max, v) for v in (10, 100, 1000, n_max)})
    return {"n": picks, "log_ratio": [float(r[p - 1]) for p in picks]}


def classify_periodic(P: Partition, d: LurothDigits, evidence_levels: int = 1000) -> DerivativeVerdict:
    """Verdict for an eventually periodic point from its exact cycle level."""
    _reject_dyadic(P)
    if not isinstance(d, LurothDigits) or d.kind != PERIODIC:
        raise DigitError("classify_periodic needs eventually periodic digits")
    s = cycle_level(P, d.period)
    tie = _at_log2_exact(P, d.period)
    if tie is None:
        tie = abs(s - LOG2) <= BAND * LOG2
    ev = _ratio_samples(P, d, evidence_levels)
    ev["cycle_level"] = s
    if tie:
        M = m_set(P)
        if all(ell in M for ell in d.period):
            return DerivativeVerdict(NOT_EXIST, BM_SET, s, s, evidence_levels, ev)
        ev["note"] = "level equals log 2 with digits outside M; finer case analysis not implemented"
        return DerivativeVerdict(UNDETERMINED, INCONCLUSIVE, s, s, evidence_levels, ev)
    verdict, rule = (INFINITY, LEVEL_ABOVE) if s > LOG2 else (ZERO, LEVEL_BELOW)
    return DerivativeVerdict(verdict, rule, s, s, evidence_levels, ev)


def _run_lengths(run_growth, count):
    if run_growth == "superexponential":
        return [1 << (j * (j + 1) // 2) for j in range(count)]
    g = float(run_growth)
    if g <= 1:
        raise ValueError("run growth ratio must exceed 1")
    return [max(1, round(g**j)) for j in range(count)]


def oscillating_digits(block_a: int, block_b: int, run_growth=10, levels: int = 1000) -> np.ndarray:
    """Alternating runs ``a^{r_0} b^{r_1} a^{r_2} ...`` covering ``levels`` Farey levels.

    ``run_growth`` is a ratio ``g`` (run ``j`` has length ``g^j``) or
    ``"superexponential"`` (lengths ``2^{j(j+1)/2}``).
    """
    out, total, j = [], 0, 0
    while total < levels:
        r = _run_lengths(run_growth, j + 1)[-1]
        digit = block_a if j % 2 == 0 else block_b
        need = -(-(levels - total) // digit)
        take = min(r, need)
        out.extend([digit] * take)
        total += take * digit
        j += 1
    return np.asarray(out, dtype=np.int64)


def oscillation_limits(P: Partition, block_a: int, block_b: int, run_growth=10) -> tuple[float, float]:
    """Liminf and limsup of the running level along :func:`oscillating_digits`.

    With run ratio ``g`` the extreme levels occur at run ends, where the
    last run outweighs the previous one by ``g``; superexponential growth
    gives the pure block levels.
    """
    la, lb = -P.log_atom(block_a), -P.log_atom(block_b)
    if run_growth == "superexponential":
        sa, sb = la / block_a, lb / block_b
    else:
        g = float(run_growth)
        sa = (g * la + lb) / (g * block_a + block_b)
        sb = (g * lb + la) / (g * block_b + block_a)
    return min(sa, sb), max(sa, sb)


def classify_oscillating(P: Partition, block_a: int, block_b: int, run_growth=10,
                         evidence_levels: int = 1000) -> DerivativeVerdict:
    """Verdict for alternating runs of two digits whose levels straddle ``log 2``."""
    _reject_dyadic(P)
    sa, sb = cycle_level(P, [block_a]), cycle_level(P, [block_b])
    if (sa - LOG2) * (sb - LOG2) >= 0:
        raise HypothesisError(
            f"block levels {sa:.6g} and {sb:.6g} lie on the same side of log 2; "
            "use classify_periodic",
            hypothesis="liminf < log 2 < limsup",
        )
    lo, hi = oscillation_limits(P, block_a, block_b, run_growth)
    verdict, rule = _verdict_from_limits(lo, hi)
    digits = oscillating_digits(block_a, block_b, run_growth, evidence_levels)
    ev = _ratio_samples(P, digits, evidence_levels)
    ev["block_levels"] = [sa, sb]
    ev["run_growth"] = run_growth
    return DerivativeVerdict(verdict, rule, lo, hi, evidence_levels, ev)


def classify_empirical(P: Partition, d, n_max: int = 400, margin: float = 0.05) -> DerivativeVerdict:
    """Finite-sample verdict from the last quarter of running levels.

    ``d`` is a digit sequence, a :class:`LurothDigits`, or a real number
    (Fraction for exact extraction).  Never returns ``NotExist``: finite
    data cannot establish oscillation.
    """
    _reject_dyadic(P)
    if n_max < 100:
        raise ValueError("n_max must be at least 100")
    s = running_levels(P, d, n_max)
    window = s[n_max - n_max // 4:] - LOG2
    lo, hi = float(window.min()), float(window.max())
    if lo > margin:
        verdict, rule = INFINITY, LEVEL_ABOVE
    elif hi < -margin:
        verdict, rule = ZERO, LEVEL_BELOW
    else:
        verdict, rule = UNDETERMINED, INCONCLUSIVE
    ev = {
        "window": [n_max - n_max // 4 + 1, n_max],
        "margin": margin,
        "final_level": float(s[-1]),
        "note": "finite-sample rule; consistent with the limit criteria, not a proof",
    }
    return DerivativeVerdict(verdict, rule, lo + LOG2, hi + LOG2, n_max, ev)
