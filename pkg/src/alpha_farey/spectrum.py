"""Free energy, its Legendre transform and the dimension spectrum.

``v(u)`` solves ``sum_n a_n^u exp(-r n) = 1`` in ``r``; the spectrum is
``sigma(s) = inf_u (u + v(u) / s)``.  Levels ``s`` are in nats throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import mpmath
import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq, minimize_scalar
from scipy.special import logsumexp

from .errors import DivergenceError, HypothesisError
from .partition import Family, Partition, classify_partition

__all__ = [
    "LOG2",
    "PartitionSum",
    "partition_sum",
    "FreeEnergy",
    "solve_v",
    "free_energy_v",
    "free_energy_t",
    "SRange",
    "s_range",
    "SpectrumPoint",
    "legendre_sigma",
    "theorem_dimensions",
    "pvb_threshold",
    "pvb_sign",
    "mean_level",
]

LOG2 = math.log(2.0)
U_RANGE = (-5.0, 5.0)


@dataclass(frozen=True)
class _TailLaw:
    kind: str  # geometric | power
    rate: float  # rho for geometric, tau for power
    n0: int  # the law is exact from this index on
    coeff: float = 1.0  # power: t_n = coeff * n^-tau for n >= n0


def _tail_law(P: Partition) -> _TailLaw:
    fam = P.family
    if fam is Family.DYADIC:
        return _TailLaw("geometric", 2.0, 1)
    if fam is Family.GEOMETRIC:
        return _TailLaw("geometric", float(P.param), 1)
    if fam is Family.HARMONIC:
        return _TailLaw("power", 1.0, 1)
    if fam is Family.POWERLAW:
        return _TailLaw("power", float(P.param), 1)
    K = len(P.tails)
    p = float(P.tail_model.param)
    if P.tail_model.kind == "geometric":
        return _TailLaw("geometric", p, K)
    return _TailLaw("power", p, K, float(P.tails[K - 1]) * K**p)


# ----------------------------------------------------------------------
# partition sums


@dataclass(frozen=True)
class PartitionSum:
    value: float
    log_value: float
    error_bound: float
    terms: int
    divergent: bool = False

    @property
    def certified(self) -> bool:
        return not self.divergent and math.isfinite(self.error_bound)


def _converges(law: _TailLaw, u: float, r: float) -> bool:
    if law.kind == "geometric":
        return u * math.log(law.rate) + r > 0
    return r > 0 or (r == 0 and u * (law.rate + 1) > 1)


def _log_power_tail_bound(law: _TailLaw, u: float, r: float, N: int) -> float:
    """Log of a bound on ``sum_{n>N} a_n^u e^{-rn}`` for a power tail.

    Uses ``c tau (n+1)^-(tau+1) <= a_n <= c tau n^-(tau+1)`` and an integral
    comparison, valid once the envelope decreases.
    """
    q = (law.rate + 1) * u
    logc = u * math.log(law.coeff * law.rate)
    if u >= 0:
        if r == 0:
            return logc + (1 - q) * math.log(N) - math.log(q - 1)
        return logc - q * math.log(N) - r * N - math.log(r)
    k = -q  # envelope (n+1)^k e^{-rn}
    A = N + 1
    if A < k / r:
        return math.inf
    tail = mpmath.gammainc(k + 1, r * A)  # upper incomplete gamma
    return float(logc + r + mpmath.log(tail) - (k + 1) * math.log(r))


@lru_cache(maxsize=64)
def _log_atoms(P: Partition, N: int) -> np.ndarray:
    out = P.log_atom(np.arange(1, N + 1))
    out.setflags(write=False)
    return out


def _power_log_atom(law: _TailLaw, x):
    """Analytic ``log a_x`` of a power tail, valid for real ``x >= n0``."""
    tau = law.rate
    return math.log(law.coeff) - tau * np.log(x) + np.log(-np.expm1(-tau * np.log1p(1.0 / x)))


def _em_tail(law: _TailLaw, u: float, r: float, N: int) -> tuple[float, float]:
    """Log of ``sum_{n>=N} a_n^u e^{-rn}`` by Euler-Maclaurin, with an error estimate.

    The integral is done by quadrature after ``x = N e^t``; the boundary
    corrections use ``f(N)/2``, ``f'(N)/12`` and the third-derivative term.
    """

    def h(x):
        return u * _power_log_atom(law, x) - r * x

    hN = float(h(float(N)))

    def integrand(t):
        if t > 600:
            return 0.0
        e = float(h(N * math.exp(t))) - hN + t
        return N * math.exp(e) if e > -700 else 0.0

    val, abserr = quad(integrand, 0, math.inf, limit=200, epsabs=0.0, epsrel=1e-13)
    hp, hm, hp2, hm2 = (float(h(N + k)) for k in (1.0, -1.0, 2.0, -2.0))
    h1 = (hp - hm) / 2
    h2 = hp - 2 * hN + hm
    h3 = (hp2 - 2 * hp + 2 * hm - hm2) / 2
    # derivatives of exp(h - h(N)) at N
    g1 = h1
    g3 = h3 + 3 * h1 * h2 + h1**3
    rel = val + 0.5 - g1 / 12 + g3 / 720
    return hN + math.log(rel), (abserr + abs(g3) / 720) * math.exp(hN)


# below this many terms a plain truncation bound is tried before Euler-Maclaurin
_DIRECT_CAP = 4096


def partition_sum(P: Partition, u: float, r: float, tol: float = 1e-14) -> PartitionSum:
    """``sum_n a_n^u exp(-r n)`` with a truncation error estimate.

    Geometric tails are summed in closed form beyond the last computed
    index, so only rounding remains.  Power tails use a certified integral
    bound when it is met within a few thousand terms, and otherwise an
    Euler-Maclaurin tail whose error is estimated from the last correction.
    Outside the convergence region the result is tagged ``divergent``.
    """
    law = _tail_law(P)
    if not _converges(law, u, r):
        return PartitionSum(math.inf, math.inf, math.inf, 0, divergent=True)
    N = max(64, law.n0)
    while True:
        N = min(N, P.horizon)
        n = np.arange(1, N + 1)
        logs = u * _log_atoms(P, N) - r * n
        log_head = float(logsumexp(logs))
        if law.kind == "geometric":
            log_q = -u * math.log(law.rate) - r
            log_tail = logs[-1] + log_q - math.log(-math.expm1(log_q))
            log_total = float(np.logaddexp(log_head, log_tail))
            err = 1e-15 * N * math.exp(log_total)
            return PartitionSum(math.exp(log_total), log_total, err, N)
        if u == 1 and r == 0:
            log_total = float(np.logaddexp(log_head, P.log_tail(N + 1)))
            return PartitionSum(math.exp(log_total), log_total, 1e-15 * N, N)
        log_bound = _log_power_tail_bound(law, u, r, N)
        value = math.exp(log_head)
        if log_bound <= math.log(tol) + max(0.0, log_head) or N >= P.horizon:
            return PartitionSum(value, log_head, math.exp(log_bound) + 1e-15 * N * value, N)
        if N >= _DIRECT_CAP:
            break
        N *= 4
    # slow power decay: exact head below M, asymptotic tail from M on
    k = -(law.rate + 1) * u
    M = min(P.horizon, max(N, law.n0, int(3 * k / r) + 1 if k > 0 else 0))
    logs = u * _log_atoms(P, M - 1) - r * np.arange(1, M)
    log_head = float(logsumexp(logs))
    log_tail, err = _em_tail(law, u, r, M)
    log_total = float(np.logaddexp(log_head, log_tail))
    return PartitionSum(math.exp(log_total), log_total, err + 1e-15 * M * math.exp(log_total), M)


# ----------------------------------------------------------------------
# free energy


@dataclass(frozen=True)
class FreeEnergy:
    value: float
    boundary_branch: bool = False


def _r_lower(law: _TailLaw, u: float) -> float:
    if law.kind == "geometric":
        return -u * math.log(law.rate)
    return 0.0


def _log_sum(P, u, r):
    return partition_sum(P, u, r).log_value


@lru_cache(maxsize=65536)
def solve_v(P: Partition, u: float) -> FreeEnergy:
    """``v(u) = inf{r : sum a_n^u e^{-rn} <= 1}``.

    Power tails with ``u >= 1`` have ``sum a_n^u <= 1`` already at ``r = 0``
    and no admissible ``r < 0``, so the infimum is the boundary value 0.
    """
    u = float(u)
    law = _tail_law(P)
    if u == 1.0:
        return FreeEnergy(0.0)
    if law.kind == "power" and u > 1:
        return FreeEnergy(0.0, boundary_branch=True)
    lo_edge = _r_lower(law, u)
    if law.kind == "power" and _converges(law, u, 0.0) and _log_sum(P, u, 0.0) <= 0:
        # u just below 1: the root lies below the resolution of the truncated sum
        return FreeEnergy(0.0)
    # the sum blows up at the lower edge; step inside until it exceeds 1
    delta = 1.0
    lo = lo_edge + delta
    while _log_sum(P, u, lo) <= 0:
        delta /= 8
        lo = lo_edge + delta
        if delta < 1e-12:
            if law.kind == "power":
                return FreeEnergy(0.0)
            raise DivergenceError(f"no r with sum > 1 near the convergence edge r = {lo_edge}")
    hi = max(lo, 0.0) + 1.0
    while _log_sum(P, u, hi) > 0:
        hi = lo_edge + 2 * (hi - lo_edge)
        if hi > 1e6:
            raise DivergenceError(f"partition sum exceeds 1 for every r up to 1e6 at u = {u}")
    r = brentq(lambda r: _log_sum(P, u, r), lo, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=200)
    return FreeEnergy(float(r))


def free_energy_v(P: Partition, u: float) -> float:
    return solve_v(P, float(u)).value


def free_energy_t(P: Partition, v: float) -> float:
    """``t(v) = inf{u : sum a_n^u e^{-nv} <= 1}``, the inverse of ``v``."""
    v = float(v)
    if v == 0:
        return 1.0
    law = _tail_law(P)
    if law.kind == "power" and v < 0:
        raise DivergenceError("power-tail sums diverge for negative v at every u")
    if law.kind == "geometric":
        u_edge = -v / math.log(law.rate)  # sum blows up as u decreases to here
        delta = 1.0
        lo = u_edge + delta
        while _log_sum(P, lo, v) <= 0:
            delta /= 8
            lo = u_edge + delta
    else:
        lo = -1.0
        while _log_sum(P, lo, v) <= 0:
            lo = 2 * lo
            if lo < -1e6:
                raise DivergenceError(f"no u with sum > 1 at v = {v}")
    hi = max(lo, 1.0) + 1.0
    while _log_sum(P, hi, v) > 0:
        hi = 2 * hi
    return float(brentq(lambda u: _log_sum(P, u, v), lo, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps))


# ----------------------------------------------------------------------
# levels


@dataclass(frozen=True)
class SRange:
    s_minus: float
    s_plus: float
    minus_attained: bool
    plus_attained: bool
    argmin: int | None = None
    argmax: int | None = None

    def contains(self, s: float) -> bool:
        return self.s_minus < s < self.s_plus


def s_range(P: Partition, n_scan: int = 10_000) -> SRange:
    """Inf and sup of ``-log(a_n)/n`` from a scan plus the tail limit."""
    n = np.arange(1, min(n_scan, P.horizon) + 1)
    lv = -P.log_atom(n) / n
    law = _tail_law(P)
    limit = math.log(law.rate) if law.kind == "geometric" else 0.0
    i_min, i_max = int(np.argmin(lv)), int(np.argmax(lv))
    lo, hi = float(lv[i_min]), float(lv[i_max])
    if P.is_dyadic:
        return SRange(LOG2, LOG2, True, True, 1, 1)
    minus_attained = lo < limit - 1e-15
    plus_attained = hi > limit + 1e-15
    return SRange(
        lo if minus_attained else limit,
        hi if plus_attained else limit,
        minus_attained,
        plus_attained,
        int(n[i_min]) if minus_attained else None,
        int(n[i_max]) if plus_attained else None,
    )


@dataclass(frozen=True)
class SpectrumPoint:
    s: float
    u_star: float
    v_at_u: float
    sigma: float
    boundary_branch: bool = False


def _objective(P, s):
    return lambda u: u + free_energy_v(P, u) / s


def legendre_sigma(P: Partition, s: float, u_range=U_RANGE, check_range: bool = True) -> SpectrumPoint:
    """``sigma(s) = inf_u (u + v(u)/s)``.

    A 50-point scan locates the basin, then a golden-section search refines
    to ``|du| <= 1e-10``.  The scan range grows if the minimum sits on its
    edge.
    """
    if P.is_dyadic:
        raise HypothesisError("the dyadic spectrum is degenerate: s_- = s_+ = log 2", hypothesis="non-dyadic partition")
    if check_range:
        sr = s_range(P)
        if not sr.contains(s):
            raise HypothesisError(
                f"s = {s:.6g} outside the open level range ({sr.s_minus:.6g}, {sr.s_plus:.6g})",
                hypothesis="s_minus < s < s_plus",
            )
    f = _objective(P, s)
    lo, hi = u_range
    for _ in range(6):
        grid = np.linspace(lo, hi, 50)
        vals = np.array([f(u) for u in grid])
        i = int(np.argmin(vals))
        if 0 < i < len(grid) - 1:
            break
        width = hi - lo
        lo, hi = (lo - width, hi) if i == 0 else (lo, hi + width)
    else:
        raise DivergenceError(f"no interior minimiser of u + v(u)/s found in [{lo}, {hi}]")
    # non-unimodal scan would indicate a wrong basin; refine on the best bracket either way
    res = minimize_scalar(f, bracket=(grid[i - 1], grid[i], grid[i + 1]), method="golden", tol=1e-10)
    u = float(res.x)
    fe = solve_v(P, u)
    sigma = min(1.0, max(0.0, u + fe.value / s))
    return SpectrumPoint(float(s), u, fe.value, sigma, fe.boundary_branch)


def theorem_dimensions(P: Partition) -> dict:
    """Dimensions of the infinite-, non-existent- and zero-derivative sets."""
    if P.is_dyadic:
        raise HypothesisError("theta is the identity on the dyadic partition", hypothesis="non-dyadic partition")
    cls = classify_partition(P)
    if cls.kind not in ("expanding", "expansive") or not cls.eventually_decreasing:
        raise HypothesisError(
            f"partition class {cls.kind} is neither expanding nor expansive and eventually decreasing",
            hypothesis="expanding or expansive, eventually decreasing",
        )
    sr = s_range(P)
    if not sr.contains(LOG2):
        raise HypothesisError(
            f"log 2 outside the level range ({sr.s_minus:.6g}, {sr.s_plus:.6g})",
            hypothesis="s_minus < log 2 < s_plus",
        )
    pt = legendre_sigma(P, LOG2, check_range=False)
    return {
        "dim_theta_inf": pt.sigma,
        "dim_theta_sim": pt.sigma,
        "dim_theta_0": 1.0,
        "u_star": pt.u_star,
        "strict": pt.sigma < 1 - 1e-9,
    }


def pvb_threshold(tau: float) -> float:
    """``K(tau) = -log(tau - 1) / log(2 / tau)``."""
    tau = float(tau)
    if tau <= 1:
        raise ValueError("tau must exceed 1")
    if tau == 2:
        raise ValueError("K(tau) has a pole at tau = 2")
    return -math.log(tau - 1) / math.log(2 / tau)


def pvb_sign(tau: float, freq: float) -> int:
    """Sign of ``log((2/tau)^freq (tau - 1))``; flips as ``freq`` crosses ``K(tau)``."""
    val = freq * math.log(2 / tau) + math.log(tau - 1)
    return (val > 0) - (val < 0)


def mean_level(P: Partition) -> float:
    """``s* = sum a_n log(1/a_n) / sum n a_n``; ``inf`` if the mean digit diverges."""
    law = _tail_law(P)
    if law.kind == "power" and law.rate <= 1:
        return math.inf
    if law.kind == "geometric":
        N = max(law.n0, 64) + int(40 / math.log(law.rate))
        n = np.arange(1, N + 1)
        la = P.log_atom(n)
        a = np.exp(la)
        return float(np.sum(-a * la) / np.sum(n * a))
    N = min(P.horizon, 10**6)
    n = np.arange(1, N + 1)
    la = P.log_atom(n)
    a = np.exp(la)
    tau = law.rate
    # sum n a_n = sum t_n; integral estimates for the remainders
    t_tail = law.coeff * N ** (1 - tau) / (tau - 1)
    ent_tail = law.coeff * tau * N**-tau * ((tau + 1) * math.log(N) + (tau + 1) / tau - math.log(law.coeff * tau)) / tau
    return float((np.sum(-a * la) + ent_tail) / (np.sum(P.tail(n)) + t_tail))
