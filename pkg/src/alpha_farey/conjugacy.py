"""The conjugacy ``theta`` between the Farey map and the tent map.

``theta(x) = 2 * sum_k (-1)^(k-1) 2^(-(l_1 + ... + l_k))`` depends on the
digits of ``x`` only, never on the partition.  The partition enters when
``x`` is given as a real number or when ``theta`` is inverted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath

from .codec import (
    FINITE,
    PERIODIC,
    FareyWord,
    LurothDigits,
    farey_cylinder,
    farey_to_luroth,
    finite_value,
    luroth_digits,
)
from .dynamics import farey_map, tent
from .errors import DigitError
from .partition import Partition

__all__ = [
    "ThetaValue",
    "theta",
    "theta_exact",
    "theta_at",
    "ThetaInverse",
    "theta_inverse",
    "cylinder_endpoint_digits",
    "mu_cylinder",
    "mu_interval",
    "ConjugacyCheck",
    "check_conjugacy",
    "conjugate_between",
]


@dataclass(frozen=True)
class ThetaValue:
    value: object
    error_bound: float
    terms_used: int
    exact: bool = False
    partial: bool = False

    def __float__(self):
        return float(self.value)


def theta_exact(digits) -> Fraction:
    """Exact ``theta`` of a finite digit list (empty list gives 0)."""
    total, s, sign = Fraction(0), 0, 1
    for d in digits:
        s += int(d)
        total += sign * Fraction(1, 1 << s)
        sign = -sign
    return 2 * total


def _theta_periodic(d: LurothDigits) -> Fraction:
    # g(d) = 2^-l1 (1 - g(shift d)); theta = 2 g.  One period is the affine
    # map g -> alpha + beta g, so the periodic tail is its fixed point.
    alpha, beta = Fraction(0), Fraction(1)
    for l in reversed(d.period):
        alpha, beta = Fraction(1, 1 << l) * (1 - alpha), -Fraction(1, 1 << l) * beta
    g = alpha / (1 - beta)
    for l in reversed(d.digits):
        g = Fraction(1, 1 << l) * (1 - g)
    return 2 * g


def theta(d, target_error: float = 1e-12) -> ThetaValue:
    """``theta`` of a digit sequence with a certified truncation bound.

    Finite and periodic digits are exact.  Truncated digits are summed until
    the alternating remainder bound drops to ``target_error``; if the digits
    run out first the result is flagged ``partial``.
    """
    if not isinstance(d, LurothDigits):
        d = LurothDigits.truncated(d)
    if d.kind == FINITE:
        return ThetaValue(theta_exact(d.digits), 0.0, len(d.digits), exact=True)
    if d.kind == PERIODIC:
        return ThetaValue(_theta_periodic(d), 0.0, len(d.digits) + len(d.period), exact=True)
    total, s, sign, k = 0.0, 0, 1.0, 0
    bound = 1.0
    digits = d.digits
    while k < len(digits):
        s += digits[k]
        total += sign * math.ldexp(1.0, -s)
        sign = -sign
        k += 1
        # remainder after k terms: 2 * 2^-S_{k+1} if the next digit is known
        bound = math.ldexp(1.0, 1 - s - digits[k]) if k < len(digits) else math.ldexp(1.0, -s)
        if bound <= target_error:
            break
    return ThetaValue(2.0 * total, bound, k, partial=bound > target_error)


def _digits_for(tol: float) -> int:
    # every digit is >= 1, so this many terms certify tol
    return max(1, math.ceil(math.log2(2.0 / tol)) + 1)


def theta_at(P: Partition, x, tol: float = 1e-12) -> ThetaValue:
    """``theta`` of a real ``x`` in ``[0, 1]`` via its digits.

    Fractions use exact digit extraction; floats are limited by the float
    depth cap and may come back ``partial``.
    """
    if x == 0:
        return ThetaValue(Fraction(0) if isinstance(x, Fraction) else 0.0, 0.0, 0, exact=True)
    d = luroth_digits(P, x, depth=_digits_for(tol))
    return theta(d, tol)


# ----------------------------------------------------------------------
# inverse


def cylinder_endpoint_digits(w) -> tuple[list, list]:
    """Finite digit strings of the two endpoints of the Farey cylinder ``w``."""
    digits, m = farey_to_luroth(w)
    digits = list(digits.digits)
    if m:
        return digits + [m + 1], digits
    return digits, digits[:-1] + [digits[-1] + 1]


@dataclass(frozen=True)
class ThetaInverse:
    word: FareyWord
    interval: object  # CylinderInterval
    theta_left: Fraction
    theta_right: Fraction


def theta_inverse(P: Partition, y, depth: int) -> ThetaInverse:
    """Level-``depth`` Farey cylinder whose ``theta`` image contains ``y``.

    Descends the cylinder tree.  At each node the two children share one
    endpoint, an alpha-rational whose ``theta`` is evaluated exactly; ``y``
    equal to that value goes to the left child.
    """
    if depth < 1:
        raise DigitError("depth must be >= 1")
    y = Fraction(y) if not isinstance(y, mpmath.mpf) else y
    if not 0 <= y <= 1:
        raise ValueError(f"y must lie in [0, 1], got {y}")
    bits = ""
    lo, hi = Fraction(0), Fraction(1)
    for _ in range(depth):
        ends = {}
        for b in "01":
            p, q = (theta_exact(e) for e in cylinder_endpoint_digits(bits + b))
            ends[b] = (min(p, q), max(p, q))
        left = "0" if ends["0"][0] <= ends["1"][0] else "1"
        right = "1" if left == "0" else "0"
        bits += left if y <= ends[left][1] else right
        lo, hi = ends[bits[-1]]
    word = FareyWord(bits)
    return ThetaInverse(word, farey_cylinder(P, word), lo, hi)


def mu_cylinder(w) -> float:
    """``log`` of the maximal-entropy measure of a Farey cylinder."""
    return -len(w) * math.log(2)


def mu_interval(P: Partition, a, b, tol: float = 1e-12) -> tuple[object, float]:
    """Measure of ``[a, b)`` as ``theta(b) - theta(a)`` with an error bound."""
    if a > b:
        raise ValueError("need a <= b")
    ta, tb = theta_at(P, a, tol), theta_at(P, b, tol)
    return tb.value - ta.value, ta.error_bound + tb.error_bound


# ----------------------------------------------------------------------
# conjugacy checks


@dataclass(frozen=True)
class ConjugacyCheck:
    max_residual: float
    bound: float
    steps: int


def _working_precision(P: Partition, digits) -> int:
    loss = -sum(P.log_atom(d) for d in digits) / math.log(10)
    return int(40 + loss)


def check_conjugacy(P: Partition, d, n_steps: int, tol: float = 1e-12) -> ConjugacyCheck:
    """Max of ``|theta(F x) - T(theta x)|`` along ``n_steps`` of the orbit.

    ``x`` is the value of the digit prefix, iterated by the real Farey map in
    exact rational arithmetic (or multiprecision for irrational tails); each
    iterate's digits are re-extracted before applying ``theta``.
    """
    if not isinstance(d, LurothDigits):
        d = LurothDigits.truncated(d)
    digits = d.prefix(min(d.available(), 10**4)) if d.kind != PERIODIC else d.prefix(_digits_for(tol) + n_steps)
    if P.exact:
        x = finite_value(P, digits, Fraction(0))
        return _run_check(P, x, n_steps, tol)
    with mpmath.workdps(_working_precision(P, digits)):
        x = finite_value(P, digits, mpmath.mpf(0))
        return _run_check(P, x, n_steps, tol)


def _run_check(P, x, n_steps, tol):
    worst, bound = 0.0, 0.0
    th = theta_at(P, x, tol)
    for i in range(n_steps):
        fx = farey_map(P, x)
        if isinstance(fx, mpmath.mpf):
            # multiprecision rounding near the orbit's terminal points 1 -> 0
            eps = mpmath.mpf(2) ** (-(mpmath.mp.prec // 2))
            if fx > 1 or abs(fx - 1) < eps:
                fx = mpmath.mpf(1)
            elif fx < eps:
                fx = mpmath.mpf(0)
        th_next = theta_at(P, fx, tol)
        residual = abs(float(th_next.value) - float(tent(th.value)))
        worst = max(worst, residual)
        bound = max(bound, th_next.error_bound + 2 * th.error_bound)
        x, th = fx, th_next
        if x == 0:
            return ConjugacyCheck(worst, bound, i + 1)
    return ConjugacyCheck(worst, bound, n_steps)


def conjugate_between(P_src: Partition, P_dst: Partition, d, depth: int = 40):
    """``theta_dst^{-1}(theta_src(x))`` for the point with digits ``d``.

    Returns the endpoint of the level-``depth`` target cylinder whose
    ``theta`` value is closest to ``theta_src(x)``, so alpha-rational images
    are hit exactly once ``depth`` is large enough.
    """
    if isinstance(d, str):
        from .codec import parse_digits

        d = parse_digits(d)
    y = theta(d, 2.0 ** -(depth + 2))
    yv = y.value if isinstance(y.value, Fraction) else Fraction(y.value)
    inv = theta_inverse(P_dst, yv, depth)
    cyl = inv.interval
    left_digits, right_digits = cylinder_endpoint_digits(inv.word)
    best = min((left_digits, right_digits), key=lambda e: abs(theta_exact(e) - yv))
    if P_dst.exact:
        return finite_value(P_dst, best, Fraction(0))
    with mpmath.workdps(int(30 + max(0.0, -cyl.log_lambda) / math.log(10))):
        return +finite_value(P_dst, best, mpmath.mpf(0))

