"""Lüroth digit sequences, binary Farey words and their cylinder intervals.

A point ``x = [l_1, l_2, ...]`` has value
``t_{l_1} - a_{l_1} t_{l_2} + a_{l_1} a_{l_2} t_{l_3} - ...``.  The Farey
word of the same point replaces each digit ``l`` by the block ``0^(l-1) 1``.

Arithmetic follows the input: Fractions stay exact (rational families only),
``mpmath.mpf`` stays multiprecision, floats stay floats.  Finite digit
strings are canonicalised to the twin that does not end in 1.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from itertools import product

import mpmath
import numpy as np

from .errors import DigitError, PartitionError
from .partition import Partition

__all__ = [
    "FINITE",
    "PERIODIC",
    "TRUNCATED",
    "FLOAT_DEPTH_CAP",
    "LurothDigits",
    "FareyWord",
    "CylinderInterval",
    "LurothValue",
    "parse_digits",
    "canonical_finite",
    "luroth_value",
    "finite_value",
    "luroth_digits",
    "luroth_to_farey",
    "farey_to_luroth",
    "luroth_cylinder",
    "farey_cylinder",
    "is_alpha_rational",
    "all_words",
    "high_precision",
]

FINITE = "finite"
PERIODIC = "periodic"
TRUNCATED = "truncated"

# float digit extraction loses roughly log(1/a_l) of precision per digit
FLOAT_DEPTH_CAP = 40


def canonical_finite(digits):
    """Rewrite ``[..., l, 1]`` as ``[..., l + 1]`` until the tail is not 1."""
    out = list(digits)
    while len(out) > 1 and out[-1] == 1:
        out.pop()
        out[-1] += 1
    return out


@dataclass(frozen=True)
class LurothDigits:
    """A digit sequence: finite, eventually periodic, or a truncated prefix."""

    kind: str
    digits: tuple = ()
    period: tuple = ()

    def __post_init__(self):
        if self.kind not in (FINITE, PERIODIC, TRUNCATED):
            raise DigitError(f"unknown digit kind {self.kind!r}")
        if any((not isinstance(d, (int, np.integer))) or d < 1 for d in self.digits + self.period):
            raise DigitError("digits must be integers >= 1")
        if self.kind == FINITE and not self.digits:
            raise DigitError("finite digit list must be nonempty")
        if self.kind == PERIODIC and not self.period:
            raise DigitError("period must be nonempty")
        if self.kind != PERIODIC and self.period:
            raise DigitError("only periodic digits carry a period")

    @classmethod
    def finite(cls, digits, canonical=True):
        digits = [int(d) for d in digits]
        return cls(FINITE, tuple(canonical_finite(digits) if canonical else digits))

    @classmethod
    def periodic(cls, period, preperiod=()):
        return cls(PERIODIC, tuple(int(d) for d in preperiod), tuple(int(d) for d in period))

    @classmethod
    def truncated(cls, digits):
        return cls(TRUNCATED, tuple(int(d) for d in digits))

    @property
    def infinite(self) -> bool:
        return self.kind == PERIODIC

    def available(self) -> float:
        """Number of digits that can be read (``inf`` for periodic)."""
        return math.inf if self.kind == PERIODIC else len(self.digits)

    def prefix(self, n: int) -> list:
        """First ``n`` digits; raises if fewer are available."""
        if self.kind != PERIODIC:
            if n > len(self.digits):
                raise DigitError(f"need {n} digits, only {len(self.digits)} available")
            return list(self.digits[:n])
        pre, per = self.digits, self.period
        if n <= len(pre):
            return list(pre[:n])
        rest = n - len(pre)
        reps, extra = divmod(rest, len(per))
        return list(pre) + list(per) * reps + list(per[:extra])

    def prefix_covering(self, levels: int) -> list:
        """Shortest prefix whose digit sum reaches ``levels`` (Farey steps)."""
        out, total = [], 0
        if self.kind != PERIODIC:
            for d in self.digits:
                if total >= levels:
                    break
                out.append(d)
                total += d
            if total < levels and self.kind == TRUNCATED:
                raise DigitError(f"digits cover only {total} Farey levels, need {levels}")
            return out
        i = 0
        while total < levels:
            d = self.prefix(i + 1)[-1]
            out.append(d)
            total += d
            i += 1
        return out

    def shift(self, k: int = 1) -> "LurothDigits":
        """Drop the first ``k`` digits (the action of the Lüroth map)."""
        if self.kind != PERIODIC:
            rest = self.digits[k:]
            if not rest:
                raise DigitError("shift exhausts the digits")
            return LurothDigits(self.kind, rest)
        pre, per = self.digits, self.period
        if k <= len(pre):
            return LurothDigits(PERIODIC, pre[k:], per)
        r = (k - len(pre)) % len(per)
        return LurothDigits(PERIODIC, (), per[r:] + per[:r])

    def __str__(self):
        return format_digits(self)


_PERIODIC_RE = re.compile(r"^\[\s*([0-9,\s]*?)\s*;?\s*\(\s*([0-9,\s]+)\)\s*\]$")
_PER_WORD_RE = re.compile(r"^\[\s*(?:([0-9,\s]*?)\s*;\s*)?([0-9,\s]+?)\s+per\s*\]$")


def _ints(text):
    text = text.strip().strip(",")
    if not text:
        return []
    try:
        return [int(p) for p in text.split(",")]
    except ValueError as exc:
        raise DigitError(f"bad digit list {text!r}") from exc


def parse_digits(text: str, canonical: bool = True) -> LurothDigits:
    """Parse the digit text format.

    ``[2,3,1]`` finite, ``[1;(2,5)]`` preperiod/period, ``[(2)]`` or ``[2 per]``
    purely periodic, ``[2,3,...]`` truncated.
    """
    s = text.strip()
    if not (s.startswith("[") and s.endswith("]")):
        raise DigitError(f"digit string must be bracketed: {text!r}")
    m = _PERIODIC_RE.match(s)
    if m:
        return LurothDigits.periodic(_ints(m.group(2)), _ints(m.group(1)))
    m = _PER_WORD_RE.match(s)
    if m:
        return LurothDigits.periodic(_ints(m.group(2)), _ints(m.group(1) or ""))
    body = s[1:-1].strip()
    if body.endswith("..."):
        return LurothDigits.truncated(_ints(body[:-3]))
    digits = _ints(body)
    if not digits:
        raise DigitError("empty digit list")
    if any(d < 1 for d in digits):
        raise DigitError("digits must be >= 1")
    return LurothDigits.finite(digits, canonical=canonical)


def format_digits(d: LurothDigits) -> str:
    if d.kind == FINITE:
        return "[" + ",".join(map(str, d.digits)) + "]"
    if d.kind == TRUNCATED:
        return "[" + ",".join(map(str, d.digits)) + ",...]"
    pre = ",".join(map(str, d.digits))
    per = ",".join(map(str, d.period))
    return f"[{pre};({per})]" if pre else f"[({per})]"


# ----------------------------------------------------------------------
# numbers


def high_precision(P: Partition, like=None):
    """Zero in the high-precision arithmetic available for ``P``."""
    if P.exact:
        return Fraction(0)
    return mpmath.mpf(0)


def _zero_like(P, mode):
    if mode == "exact":
        if not P.exact:
            raise PartitionError(f"exact arithmetic requested for {P.spec}, whose tails are irrational")
        return Fraction(0)
    if mode == "high":
        return high_precision(P)
    if mode == "float":
        return 0.0
    raise ValueError(f"unknown arithmetic mode {mode!r}")


def finite_value(P: Partition, digits, like=0.0):
    """Exact finite alternating sum for ``digits`` in the arithmetic of ``like``.

    The empty list has value 0.  Evaluated right to left via
    ``x = t_l - a_l * x'``.
    """
    x = like * 0
    for d in reversed(list(digits)):
        x = P.tail_like(d, like) - P.atom_like(d, like) * x
    return x


@dataclass(frozen=True)
class LurothValue:
    """A value with a certified absolute error bound."""

    value: object
    error_bound: float
    terms: int

    def __float__(self):
        return float(self.value)


def luroth_value(P: Partition, d: LurothDigits, depth: int | None = None, mode: str = "float") -> LurothValue:
    """Value of a digit sequence.

    Finite digits are summed in full (error 0).  Periodic digits are summed
    in closed form from the fixed-point identity of one period (error 0).
    Truncated digits, or any sequence cut at ``depth`` terms, carry the
    remainder bound ``a_{l_1} ... a_{l_depth}``.
    """
    zero = _zero_like(P, mode)
    if d.kind == FINITE and (depth is None or depth >= len(d.digits)):
        return LurothValue(finite_value(P, d.digits, zero), 0.0, len(d.digits))
    if d.kind == PERIODIC and depth is None:
        # x = S_pre + (-1)^p A_pre * y,  y = S_per / (1 - (-1)^q A_per)
        per = d.period
        s_per = finite_value(P, per, zero)
        a_per = zero + 1
        for dd in per:
            a_per *= P.atom_like(dd, zero)
        y = s_per / (1 - (-1) ** len(per) * a_per)
        pre = d.digits
        s_pre = finite_value(P, pre, zero)
        a_pre = zero + 1
        for dd in pre:
            a_pre *= P.atom_like(dd, zero)
        return LurothValue(s_pre + (-1) ** len(pre) * a_pre * y, 0.0, len(pre) + len(per))
    if depth is None:
        depth = len(d.digits)
    digits = d.prefix(depth)
    value = finite_value(P, digits, zero)
    log_bound = float(np.sum(P.log_atom(np.asarray(digits, dtype=np.int64)))) if digits else 0.0
    return LurothValue(value, math.exp(log_bound), depth)


def _snap_tolerance(x):
    if isinstance(x, Fraction):
        return 0
    if isinstance(x, mpmath.mpf):
        return mpmath.mpf(2) ** (-(mpmath.mp.prec - 16))
    return 1e-13


def luroth_digits(P: Partition, x, depth: int = FLOAT_DEPTH_CAP) -> LurothDigits:
    """Digits of ``0 < x <= 1`` by iterating the Lüroth map.

    Fractions are iterated exactly (rational families only) and ``depth`` is
    unrestricted; mpf iterates at the ambient precision; floats are capped at
    ``FLOAT_DEPTH_CAP`` digits.  Terminates with a finite expansion when an
    iterate lands on a tail ``t_n``.
    """
    if isinstance(x, Fraction):
        if not P.exact:
            raise PartitionError(f"exact digits requested for {P.spec}, whose tails are irrational")
    elif not isinstance(x, mpmath.mpf):
        x = float(x)
        depth = min(depth, FLOAT_DEPTH_CAP)
    if not x > 0:
        raise DigitError("x = 0 is the fixed point and has no expansion")
    if x > 1:
        raise DigitError(f"x must lie in (0, 1], got {x}")
    snap = _snap_tolerance(x)
    eps = 0 if not snap else (4e-16 if isinstance(x, float) else mpmath.mpf(2) ** (4 - mpmath.mp.prec))
    err = eps  # absolute error of the iterate, amplified by 1/a_n per step
    # mpf inputs usually come out of earlier arithmetic with unknown loss;
    # half the working precision decides whether we sit on a tail
    hit = mpmath.mpf(2) ** (-(mpmath.mp.prec // 2)) if isinstance(x, mpmath.mpf) else snap
    out = []
    y = x
    while len(out) < depth:
        if snap and err > 1e-3:
            break  # remaining digits are not determined at this precision
        n = P.index_of(y)
        t_n = P.tail_like(n, y)
        out.append(n)
        if snap == 0:
            if y == t_n:
                return LurothDigits.finite(out)
        else:
            if abs(y - t_n) <= err + hit * t_n:
                return LurothDigits.finite(out)
            t_next = P.tail_like(n + 1, y)
            if abs(y - t_next) <= err + hit * t_next:
                # rounding put us just above t_{n+1}; the point is t_{n+1}
                out[-1] = n + 1
                return LurothDigits.finite(out)
        a_n = P.atom_like(n, y)
        y = (t_n - y) / a_n
        if snap:
            err = err / a_n + eps
    return LurothDigits.truncated(out)


def is_alpha_rational(P: Partition, x, mode: str = "exact", tol: float = 1e-12, max_steps: int = 10_000) -> bool:
    """Whether ``x`` has a finite Lüroth expansion.

    ``exact`` iterates rationally and detects cycles, so rational points
    whose orbit revisits a value are decided negatively.  ``numeric`` iterates
    floats for at most ``FLOAT_DEPTH_CAP`` steps with tolerance ``tol``.
    """
    if mode == "exact":
        if not P.exact:
            raise PartitionError(f"exact mode unavailable for {P.spec}")
        y = Fraction(x)
        if not 0 <= y <= 1:
            raise ValueError("x must lie in [0, 1]")
        seen = set()
        for _ in range(max_steps):
            if y == 0:
                return True
            if y in seen:
                return False
            seen.add(y)
            n = P.index_of(y)
            y = (P.tail_exact(n) - y) / P.atom_exact(n)
        import warnings

        warnings.warn(f"alpha-rationality of {x} undecided after {max_steps} exact steps", RuntimeWarning)
        return False
    if mode != "numeric":
        raise ValueError(f"unknown mode {mode!r}")
    y = float(x)
    for _ in range(FLOAT_DEPTH_CAP):
        if y <= tol:
            return True
        n = P.index_of(y)
        t_n = P.tail(n)
        if abs(y - t_n) <= tol or abs(y - P.tail(n + 1)) <= tol:
            return True
        y = (t_n - y) / P.atom(n)
    return False


# ----------------------------------------------------------------------
# Farey words


@dataclass(frozen=True)
class FareyWord:
    """Binary Farey coding word; ``period`` (optional) repeats forever."""

    bits: str
    period: str = ""

    def __post_init__(self):
        if set(self.bits + self.period) - {"0", "1"}:
            raise DigitError(f"Farey word must be binary: {self.bits!r}")

    def __len__(self):
        return len(self.bits)

    def __str__(self):
        return self.bits + (f"({self.period})" if self.period else "")


def luroth_to_farey(d) -> FareyWord:
    """Block substitution ``l -> 0^(l-1) 1``."""
    if not isinstance(d, LurothDigits):
        d = LurothDigits.truncated(d)

    def blocks(ds):
        return "".join("0" * (x - 1) + "1" for x in ds)

    if d.kind == PERIODIC:
        return FareyWord(blocks(d.digits), blocks(d.period))
    return FareyWord(blocks(d.digits))


def farey_to_luroth(w) -> tuple[LurothDigits, int]:
    """Inverse block parse; returns completed digits and trailing zero count.

    A word ending in ``0^m`` leaves ``m`` unresolved zeros.  A periodic word
    with an all-zero period codes an alpha-rational point, returned as finite
    digits with ``m = 0``.
    """
    if isinstance(w, str):
        w = FareyWord(w)

    def parse(bits):
        digits, run = [], 0
        for b in bits:
            run += 1
            if b == "1":
                digits.append(run)
                run = 0
        return digits, run

    if w.period:
        if "1" not in w.period:
            digits, m = parse(w.bits)
            if m or not digits:
                raise DigitError("a word ending in zeros forever codes only 0")
            return LurothDigits.finite(digits, canonical=False), 0
        # rotate the period so it ends in a 1, absorbing leading zeros into the prefix
        cut = w.period.rindex("1") + 1
        pre_bits = w.bits + w.period[:cut]
        per_bits = w.period[cut:] + w.period[:cut]
        pre, m = parse(pre_bits)
        per, m2 = parse(per_bits)
        assert m == 0 and m2 == 0
        return LurothDigits.periodic(per, pre), 0
    digits, m = parse(w.bits)
    return LurothDigits(TRUNCATED, tuple(digits)), m


def all_words(n: int):
    """Every binary word of length ``n`` in lexicographic order."""
    for bits in product("01", repeat=n):
        yield "".join(bits)


# ----------------------------------------------------------------------
# cylinders


@dataclass(frozen=True)
class CylinderInterval:
    """Closed cylinder interval with exact (or multiprecision) endpoints."""

    level: int
    left: object
    right: object
    log_lambda: float
    log_mu: float
    word: FareyWord

    @property
    def width(self):
        return self.right - self.left

    def contains(self, x) -> bool:
        return self.left <= x <= self.right


def _endpoint_context(P, log_lambda):
    """Arithmetic for endpoints: exact when possible, else enough mp digits."""
    if P.exact:
        return Fraction(0), None
    dps = int(30 + max(0.0, -log_lambda) / math.log(10))
    return None, dps


def _endpoints(P, left_digits, right_digits, log_lambda):
    zero, dps = _endpoint_context(P, log_lambda)
    if zero is not None:
        a = finite_value(P, left_digits, zero)
        b = finite_value(P, right_digits, zero)
    else:
        with mpmath.workdps(dps):
            a = finite_value(P, left_digits, mpmath.mpf(0))
            b = finite_value(P, right_digits, mpmath.mpf(0))
    # orientation by comparison rather than by parity bookkeeping
    return (a, b) if a <= b else (b, a)


def luroth_cylinder(P: Partition, digits) -> CylinderInterval:
    """Cylinder of points whose Lüroth expansion starts with ``digits``."""
    digits = [int(d) for d in digits]
    if not digits:
        raise DigitError("cylinder needs at least one digit")
    log_lambda = float(np.sum(P.log_atom(np.asarray(digits, dtype=np.int64))))
    last = digits[:-1] + [digits[-1] + 1]
    left, right = _endpoints(P, digits, last, log_lambda)
    word = luroth_to_farey(LurothDigits.truncated(digits))
    n = len(word)
    return CylinderInterval(n, left, right, log_lambda, -n * math.log(2), word)


def farey_cylinder(P: Partition, w) -> CylinderInterval:
    """Cylinder of points whose Farey coding starts with the word ``w``.

    For ``w = 0^(l_1-1)1 ... 0^(l_k-1)1 0^m`` with ``m > 0`` the endpoints
    are ``[l_1..l_k, m+1]`` and ``[l_1..l_k]`` and the Lebesgue measure is
    ``a_{l_1} ... a_{l_k} t_{m+1}``.
    """
    if isinstance(w, str):
        w = FareyWord(w)
    if len(w) == 0 or w.period:
        raise DigitError("cylinder needs a nonempty finite word")
    digits, m = farey_to_luroth(w)
    digits = list(digits.digits)
    if m == 0:
        return luroth_cylinder(P, digits)
    log_lambda = (float(np.sum(P.log_atom(np.asarray(digits, dtype=np.int64)))) if digits else 0.0) + P.log_tail(m + 1)
    left, right = _endpoints(P, digits + [m + 1], digits, log_lambda)
    n = len(w)
    return CylinderInterval(n, left, right, log_lambda, -n * math.log(2), w)
