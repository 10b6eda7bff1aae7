"""Interval partitions of (0, 1] described by atoms ``a_n`` and tails ``t_n``.

A partition is the sequence of left-open, right-closed intervals
``A_n = (t_{n+1}, t_n]`` ordered from right to left, with ``t_1 = 1`` and
``a_n = t_n - t_{n+1}``.  Four analytic families are built in; a custom
partition is a finite prefix of tails followed by an analytic tail model,
so that every infinite series over atoms has a computable remainder.

Values come in three flavours:

* float / numpy (``atom``, ``tail``, ``log_atom``, ``log_tail``), the log
  variants evaluated from the analytic form rather than as logs of rounded
  products;
* exact rationals (``atom_exact``, ``tail_exact``) for families whose tails
  are rational;
* mpmath multiprecision (``atom_mp``, ``tail_mp``) at the ambient
  ``mpmath.mp`` precision.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from numbers import Rational
from pathlib import Path

import mpmath
import numpy as np

from .errors import HorizonError, PartitionError

__all__ = [
    "DEFAULT_HORIZON",
    "Family",
    "TailModel",
    "Partition",
    "PartitionClass",
    "make_partition",
    "classify_partition",
]

DEFAULT_HORIZON = 10**6
LOG2 = math.log(2.0)


class Family(str, enum.Enum):
    DYADIC = "dyadic"
    HARMONIC = "harmonic"
    GEOMETRIC = "geometric"
    POWERLAW = "powerlaw"
    CUSTOM = "custom"


@dataclass(frozen=True)
class TailModel:
    """Continuation of custom tails past the explicit prefix.

    ``kind='geometric'``: ``t_{n+1} = t_n / param`` (param > 1).
    ``kind='power'``: ``t_n = t_K (n / K) ** -param`` (param > 0).
    """

    kind: str
    param: float

    def __post_init__(self):
        if self.kind not in ("geometric", "power"):
            raise PartitionError(f"unknown tail model kind {self.kind!r}")
        if self.kind == "geometric" and not self.param > 1:
            raise PartitionError("geometric tail model needs ratio > 1")
        if self.kind == "power" and not self.param > 0:
            raise PartitionError("power tail model needs exponent > 0")


def _as_param(value):
    """Keep decimal strings and rationals exact; pass floats through."""
    if isinstance(value, str):
        try:
            return Fraction(value)
        except ValueError as exc:
            raise PartitionError(f"cannot parse parameter {value!r}") from exc
    if isinstance(value, Rational):
        return Fraction(value)
    return float(value)


def _log_any(x):
    """Natural log of a positive float, Fraction or mpf."""
    if isinstance(x, Fraction):
        return math.log(x.numerator) - math.log(x.denominator)
    if isinstance(x, mpmath.mpf):
        return float(mpmath.log(x))
    return math.log(x)


@dataclass(frozen=True)
class Partition:
    """A partition of (0, 1] into atoms accumulating only at 0.

    Construct through :func:`make_partition` or the classmethods.  Instances
    are immutable; cached derived arrays are filled idempotently.
    """

    family: Family
    param: Fraction | float | None = None
    tails: tuple = ()
    tail_model: TailModel | None = None
    horizon: int = DEFAULT_HORIZON
    source: str | None = field(default=None, compare=False)
    # idempotent memo of exact and multiprecision atoms/tails
    _mp_memo: dict = field(default_factory=dict, init=False, compare=False, repr=False, hash=False)

    def __post_init__(self):
        if self.horizon < 2:
            raise PartitionError("horizon must be at least 2")
        fam = self.family
        if fam is Family.GEOMETRIC and not self.param > 1:
            raise PartitionError(f"geometric partition needs tau > 1, got {self.param}")
        if fam is Family.POWERLAW and not self.param > 0:
            raise PartitionError(f"power-law partition needs tau > 0, got {self.param}")
        if fam is Family.CUSTOM:
            self._validate_custom()

    def _validate_custom(self):
        tails = self.tails
        if self.tail_model is None:
            raise PartitionError("custom partitions need a tail_model; a bare tail list is rejected")
        if len(tails) == 0:
            raise PartitionError("custom partition needs at least one tail", index=1)
        if tails[0] != 1:
            raise PartitionError(f"t_1 must be exactly 1, got {tails[0]}", index=1)
        for i, t in enumerate(tails, start=1):
            if not (t > 0 and math.isfinite(t)):
                raise PartitionError(f"tail t_{i} = {t} is not positive", index=i)
            if i > 1 and not t < tails[i - 2]:
                raise PartitionError(
                    f"tails must strictly decrease: t_{i} = {t} >= t_{i - 1} = {tails[i - 2]}",
                    index=i,
                )
        if len(tails) > self.horizon:
            raise PartitionError("explicit tails exceed the horizon")

    # ------------------------------------------------------------------
    # constructors

    @classmethod
    def dyadic(cls, horizon=DEFAULT_HORIZON):
        return cls(Family.DYADIC, horizon=horizon)

    @classmethod
    def harmonic(cls, horizon=DEFAULT_HORIZON):
        return cls(Family.HARMONIC, horizon=horizon)

    @classmethod
    def geometric(cls, tau, horizon=DEFAULT_HORIZON):
        return cls(Family.GEOMETRIC, _as_param(tau), horizon=horizon)

    @classmethod
    def powerlaw(cls, tau, horizon=DEFAULT_HORIZON):
        return cls(Family.POWERLAW, _as_param(tau), horizon=horizon)

    @classmethod
    def custom(cls, tails, tail_model, horizon=DEFAULT_HORIZON, source=None):
        if isinstance(tail_model, dict):
            tail_model = TailModel(str(tail_model["kind"]), float(tail_model["param"]))
        return cls(
            Family.CUSTOM,
            tails=tuple(float(t) for t in tails),
            tail_model=tail_model,
            horizon=horizon,
            source=source,
        )

    # ------------------------------------------------------------------
    # descriptive properties

    @property
    def tau(self) -> float:
        return float(self.param)

    @cached_property
    def is_dyadic(self) -> bool:
        if self.family is Family.DYADIC:
            return True
        if self.family is Family.GEOMETRIC:
            return self.param == 2
        if self.family is Family.CUSTOM:
            return (
                self.tail_model.kind == "geometric"
                and self.tail_model.param == 2
                and all(t == 2.0 ** (1 - i) for i, t in enumerate(self.tails, start=1))
            )
        return False

    @cached_property
    def exact(self) -> bool:
        """True when every tail is a rational number we can produce exactly."""
        fam = self.family
        if fam in (Family.DYADIC, Family.HARMONIC):
            return True
        if fam is Family.GEOMETRIC:
            return isinstance(self.param, Fraction)
        if fam is Family.POWERLAW:
            return isinstance(self.param, Fraction) and self.param.denominator == 1
        return False

    @property
    def spec(self) -> str:
        fam = self.family
        if fam in (Family.DYADIC, Family.HARMONIC):
            return fam.value
        if fam is Family.CUSTOM:
            return f"custom:{self.source}" if self.source else "custom"
        return f"{fam.value}:{_format_param(self.param)}"

    def __str__(self):
        return self.spec

    # ------------------------------------------------------------------
    # range checks

    def _check_atom_index(self, n):
        lo, hi = (np.min(n), np.max(n)) if isinstance(n, np.ndarray) else (n, n)
        if lo < 1 or hi > self.horizon:
            raise HorizonError(f"atom index {hi if hi > self.horizon else lo} outside [1, {self.horizon}]")

    def _check_tail_index(self, n):
        lo, hi = (np.min(n), np.max(n)) if isinstance(n, np.ndarray) else (n, n)
        if lo < 1 or hi > self.horizon + 1:
            raise HorizonError(f"tail index {hi if hi > self.horizon else lo} outside [1, {self.horizon + 1}]")

    # ------------------------------------------------------------------
    # float / numpy evaluation

    @cached_property
    def _custom_log_tails(self):
        return np.log(np.asarray(self.tails, dtype=float))

    @cached_property
    def _custom_log_atoms(self):
        # explicit atoms for n < K; a_K onwards come from the tail model
        t = np.asarray(self.tails, dtype=float)
        return np.log(t[:-1] - t[1:])

    def log_tail(self, n):
        """``log t_n`` for an int or integer array ``n``."""
        self._check_tail_index(n)
        arr = np.asarray(n, dtype=float)
        fam = self.family
        if fam is Family.DYADIC:
            out = -(arr - 1.0) * LOG2
        elif fam is Family.HARMONIC:
            out = -np.log(arr)
        elif fam is Family.GEOMETRIC:
            out = -(arr - 1.0) * math.log(self.tau)
        elif fam is Family.POWERLAW:
            out = -self.tau * np.log(arr)
        else:
            out = self._custom_log_tail(np.asarray(n))
        return float(out) if np.ndim(out) == 0 else out

    def _custom_log_tail(self, n):
        K = len(self.tails)
        shape = np.shape(n)
        n = np.atleast_1d(np.asarray(n, dtype=np.int64))
        lt = self._custom_log_tails
        inside = n <= K
        out = np.empty(n.shape, dtype=float)
        out[inside] = lt[n[inside] - 1]
        beyond = n[~inside].astype(float)
        if self.tail_model.kind == "geometric":
            out[~inside] = lt[K - 1] - (beyond - K) * math.log(self.tail_model.param)
        else:
            out[~inside] = lt[K - 1] - self.tail_model.param * (np.log(beyond) - math.log(K))
        return out.reshape(shape)

    def log_atom(self, n):
        """``log a_n`` computed from the analytic form."""
        self._check_atom_index(n)
        arr = np.asarray(n, dtype=float)
        fam = self.family
        if fam is Family.DYADIC:
            out = -arr * LOG2
        elif fam is Family.HARMONIC:
            out = -np.log(arr) - np.log1p(arr)
        elif fam is Family.GEOMETRIC:
            tau = self.tau
            out = math.log(tau - 1.0) - arr * math.log(tau)
        elif fam is Family.POWERLAW:
            tau = self.tau
            out = -tau * np.log(arr) + np.log(-np.expm1(-tau * np.log1p(1.0 / arr)))
        else:
            out = self._custom_log_atom(np.asarray(n))
        return float(out) if np.ndim(out) == 0 else out

    def _custom_log_atom(self, n):
        K = len(self.tails)
        shape = np.shape(n)
        n = np.atleast_1d(np.asarray(n, dtype=np.int64))
        out = np.empty(n.shape, dtype=float)
        inside = n < K
        out[inside] = self._custom_log_atoms[n[inside] - 1]
        beyond = n[~inside]
        lt = self._custom_log_tail(beyond)
        if self.tail_model.kind == "geometric":
            out[~inside] = lt + math.log1p(-1.0 / self.tail_model.param)
        else:
            nb = beyond.astype(float)
            out[~inside] = lt + np.log(-np.expm1(-self.tail_model.param * np.log1p(1.0 / nb)))
        return out.reshape(shape)

    def tail(self, n):
        return np.exp(self.log_tail(n)) if isinstance(n, np.ndarray) else math.exp(self.log_tail(n))

    def atom(self, n):
        return np.exp(self.log_atom(n)) if isinstance(n, np.ndarray) else math.exp(self.log_atom(n))

    # ------------------------------------------------------------------
    # exact rational evaluation

    def _require_exact(self):
        if not self.exact:
            raise PartitionError(
                f"exact arithmetic unavailable for {self.spec}: tails are not known rationals"
            )

    def tail_exact(self, n: int) -> Fraction:
        self._require_exact()
        self._check_tail_index(n)
        key = ("T", int(n))
        v = self._mp_memo.get(key)
        if v is None:
            v = self._mp_memo[key] = self._tail_exact(int(n))
        return v

    def _tail_exact(self, n: int) -> Fraction:
        fam = self.family
        if fam is Family.DYADIC:
            return Fraction(1, 1 << (n - 1))
        if fam is Family.HARMONIC:
            return Fraction(1, n)
        if fam is Family.GEOMETRIC:
            return 1 / self.param ** (n - 1)
        return Fraction(1, n ** int(self.param))

    def atom_exact(self, n: int) -> Fraction:
        self._check_atom_index(n)
        key = ("A", int(n))
        v = self._mp_memo.get(key)
        if v is None:
            v = self._mp_memo[key] = self._atom_exact(int(n))
        return v

    def _atom_exact(self, n: int) -> Fraction:
        fam = self.family
        if fam is Family.DYADIC:
            return Fraction(1, 1 << n)
        if fam is Family.HARMONIC:
            return Fraction(1, n * (n + 1))
        return self.tail_exact(n) - self.tail_exact(n + 1)

    # ------------------------------------------------------------------
    # multiprecision evaluation

    def _param_mp(self):
        p = self.param
        if isinstance(p, Fraction):
            return mpmath.mpf(p.numerator) / p.denominator
        return mpmath.mpf(p)

    def tail_mp(self, n: int):
        self._check_tail_index(n)
        key = ("t", int(n), mpmath.mp.prec)
        v = self._mp_memo.get(key)
        if v is None:
            v = self._mp_memo[key] = self._tail_mp(int(n))
        return v

    def atom_mp(self, n: int):
        self._check_atom_index(n)
        key = ("a", int(n), mpmath.mp.prec)
        v = self._mp_memo.get(key)
        if v is None:
            v = self._mp_memo[key] = self._atom_mp(int(n))
        return v

    def _tail_mp(self, n: int):
        fam = self.family
        if fam is Family.DYADIC:
            return mpmath.ldexp(mpmath.mpf(1), 1 - n)
        if fam is Family.HARMONIC:
            return 1 / mpmath.mpf(n)
        if fam is Family.GEOMETRIC:
            return self._param_mp() ** (1 - n)
        if fam is Family.POWERLAW:
            return mpmath.mpf(n) ** (-self._param_mp())
        K = len(self.tails)
        if n <= K:
            return mpmath.mpf(self.tails[n - 1])
        tK = mpmath.mpf(self.tails[K - 1])
        p = mpmath.mpf(self.tail_model.param)
        if self.tail_model.kind == "geometric":
            return tK * p ** (K - n)
        return tK * (mpmath.mpf(n) / K) ** (-p)

    def _atom_mp(self, n: int):
        fam = self.family
        if fam is Family.POWERLAW:
            tau = self._param_mp()
            return mpmath.mpf(n) ** (-tau) * -mpmath.expm1(-tau * mpmath.log1p(mpmath.mpf(1) / n))
        if fam is Family.GEOMETRIC:
            tau = self._param_mp()
            return (tau - 1) * tau ** (-n)
        if fam is Family.CUSTOM and n >= len(self.tails):
            tn = self.tail_mp(n)
            p = mpmath.mpf(self.tail_model.param)
            if self.tail_model.kind == "geometric":
                return tn * (1 - 1 / p)
            return tn * -mpmath.expm1(-p * mpmath.log1p(mpmath.mpf(1) / n))
        return self.tail_mp(n) - self.tail_mp(n + 1)

    # ------------------------------------------------------------------
    # values in the arithmetic of a given number

    def tail_like(self, n, x):
        """``t_n`` in the arithmetic of ``x`` (Fraction, mpf or float)."""
        if isinstance(x, Fraction):
            return self.tail_exact(n)
        if isinstance(x, mpmath.mpf):
            return self.tail_mp(n)
        return self.tail(n)

    def atom_like(self, n, x):
        if isinstance(x, Fraction):
            return self.atom_exact(n)
        if isinstance(x, mpmath.mpf):
            return self.atom_mp(n)
        return self.atom(n)

    # ------------------------------------------------------------------
    # atom lookup

    def _index_guess(self, log_x: float) -> int:
        fam = self.family
        if fam is Family.DYADIC:
            g = -log_x / LOG2 + 1.0
        elif fam is Family.HARMONIC:
            g = math.exp(min(-log_x, 700.0))
        elif fam is Family.GEOMETRIC:
            g = -log_x / math.log(self.tau) + 1.0
        elif fam is Family.POWERLAW:
            g = math.exp(min(-log_x / self.tau, 700.0))
        else:
            lt = self._custom_log_tails
            K = len(self.tails)
            if log_x >= lt[-1]:
                # tails descend, so search the negated array
                return int(np.searchsorted(-lt, -log_x, side="right"))
            if self.tail_model.kind == "geometric":
                g = K + (lt[-1] - log_x) / math.log(self.tail_model.param)
            else:
                g = K * math.exp(min((lt[-1] - log_x) / self.tail_model.param, 700.0))
        if not math.isfinite(g):
            return self.horizon
        return int(min(max(math.floor(g), 1), self.horizon))

    def index_of(self, x) -> int:
        """Return ``n`` with ``x`` in ``A_n = (t_{n+1}, t_n]``; ``0 < x <= 1``."""
        if not 0 < x <= 1:
            raise ValueError(f"index_of needs 0 < x <= 1, got {x}")
        n = self._index_guess(_log_any(x))
        while n > 1 and self.tail_like(n, x) < x:
            n -= 1
        while self.tail_like(n + 1, x) >= x:
            if n >= self.horizon:
                raise HorizonError(f"point {float(x):.3e} lies beyond atom {self.horizon}")
            n += 1
        return n

    def index_of_array(self, u, cap=None):
        """Vectorised :meth:`index_of` for a float array in (0, 1].

        With ``cap`` set, indices larger than ``cap`` are reported as ``cap``
        (used when only the first ``cap`` levels of a digit matter).
        """
        u = np.asarray(u, dtype=float)
        top = self.horizon if cap is None else min(cap, self.horizon)
        log_u = np.log(u)
        n = np.array([min(self._index_guess(v), top) for v in log_u], dtype=np.int64)
        for _ in range(64):
            down = (n > 1) & (self.tail(n) < u)
            n = n - down
            up = (n < top) & (self.tail(np.minimum(n + 1, self.horizon + 1)) >= u)
            n = n + up
            if not down.any() and not up.any():
                break
        if cap is None and np.any(self.tail(np.minimum(n + 1, self.horizon + 1)) >= u):
            raise HorizonError(f"sample lies beyond atom {self.horizon}")
        return n


def _format_param(p):
    if isinstance(p, Fraction):
        if p.denominator == 1:
            return str(p.numerator)
        f = float(p)
        return repr(f) if Fraction(repr(f)) == p else f"{p.numerator}/{p.denominator}"
    return repr(float(p))


def make_partition(spec, horizon: int = DEFAULT_HORIZON) -> Partition:
    """Build a partition from a spec string or pass a Partition through.

    Grammar: ``dyadic``, ``harmonic``, ``geometric:<tau>``, ``powerlaw:<tau>``,
    ``custom:<path>`` where the JSON file holds ``tails`` and ``tail_model``.

    >>> make_partition("harmonic").atom(5) == 1 / 30
    True
    """
    if isinstance(spec, Partition):
        return spec
    text = str(spec).strip()
    name, _, arg = text.partition(":")
    name = name.lower()
    if name == "dyadic" and not arg:
        return Partition.dyadic(horizon)
    if name == "harmonic" and not arg:
        return Partition.harmonic(horizon)
    if name == "geometric" and arg:
        return Partition.geometric(arg, horizon)
    if name == "powerlaw" and arg:
        return Partition.powerlaw(arg, horizon)
    if name == "custom" and arg:
        return load_custom(arg, horizon)
    raise PartitionError(f"unrecognised partition spec {spec!r}")


def load_custom(path, horizon: int = DEFAULT_HORIZON) -> Partition:
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise PartitionError(f"cannot read custom partition {path}: {exc}") from exc
    if "psi" in doc:
        raise PartitionError("slowly-varying corrections (psi) are not supported; use psi = 1")
    if "tails" not in doc or "tail_model" not in doc:
        raise PartitionError("custom partition file needs 'tails' and 'tail_model'")
    return Partition.custom(doc["tails"], doc["tail_model"], horizon=horizon, source=str(path))


@dataclass(frozen=True)
class PartitionClass:
    """Outcome of :func:`classify_partition`.

    ``kind`` is one of ``dyadic``, ``expanding`` (``param`` = tail ratio
    limit rho), ``expansive`` (``param`` = exponent tau) or ``other``.
    ``n0`` is the index from which atoms strictly decrease.
    """

    kind: str
    param: float | None
    eventually_decreasing: bool
    n0: int | None
    diagnostic: str = ""


def classify_partition(P: Partition) -> PartitionClass:
    if P.is_dyadic:
        return PartitionClass("dyadic", None, True, 1)
    fam = P.family
    if fam is Family.GEOMETRIC:
        return PartitionClass("expanding", P.tau, True, 1)
    if fam is Family.HARMONIC:
        return PartitionClass("expansive", 1.0, True, 1)
    if fam is Family.POWERLAW:
        return PartitionClass("expansive", P.tau, True, 1)

    model = P.tail_model
    kind = "expanding" if model.kind == "geometric" else "expansive"
    K = len(P.tails)
    # tail-model atoms decrease strictly from index K on; check the prefix
    la = P.log_atom(np.arange(1, K + 1))
    bad = np.nonzero(la[:-1] <= la[1:])[0]
    n0 = int(bad[-1]) + 2 if bad.size else 1
    if not np.all(np.isfinite(la)):
        return PartitionClass("other", None, False, None, "non-finite atoms in prefix")
    return PartitionClass(kind, float(model.param), True, n0, f"prefix of {K} explicit tails")
