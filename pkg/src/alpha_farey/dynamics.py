"""The Lüroth map, the Farey map, the tent map and their ergodic averages.

Levels are reported as ``s = sum(-log a_l) / sum(l)`` (positive, in nats).
The raw Lüroth quotient ``pi_luroth`` keeps its natural negative sign.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .codec import FLOAT_DEPTH_CAP, PERIODIC, LurothDigits
from .errors import DigitError
from .partition import Partition

__all__ = [
    "luroth_map",
    "farey_map",
    "tent",
    "orbit",
    "BirkhoffSums",
    "birkhoff",
    "lyapunov_farey",
    "lyapunov_pointwise",
    "farey_log_slope",
    "pi_luroth",
    "level",
    "cycle_level",
]


def luroth_map(P: Partition, x):
    """``L(x) = (t_n - x) / a_n`` for ``x`` in ``A_n``; ``L(0) = 0``."""
    if x == 0:
        return x * 0
    n = P.index_of(x)
    return (P.tail_like(n, x) - x) / P.atom_like(n, x)


def farey_map(P: Partition, x):
    """Farey map: ``(1 - x)/a_1`` on ``A_1`` and an increasing affine branch on ``A_n``."""
    if x == 0:
        return x * 0
    n = P.index_of(x)
    if n == 1:
        return (1 - x) / P.atom_like(1, x)
    a_prev = P.atom_like(n - 1, x)
    return a_prev * (x - P.tail_like(n + 1, x)) / P.atom_like(n, x) + P.tail_like(n, x)


def tent(x):
    """Tent map ``2x`` on ``[0, 1/2)`` and ``2 - 2x`` on ``[1/2, 1]``."""
    return 2 * x if x < Fraction(1, 2) else 2 - 2 * x


def orbit(f, x, n: int) -> list:
    """``[x, f(x), ..., f^n(x)]``."""
    out = [x]
    for _ in range(n):
        x = f(x)
        out.append(x)
    return out


@dataclass(frozen=True)
class BirkhoffSums:
    n: int
    sum_log_atoms: float
    sum_digits: int

    @property
    def level(self) -> float:
        return -self.sum_log_atoms / self.sum_digits


def _digit_array(d, n):
    if isinstance(d, LurothDigits):
        return np.asarray(d.prefix(n), dtype=np.int64)
    d = np.asarray(d, dtype=np.int64)
    if n > d.size:
        raise DigitError(f"need {n} digits, only {d.size} available")
    return d[:n]


def birkhoff(P: Partition, d, n: int) -> BirkhoffSums:
    """Sums of ``log a_l`` and of ``l`` over the first ``n`` digits."""
    if n < 1:
        raise DigitError("n must be >= 1")
    digits = _digit_array(d, n)
    return BirkhoffSums(n, float(np.sum(P.log_atom(digits))), int(digits.sum()))


def farey_log_slope(P: Partition, n: int) -> float:
    """``log |F'|`` on ``A_n``."""
    if n == 1:
        return -P.log_atom(1)
    return P.log_atom(n - 1) - P.log_atom(n)


def cycle_level(P: Partition, period) -> float:
    """Exact level of a periodic digit block ``sum(-log a_l) / sum(l)``."""
    period = np.asarray(period, dtype=np.int64)
    return float(-np.sum(P.log_atom(period)) / period.sum())


def lyapunov_farey(P: Partition, d, n_steps: int | None = None) -> float:
    """Lyapunov exponent of the Farey map along the point coded by ``d``.

    Periodic digits give the exact cycle average.  Otherwise the average of
    ``log |F'|`` over the first ``n_steps`` Farey steps, computed digit block
    by digit block: the ``l`` slopes spent inside one block telescope to
    ``-log a_l``.  A partially consumed final block adds its first ``j``
    slopes ``a_{m-1}/a_m`` explicitly.
    """
    if isinstance(d, LurothDigits) and d.kind == PERIODIC and n_steps is None:
        return cycle_level(P, d.period)
    if n_steps is None:
        raise DigitError("n_steps required for non-periodic digits")
    if isinstance(d, LurothDigits):
        digits = np.asarray(d.prefix_covering(n_steps), dtype=np.int64)
    else:
        digits = np.asarray(d, dtype=np.int64)
    csum = np.cumsum(digits)
    if csum.size == 0 or csum[-1] < n_steps:
        raise DigitError(f"digits cover fewer than {n_steps} Farey steps")
    full = int(np.searchsorted(csum, n_steps, side="right"))
    total = float(-np.sum(P.log_atom(digits[:full]))) if full else 0.0
    used = int(csum[full - 1]) if full else 0
    j = n_steps - used
    if j:
        # descent l -> l-j inside the block, j < l so every m >= 2
        ell = int(digits[full])
        m = np.arange(ell - j + 1, ell + 1, dtype=np.int64)
        total += float(np.sum(P.log_atom(m - 1) - P.log_atom(m)))
    return total / n_steps


def lyapunov_pointwise(P: Partition, x: float, n_steps: int = FLOAT_DEPTH_CAP) -> float:
    """Float-orbit Birkhoff average of ``log |F'|``; demonstration only.

    Capped at ``FLOAT_DEPTH_CAP`` steps because float orbits lose a digit's
    worth of precision per Lüroth step.
    """
    n_steps = min(n_steps, FLOAT_DEPTH_CAP)
    total = 0.0
    y = float(x)
    for _ in range(n_steps):
        if y <= 0:
            raise DigitError("orbit reached the fixed point 0")
        total += farey_log_slope(P, P.index_of(y))
        y = min(1.0, max(0.0, farey_map(P, y)))
    return total / n_steps


def pi_luroth(P: Partition, d, n: int | None = None) -> float:
    """Lüroth quotient ``sum(log a_l) / sum(l)`` (negative)."""
    if isinstance(d, LurothDigits) and d.kind == PERIODIC and n is None:
        return -cycle_level(P, d.period)
    if n is None:
        n = len(d.digits) if isinstance(d, LurothDigits) else len(d)
    b = birkhoff(P, d, n)
    return b.sum_log_atoms / b.sum_digits


def level(P: Partition, d, n: int | None = None) -> float:
    """Positive level ``s = -pi_luroth``."""
    return -pi_luroth(P, d, n)

