"""Independent reference computations for the test suite.

Nothing here imports alpha_farey; each routine is a direct transcription of
a definition, written for clarity over speed.
"""

from __future__ import annotations

import math
from fractions import Fraction

import mpmath

LOG2 = math.log(2)


def harmonic_tail(n):
    return Fraction(1, n)


def dyadic_tail(n):
    return Fraction(1, 2 ** (n - 1))


def geometric_tail(tau):
    tau = Fraction(tau)
    return lambda n: tau ** -(n - 1)


def series_value(tail, digits):
    """Alternating Lüroth series: t_l1 - a_l1 t_l2 + a_l1 a_l2 t_l3 - ..."""
    x, weight, sign = Fraction(0), Fraction(1), 1
    for d in digits:
        a = tail(d) - tail(d + 1)
        x += sign * weight * tail(d)
        weight *= a
        sign = -sign
    return x


def theta_series(digits):
    """2 * sum (-1)^(k-1) 2^-(l1+...+lk)."""
    s, total = 0, Fraction(0)
    for k, d in enumerate(digits):
        s += d
        total += (-1) ** k * Fraction(1, 2 ** s)
    return 2 * total


def word_blocks(bits):
    """Split a Farey word into Lüroth digits plus a trailing run of zeros."""
    digits, run = [], 0
    for b in bits:
        run += 1
        if b == "1":
            digits.append(run)
            run = 0
    return digits, run


def farey_cylinder_bounds(tail, bits):
    """Endpoints of a Farey cylinder, from the two extreme digit strings."""
    digits, m = word_blocks(bits)
    if m:
        ends = [series_value(tail, digits + [m + 1]), series_value(tail, digits) if digits else Fraction(0)]
    else:
        if not digits:
            return Fraction(0), Fraction(1)
        ends = [series_value(tail, digits), series_value(tail, digits[:-1] + [digits[-1] + 1])]
    return min(ends), max(ends)


def distribution_count(tail, x, n):
    """mu([0, x)) at resolution n: 2^-n times the number of level-n cylinders inside [0, x)."""
    count = 0
    for k in range(2 ** n):
        bits = format(k, f"0{n}b")
        _, right = farey_cylinder_bounds(tail, bits)
        if right <= x:
            count += 1
    return Fraction(count, 2 ** n)


# ----------------------------------------------------------------------
# free energy and spectrum


def geometric_v(tau, u):
    return math.log1p((tau - 1) ** u) - u * math.log(tau)


def geometric_sigma(tau, s, lo=-80.0, hi=80.0):
    """inf_u u + v(u)/s with the closed-form v, by dense grid then golden-section refinement."""
    f = lambda u: u + geometric_v(tau, u) / s
    grid = [lo + (hi - lo) * i / 32000 for i in range(32001)]
    i = min(range(len(grid)), key=lambda k: f(grid[k]))
    a, b = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
    g = (math.sqrt(5) - 1) / 2
    for _ in range(200):
        c, d = b - g * (b - a), a + g * (b - a)
        if f(c) < f(d):
            b = d
        else:
            a = c
    return f((a + b) / 2)


def harmonic_sigma_log2():
    """Grid plus parabola oracle on mpmath nsum (exponentially damped sums only)."""
    with mpmath.workdps(30):
        L2 = mpmath.log(2)

        def v(u):
            f = lambda r: mpmath.nsum(lambda n: (1 / (n * (n + 1))) ** u * mpmath.e ** (-r * n), [1, mpmath.inf]) - 1
            return mpmath.findroot(f, 0.3)

        F = lambda u: u + v(u) / L2
        us = [mpmath.mpf("0.64") + mpmath.mpf(i) / 1000 for i in range(41)]
        vals = [F(u) for u in us]
        i = min(range(len(vals)), key=lambda k: vals[k])
        x0, x1, x2 = us[i - 1], us[i], us[i + 1]
        y0, y1, y2 = vals[i - 1], vals[i], vals[i + 1]
        den = (x0 - x1) * (x0 - x2) * (x1 - x2)
        A = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / den
        B = (x2**2 * (y0 - y1) + x1**2 * (y2 - y0) + x0**2 * (y1 - y2)) / den
        return float(F(-B / (2 * A)))


def geometric_mean_level(tau):
    """sum a log(1/a) / sum n a for a_n = (tau-1) tau^-n."""
    q = 1 / tau
    c = (tau - 1) / tau
    # a_n = c q^(n-1); sum a_n = 1, sum n a_n = 1/(1-q)
    mean_n = 1 / (1 - q)
    entropy = -math.log(c) + (mean_n - 1) * math.log(tau)
    return entropy / mean_n
