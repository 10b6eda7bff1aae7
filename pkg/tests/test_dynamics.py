import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from alpha_farey import (
    LurothDigits,
    birkhoff,
    farey_map,
    luroth_digits,
    luroth_map,
    luroth_to_farey,
    luroth_value,
    lyapunov_farey,
    make_partition,
    parse_digits,
    pi_luroth,
    tent,
)
from alpha_farey.dynamics import cycle_level, orbit

H = make_partition("harmonic")
D = make_partition("dyadic")
G3 = make_partition("geometric:3")


def test_map_examples():
    assert luroth_map(H, Fraction(3, 4)) == Fraction(1, 2)
    assert luroth_map(H, Fraction(4, 9)) == Fraction(1, 3)
    assert luroth_map(H, Fraction(0)) == 0
    assert farey_map(H, Fraction(4, 9)) == Fraction(5, 6)
    assert farey_map(H, Fraction(0)) == 0


def test_farey_acts_by_decrement():
    # [2,3] -> [1,3]
    x = luroth_value(H, LurothDigits.finite([2, 3]), mode="exact").value
    assert farey_map(H, x) == luroth_value(H, LurothDigits.finite([1, 3]), mode="exact").value


@pytest.mark.parametrize("x", [0.1, 0.3, 0.7, 0.9])
def test_dyadic_farey_is_tent(x):
    assert farey_map(D, x) == pytest.approx(tent(x), abs=1e-15)


def test_tent():
    assert tent(Fraction(1, 2)) == 1
    assert tent(Fraction(1, 4)) == Fraction(1, 2)
    assert orbit(tent, Fraction(1, 3), 2) == [Fraction(1, 3), Fraction(2, 3), Fraction(2, 3)]


def test_birkhoff_examples():
    b = birkhoff(H, parse_digits("[2 per]"), 2)
    assert b.sum_log_atoms == pytest.approx(2 * math.log(1 / 6))
    assert b.sum_digits == 4
    b = birkhoff(H, LurothDigits.finite([1, 2, 3]), 3)
    assert b.sum_log_atoms == pytest.approx(math.log(1 / 2) + math.log(1 / 6) + math.log(1 / 12))
    assert b.sum_digits == 6


@given(st.lists(st.integers(1, 40), min_size=1, max_size=30))
def test_dyadic_birkhoff(digits):
    b = birkhoff(D, LurothDigits.truncated(digits), len(digits))
    assert b.sum_log_atoms == pytest.approx(-b.sum_digits * math.log(2), rel=1e-12)


@pytest.mark.parametrize(
    "spec, digits, expected",
    [
        ("harmonic", "[2 per]", math.log(6) / 2),
        ("harmonic", "[5 per]", math.log(30) / 5),
        ("harmonic", "[1 per]", math.log(2)),
        ("dyadic", "[3,(1,4)]", math.log(2)),
    ],
)
def test_lyapunov_cycles(spec, digits, expected):
    P = make_partition(spec)
    d = parse_digits(digits)
    assert lyapunov_farey(P, d) == pytest.approx(expected, rel=1e-13)
    assert -pi_luroth(P, d) == pytest.approx(expected, rel=1e-13)


def test_lyapunov_blockwise_matches_cycle():
    d = parse_digits("[2 per]")
    # long finite stretch of the same orbit
    approx = lyapunov_farey(H, LurothDigits.truncated([2] * 5000), 10_000)
    assert approx == pytest.approx(math.log(6) / 2, abs=1e-3)
    assert lyapunov_farey(H, d) == pytest.approx(approx, abs=1e-3)


@given(st.lists(st.integers(1, 9), min_size=1, max_size=4))
@settings(max_examples=60, deadline=None)
def test_cycle_formulas_agree(period):
    for P in (H, G3):
        d = LurothDigits.periodic(period)
        assert abs(lyapunov_farey(P, d) + pi_luroth(P, d)) <= 1e-12
        assert cycle_level(P, period) == pytest.approx(lyapunov_farey(P, d), abs=1e-12)


@given(st.lists(st.integers(1, 15), min_size=2, max_size=20))
@settings(max_examples=100, deadline=None)
def test_digit_shift(digits):
    d = LurothDigits.finite(digits)
    x = luroth_value(H, d, mode="exact").value
    if len(d.digits) == 1:
        assert luroth_map(H, x) == 0
        return
    assert luroth_digits(H, luroth_map(H, x), depth=10**6) == d.shift(1)


@given(st.lists(st.integers(1, 15), min_size=1, max_size=20))
@settings(max_examples=100, deadline=None)
def test_farey_is_left_shift_on_words(digits):
    d = LurothDigits.finite(digits)
    x = luroth_value(H, d, mode="exact").value
    fx = farey_map(H, x)
    bits = luroth_to_farey(d).bits
    if fx == 0:
        assert bits == "1"
        return
    assert luroth_to_farey(luroth_digits(H, fx, depth=10**6)).bits == bits[1:]


@pytest.mark.parametrize("n", [1, 2, 3, 7, 20])
def test_branch_slopes(n):
    P = G3
    lo, hi = P.tail(n + 1), P.tail(n)
    x0, x1 = lo + 0.3 * (hi - lo), lo + 0.6 * (hi - lo)
    slope = (farey_map(P, x1) - farey_map(P, x0)) / (x1 - x0)
    if n == 1:
        assert slope == pytest.approx(-1 / P.atom(1), rel=1e-9)
    else:
        assert slope == pytest.approx(P.atom(n - 1) / P.atom(n), rel=1e-9)
