import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from alpha_farey import (
    LurothDigits,
    check_conjugacy,
    conjugate_between,
    farey_cylinder,
    luroth_digits,
    luroth_value,
    make_partition,
    mu_cylinder,
    mu_interval,
    parse_digits,
    theta,
    theta_at,
    theta_inverse,
)
from alpha_farey.conjugacy import theta_exact

import oracles

H = make_partition("harmonic")
D = make_partition("dyadic")
G3 = make_partition("geometric:3")
PL = make_partition("powerlaw:1.5")


def test_theta_examples():
    assert theta(LurothDigits.finite([2])).value == Fraction(1, 2)
    t = theta(LurothDigits.finite([2, 3]))
    assert t.value == Fraction(7, 16) and t.error_bound == 0


def test_theta_periodic_is_exact_fixed_point():
    t = theta(parse_digits("[2 per]"))
    # 2 sum (-1)^(k-1) 4^-k = 2/5
    assert t.value == Fraction(2, 5) and t.error_bound == 0
    approx = oracles.theta_series([2] * 40)
    assert abs(t.value - approx) < Fraction(1, 2**75)


def test_theta_truncated_bound():
    d = LurothDigits.truncated([3, 1, 4, 1, 5, 9, 2, 6])
    t = theta(d, target_error=1e-3)
    assert t.error_bound <= 1e-3
    t = theta(d, target_error=1e-30)
    assert t.partial
    assert abs(float(t.value) - float(oracles.theta_series(d.digits))) <= t.error_bound


@pytest.mark.parametrize("x", [Fraction(1, 4), Fraction(3, 8), Fraction(5, 8)])
def test_dyadic_identity(x):
    t = theta_at(D, x)
    assert t.value == x


def test_theta_inverse_examples():
    inv = theta_inverse(H, Fraction(7, 8), 3)
    assert inv.interval.left <= Fraction(5, 6) <= inv.interval.right
    inv = theta_inverse(D, Fraction(3, 10), 12)
    assert inv.interval.left <= Fraction(3, 10) <= inv.interval.right
    inv = theta_inverse(H, Fraction(0), 6)
    assert inv.word.bits == "000000" and inv.interval.left == 0


def test_mu():
    assert mu_cylinder("0100") == pytest.approx(-4 * math.log(2))
    assert mu_interval(H, Fraction(1, 3), Fraction(1, 2))[0] == Fraction(1, 4)
    assert mu_interval(G3, Fraction(0), Fraction(1))[0] == 1


@given(st.lists(st.integers(1, 12), min_size=1, max_size=10), st.lists(st.integers(1, 12), min_size=1, max_size=10))
@settings(max_examples=200, deadline=None)
def test_strict_monotonicity(d1, d2):
    p = luroth_value(H, LurothDigits.finite(d1), mode="exact").value
    q = luroth_value(H, LurothDigits.finite(d2), mode="exact").value
    if p == q:
        return
    tp, tq = theta_at(H, p).value, theta_at(H, q).value
    assert (tp < tq) == (p < q)


@given(st.fractions(min_value=Fraction(1, 1000), max_value=1, max_denominator=10**6), st.integers(2, 10))
@settings(max_examples=40, deadline=None)
def test_distribution_function_identity(x, n):
    lower = oracles.distribution_count(oracles.harmonic_tail, x, n)
    t = theta_at(H, x, tol=1e-14).value
    assert abs(float(t) - float(lower)) <= 2.0 ** (-n + 1)


@given(st.text(alphabet="01", min_size=1, max_size=30))
@settings(max_examples=200, deadline=None)
def test_endpoint_mapping(bits):
    for P in (H, G3):
        c = farey_cylinder(P, bits)
        lo = theta_at(P, c.left).value if c.left else Fraction(0)
        hi = theta_at(P, c.right).value
        assert hi - lo == Fraction(1, 2 ** len(bits))


def test_conjugacy_examples():
    rng = np.random.default_rng(7)
    tail = [int(k) for k in H.index_of_array(1 - rng.random(60))]
    chk = check_conjugacy(H, LurothDigits.truncated([2, 3] + tail), 10)
    assert chk.max_residual <= 1e-9
    tail = [int(k) for k in G3.index_of_array(1 - rng.random(60))]
    assert check_conjugacy(G3, LurothDigits.truncated(tail), 20).max_residual <= 1e-9
    assert check_conjugacy(D, LurothDigits.truncated([3, 1, 4, 1, 5, 9, 2, 6]), 12).max_residual <= 1e-12


@pytest.mark.parametrize("spec", ["harmonic", "geometric:3", "powerlaw:1.5"])
def test_conjugacy_on_random_orbits(spec):
    P = make_partition(spec)
    rng = np.random.default_rng(11)
    for _ in range(10):
        d = [int(k) for k in P.index_of_array(1 - rng.random(50))]
        assert check_conjugacy(P, LurothDigits.truncated(d), 10).max_residual <= 1e-9


def test_conjugacy_on_periodic_orbit():
    assert check_conjugacy(G3, parse_digits("[1;(2,5)]"), 15).max_residual <= 1e-9


def test_conjugacy_through_terminal_points():
    # finite point: orbit reaches 1 then 0
    chk = check_conjugacy(PL, LurothDigits.finite([2, 3, 1, 5, 2]), 40)
    assert chk.steps == 13 and chk.max_residual <= 1e-9


def test_convert():
    assert conjugate_between(H, D, "[2,3]") == Fraction(7, 16)
    d = luroth_digits(D, Fraction(7, 16))
    assert conjugate_between(D, H, d) == Fraction(4, 9)
    assert conjugate_between(H, H, "[2,3,7]") == luroth_value(H, LurothDigits.finite([2, 3, 7]), mode="exact").value


def test_convert_irrational_target():
    with mpmath.workdps(40):
        x = conjugate_between(H, PL, "[2,3]", depth=30)
        back = theta_at(PL, x, tol=1e-12)
    assert abs(float(back.value) - 7 / 16) <= 2.0**-28


def test_theta_exact_empty():
    assert theta_exact([]) == 0
