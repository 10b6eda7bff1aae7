import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from alpha_farey import (
    HypothesisError,
    LurothDigits,
    alpha_rational_factor,
    approximant_ratio,
    classify_empirical,
    classify_oscillating,
    classify_periodic,
    make_partition,
    m_set,
    parse_digits,
    ratio_sequence,
    running_levels,
    zero_criterion,
)
from alpha_farey.derivative import (
    approximant_ratios,
    oscillating_digits,
    oscillation_limits,
    zero_criteria,
)
from alpha_farey.dynamics import cycle_level

H = make_partition("harmonic")
D = make_partition("dyadic")
G3 = make_partition("geometric:3")
G15 = make_partition("geometric:1.5")
LOG2 = math.log(2)


def test_ratio_sequence_dyadic_is_zero():
    r = ratio_sequence(D, LurothDigits.truncated([3, 1, 4, 1, 5, 9, 2, 6, 5, 3]), 30)
    assert np.all(np.abs(r) <= 1e-12)


def test_ratio_sequence_closed_forms():
    k = np.arange(1, 201)
    r = ratio_sequence(H, parse_digits("[2 per]"), 400)
    assert np.allclose(r[2 * k - 1], k * (math.log(6) - 2 * LOG2), rtol=1e-12)
    r = ratio_sequence(H, parse_digits("[5 per]"), 1000)
    assert np.allclose(r[5 * k - 1], k * (math.log(30) - 5 * LOG2), rtol=1e-12)


@given(st.lists(st.integers(1, 8), min_size=1, max_size=4))
@settings(max_examples=40, deadline=None)
def test_periodic_drift_is_linear(period):
    d = LurothDigits.periodic(period)
    p = sum(period)
    n = 50 * p
    r = ratio_sequence(G3, d, n)
    drift = cycle_level(G3, period) - LOG2
    dev = r - np.arange(1, n + 1) * drift
    one_period = np.ptp(dev[:p])
    assert np.ptp(dev) <= one_period + 1e-9


def test_approximant_examples():
    assert approximant_ratio(H, [2, 3], 1) == pytest.approx(math.log(9 / 8), rel=1e-12)
    assert approximant_ratio(D, [2, 3, 4], 1) == pytest.approx(0, abs=1e-14)
    assert approximant_ratio(G3, [1, 1], 1) == pytest.approx(math.log(3 / 4), rel=1e-12)


def test_alpha_rational_factor():
    assert alpha_rational_factor(H).kind == "zero"
    assert alpha_rational_factor(make_partition("powerlaw:2")).kind == "zero"
    # (tau/2)^m / tau: decays for tau < 2 and grows for tau > 2
    assert alpha_rational_factor(G3).kind == "infinity"
    assert alpha_rational_factor(G15).kind == "zero"
    f = alpha_rational_factor(D)
    assert f.kind == "finite" and f.value == 0.5


def test_m_set():
    assert m_set(H).members == {1}
    assert m_set(G3).members == frozenset()
    with pytest.warns(RuntimeWarning, match="floating point"):
        assert m_set(make_partition("powerlaw:1.5")).members == frozenset()


@pytest.mark.parametrize(
    "P, digits, verdict, rule, level",
    [
        (H, "[2 per]", "Infinity", "LevelAboveLog2", math.log(6) / 2),
        (H, "[5 per]", "Zero", "LevelBelowLog2", math.log(30) / 5),
        (H, "[1 per]", "NotExist", "BMSet", LOG2),
        (H, "[7,3,(1)]", "NotExist", "BMSet", LOG2),
        (G3, "[1 per]", "Zero", "LevelBelowLog2", math.log(1.5)),
        (G3, "[3 per]", "Infinity", "LevelAboveLog2", (3 * math.log(3) - LOG2) / 3),
    ],
)
def test_classify_periodic(P, digits, verdict, rule, level):
    v = classify_periodic(P, parse_digits(digits))
    assert (v.verdict, v.rule) == (verdict, rule)
    assert v.s_liminf == pytest.approx(level, rel=1e-13)
    assert v.evidence


@given(st.lists(st.integers(1, 12), min_size=1, max_size=4))
@settings(max_examples=60, deadline=None)
def test_verdict_consistent_with_criteria(period):
    d = LurothDigits.periodic(period)
    v = classify_periodic(H, d)
    assert v.verdict in ("Zero", "Infinity", "NotExist", "Undetermined")
    k = 200
    # compare at the same phase of the period
    phase = np.arange(k - 1, -1, -len(period))[::-1]
    if v.verdict == "Infinity":
        r = approximant_ratios(H, d, k)
        assert np.all(np.diff(r[phase]) > 0)
    elif v.verdict == "Zero":
        z = zero_criteria(H, d, k)
        assert np.all(np.diff(z[phase]) < 0) and z[-1] < 0
        assert zero_criterion(H, d, k) == z[-1]


def test_dyadic_rejected_everywhere():
    with pytest.raises(HypothesisError, match="identity"):
        classify_periodic(D, parse_digits("[2 per]"))
    with pytest.raises(HypothesisError):
        classify_oscillating(D, 1, 3)
    with pytest.raises(HypothesisError):
        classify_empirical(D, [2] * 400)


def test_oscillating_straddle():
    v = classify_oscillating(H, 5, 2)
    assert (v.verdict, v.rule) == ("NotExist", "Straddle")
    assert v.s_liminf < LOG2 < v.s_limsup
    v = classify_oscillating(G3, 1, 3)
    assert v.verdict == "NotExist"


def test_oscillating_same_side():
    with pytest.raises(HypothesisError):
        classify_oscillating(H, 5, 6)


def test_superexponential_runs_reach_block_levels():
    lo, hi = oscillation_limits(H, 5, 2, "superexponential")
    assert lo == pytest.approx(math.log(30) / 5, rel=1e-12)
    assert hi == pytest.approx(math.log(6) / 2, rel=1e-12)


def test_mixture_limits_match_running_levels():
    g = 10
    lo, hi = oscillation_limits(H, 5, 2, g)
    A5, A2 = math.log(30), math.log(6)
    assert lo == pytest.approx((g * A5 + A2) / (g * 5 + 2), rel=1e-12)
    assert hi == pytest.approx((g * A2 + A5) / (g * 2 + 5), rel=1e-12)
    n = 2_000_000
    s = running_levels(H, oscillating_digits(5, 2, g, n), n)
    tail = s[n // 100:]
    assert abs(tail.min() - lo) < 5e-3 and abs(tail.max() - hi) < 5e-3


def test_empirical_digit_two_tail():
    v = classify_empirical(H, parse_digits("[2,3,(2)]"), n_max=400, margin=0.05)
    assert v.verdict == "Infinity"


def test_empirical_lebesgue_harmonic_points_go_to_zero():
    rng = np.random.default_rng(3)
    zeros = 0
    for _ in range(50):
        d = H.index_of_array(1 - rng.random(400), cap=400)
        zeros += classify_empirical(H, d, n_max=400).verdict == "Zero"
    assert zeros >= 45
