"""Tests for schedule families, parsing, and expected-cost accounting."""

import math

import numpy as np
import pytest

from schedsam import (
    ConfigError,
    ConstantSchedule,
    LinearSchedule,
    PiecewiseSchedule,
    TrigSchedule,
    eta_of_step,
    eta_report,
    eval_schedule,
    expected_eta_closed_form,
    expected_eta_exact,
    parse_schedule,
)

# ---------------------------------------------------------------------------
# Pointwise evaluation


def test_constant_probability_everywhere():
    s = ConstantSchedule(0.6)
    for t in (0, 1, 4999, 9999):
        assert eval_schedule(s, t, 10000) == 0.6
        assert eta_of_step(s, t, 10000) == 1.6


def test_piecewise_switches_after_the_split_point():
    s = PiecewiseSchedule(a_p=0.0, b_p=0.5)
    assert eval_schedule(s, 2500, 10000) == 0.0
    assert eval_schedule(s, 5000, 10000) == 0.0  # boundary step is first-stage
    assert eval_schedule(s, 5001, 10000) == 1.0
    assert eval_schedule(s, 7500, 10000) == 1.0


def test_trig_variants_at_landmark_steps():
    T = 10000
    assert eval_schedule(TrigSchedule("cos1"), 0, T) == 1.0
    assert abs(eval_schedule(TrigSchedule("cos1"), T // 2, T) - 0.5) < 1e-12
    assert eval_schedule(TrigSchedule("cos2"), 0, T) == 0.0
    assert eval_schedule(TrigSchedule("sin1"), 0, T) == 0.0
    assert abs(eval_schedule(TrigSchedule("sin1"), T // 2, T) - 1.0) < 1e-12
    assert abs(eval_schedule(TrigSchedule("sin2"), T // 2, T) - 0.0) < 1e-12


def test_linear_midpoint_forms():
    T = 10000
    low = LinearSchedule(mid=0.3)  # through (0, 0) and (T/2, 0.3)
    assert eval_schedule(low, 0, T) == 0.0
    assert abs(eval_schedule(low, T // 2, T) - 0.3) < 1e-12
    high = LinearSchedule(mid=0.7)  # through (T/2, 0.7) and (T, 1)
    assert abs(eval_schedule(high, T // 2, T) - 0.7) < 1e-12
    assert abs(high.probability(T, T) - 1.0) < 1e-12
    exact_half = LinearSchedule(mid=0.5)
    assert abs(eval_schedule(exact_half, T // 2, T) - 0.5) < 1e-12


def test_step_index_range_is_enforced():
    s = ConstantSchedule(0.5)
    for t in (-1, 100, 101):
        with pytest.raises(ValueError):
            eval_schedule(s, t, 100)
        with pytest.raises(ValueError):
            eta_of_step(s, t, 100)


def test_probabilities_vector_matches_pointwise():
    T = 257
    for s in (
        ConstantSchedule(0.25),
        PiecewiseSchedule(1.0, 0.3),
        LinearSchedule(mid=0.8),
        TrigSchedule("sin1"),
    ):
        vec = s.probabilities(T)
        assert vec.shape == (T,)
        for t in (0, 1, 100, T - 1):
            assert abs(vec[t] - s.probability(t, T)) < 1e-15


# ---------------------------------------------------------------------------
# Parameter validation


def test_parameter_ranges_are_checked():
    with pytest.raises(ConfigError):
        ConstantSchedule(-0.1)
    with pytest.raises(ConfigError):
        ConstantSchedule(1.1)
    with pytest.raises(ConfigError):
        PiecewiseSchedule(a_p=0.5, b_p=1.5)
    with pytest.raises(ConfigError):
        LinearSchedule(mid=-0.2)
    with pytest.raises(ConfigError):
        TrigSchedule("tan1")


def test_linear_construction_forms_are_exclusive():
    with pytest.raises(ConfigError):
        LinearSchedule()
    with pytest.raises(ConfigError):
        LinearSchedule(mid=0.5, a_l=0.001, b_l=0.0)
    with pytest.raises(ConfigError):
        LinearSchedule(a_l=0.001)


def test_linear_direct_form_validated_against_horizon():
    s = LinearSchedule(a_l=0.001, b_l=0.0)
    s.validate(500)  # max p = 0.499, fine
    with pytest.raises(ConfigError):
        s.validate(2000)  # p(1999) = 1.999
    with pytest.raises(ConfigError):
        LinearSchedule(a_l=-0.001, b_l=0.5).validate(1000)
    with pytest.raises(ConfigError):
        ConstantSchedule(0.5).validate(0)


# ---------------------------------------------------------------------------
# Parsing and canonical strings


def test_parse_canonical_round_trip():
    texts = [
        "constant(a_c=0.6)",
        "constant(a_c=0)",
        "constant(a_c=1)",
        "piecewise(a_p=0,b_p=0.5)",
        "piecewise(a_p=1,b_p=0.6)",
        "linear(mid=0.3)",
        "linear(a_l=0.0001,b_l=0)",
        "trig(cos1)",
        "trig(sin2)",
    ]
    for text in texts:
        assert parse_schedule(text).canonical() == text


def test_parse_tolerates_whitespace():
    s = parse_schedule("  piecewise( a_p = 1 , b_p = 0.25 )  ")
    assert s.canonical() == "piecewise(a_p=1,b_p=0.25)"


def test_parse_rejects_malformed_input():
    for text in (
        "constant",
        "constant(a_c=0.5",
        "constant(0.5)",
        "constant(a_c=half)",
        "step(a=1)",
        "piecewise(a_p=0.5)",
        "trig(cos3)",
        "constant(a_c=2)",
    ):
        with pytest.raises(ConfigError):
            parse_schedule(text)


# ---------------------------------------------------------------------------
# Expected cost: direct summation vs analytic


def test_constant_eta_is_exact():
    for a in (0.0, 0.37, 1.0):
        s = ConstantSchedule(a)
        for T in (1, 10, 10000):
            assert abs(expected_eta_exact(s, T) - (1.0 + a)) < 1e-12
            assert expected_eta_closed_form(s, T) == 1.0 + a


def test_piecewise_eta_gap_bound():
    """The analytic 2 + 2ab - a - b treats the split as exact; summation
    differs by at most 2/T from boundary rounding."""
    T = 10000
    for a_p in (0.0, 1.0, 0.3):
        for b_p in (0.1, 0.25, 0.6, 0.9):
            s = PiecewiseSchedule(a_p, b_p)
            gap = abs(expected_eta_exact(s, T) - expected_eta_closed_form(s, T))
            assert gap <= 2.0 / T + 1e-12, f"a_p={a_p} b_p={b_p} gap={gap}"


def test_linear_eta_gap_bound():
    T = 10000
    for mid in (0.1, 0.3, 0.5, 0.6, 0.9):
        s = LinearSchedule(mid=mid)
        exact = expected_eta_exact(s, T)
        closed = expected_eta_closed_form(s, T)
        assert abs(closed - (1.0 + mid)) < 1e-12
        assert abs(exact - closed) <= 1.0 / T + 1e-12


def test_cosine_eta_is_three_halves_within_half_step():
    for T in (10, 100, 10000):
        for variant in ("cos1", "cos2"):
            exact = expected_eta_exact(TrigSchedule(variant), T)
            assert abs(exact - 1.5) <= 0.5 / T + 1e-12
            assert expected_eta_closed_form(TrigSchedule(variant), T) == 1.5


def test_sine_eta_closed_form_is_exact():
    """Sum of sin(t*pi/T) over t < T telescopes to cot(pi/(2T))."""
    for T in (7, 100, 10000):
        cot = 1.0 / math.tan(math.pi / (2.0 * T))
        s1 = expected_eta_exact(TrigSchedule("sin1"), T)
        s2 = expected_eta_exact(TrigSchedule("sin2"), T)
        assert abs(s1 - (1.0 + cot / T)) < 1e-9
        assert abs(s2 - (2.0 - cot / T)) < 1e-9
        assert abs(expected_eta_closed_form(TrigSchedule("sin1"), T) - s1) < 1e-9


def test_sine_eta_frozen_value_at_ten_thousand_steps():
    assert abs(expected_eta_exact(TrigSchedule("sin1"), 10000) - 1.63662) < 1e-5
    assert abs(expected_eta_exact(TrigSchedule("sin2"), 10000) - 1.36338) < 1e-5


def test_eta_stays_in_unit_cost_band_for_random_parameters():
    """Any valid schedule costs between 1 and 2 expected propagations."""
    rng = np.random.default_rng(0)
    T = 500
    schedules = []
    for _ in range(25):
        schedules.append(ConstantSchedule(rng.uniform()))
        schedules.append(PiecewiseSchedule(rng.uniform(), rng.uniform()))
        schedules.append(LinearSchedule(mid=rng.uniform()))
        schedules.append(TrigSchedule(["cos1", "cos2", "sin1", "sin2"][rng.integers(4)]))
    for s in schedules:
        eta = expected_eta_exact(s, T)
        assert 1.0 <= eta <= 2.0, s.canonical()
        probs = s.probabilities(T)
        assert probs.min() >= 0.0 and probs.max() <= 1.0


def test_eta_monotone_in_constant_rate():
    etas = [expected_eta_exact(ConstantSchedule(a), 100) for a in np.linspace(0, 1, 11)]
    assert all(b > a for a, b in zip(etas, etas[1:]))


def test_eta_report_fields():
    report = eta_report(TrigSchedule("sin1"), 10000)
    assert report.schedule == "trig(sin1)"
    assert report.family == "trig"
    assert report.total_steps == 10000
    assert abs(report.exact - report.closed_form) < 1e-9
