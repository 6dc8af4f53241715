import logging

import numpy as np
import pytest

from surrogate.estimators.nonparametric import (check_overlap, estimate_nonparametric, estimate_nonparametric_full,
                                                nw_conditional_mean, nw_conditional_means, select_bandwidth)
from surrogate.exceptions import UndefinedPTEError, ValidationError, ZeroSpreadError
from surrogate.models.kernel import KernelKind, KernelSpec
from surrogate.models.trial import TrialData
from surrogate.models.weights import WeightSet
from surrogate.simulation.generate import generate_trial
from surrogate.simulation.settings import get_setting

from .oracles import random_trial

EPANECHNIKOV_1 = KernelSpec(kind=KernelKind.epanechnikov, bandwidth=1.0)


def test_bandwidth_scales_with_data():
    s = np.array([4.2, 5.1, 5.9, 6.3, 7.7, 5.5, 4.9, 6.8])
    assert select_bandwidth(3.0 * s) == pytest.approx(3.0 * select_bandwidth(s), rel=1e-12)


def test_bandwidth_with_two_distinct_values():
    h = select_bandwidth([1.0, 2.0])
    assert np.isfinite(h) and h > 0


def test_bandwidth_needs_spread():
    with pytest.raises(ZeroSpreadError):
        select_bandwidth([3.0, 3.0, 3.0])


def test_bandwidth_rate():
    rng = np.random.default_rng(0)
    s = rng.normal(size=1000)
    sd = np.std(s, ddof=1)
    iqr = np.subtract(*np.percentile(s, [75, 25]))
    assert select_bandwidth(s) == pytest.approx(0.9 * min(sd, iqr / 1.34) * 1000 ** -0.3)


def test_bandwidth_falls_back_to_sd_when_iqr_vanishes():
    s = np.array([1.0] * 8 + [2.0, 3.0])
    assert np.subtract(*np.percentile(s, [75, 25])) == 0.0
    assert select_bandwidth(s) == pytest.approx(0.9 * np.std(s, ddof=1) * 10 ** -0.3)


def test_single_support_point():
    assert nw_conditional_mean(2.8, [3.0], [7.0], [1.0], EPANECHNIKOV_1) == (7.0, False)


def test_symmetric_neighbours_average():
    value, extrapolated = nw_conditional_mean(2.0, [1.5, 2.5], [4.0, 10.0], [1.0, 1.0], EPANECHNIKOV_1)
    assert value == pytest.approx(7.0)
    assert not extrapolated


def test_hand_evaluated_epanechnikov():
    value, _ = nw_conditional_mean(0.0, [0.0, 0.5, 2.0], [1.0, 2.0, 9.0], [1.0, 1.0, 1.0], EPANECHNIKOV_1)
    assert value == pytest.approx((0.75 * 1 + 0.5625 * 2) / (0.75 + 0.5625))
    assert value == pytest.approx(1.428571, abs=1e-6)


def test_weights_enter_the_smoother():
    value, _ = nw_conditional_mean(2.0, [1.5, 2.5], [4.0, 10.0], [3.0, 1.0], EPANECHNIKOV_1)
    assert value == pytest.approx((3 * 4.0 + 10.0) / 4)


def test_triweight_kernel():
    kernel = KernelSpec(kind=KernelKind.triweight, bandwidth=2.0)
    assert kernel.weights(np.array([0.0]))[0] == pytest.approx(35 / 32 / 2)
    assert kernel.weights(np.array([2.0]))[0] == 0.0


def test_outside_kernel_reach_falls_back_to_nearest_neighbour():
    estimates, extrapolated = nw_conditional_means([10.0, 0.0], [-5.0, 5.0, 9.0], [1.0, 3.0, 8.0], [1, 1, 1],
                                                   EPANECHNIKOV_1)
    assert estimates[0] == pytest.approx(8.0)
    assert estimates[1] == pytest.approx(2.0)
    assert extrapolated.tolist() == [True, True]


def test_empty_support():
    with pytest.raises(ValidationError):
        nw_conditional_mean(0.0, [], [], [], EPANECHNIKOV_1)


def test_bandwidth_must_be_positive():
    with pytest.raises(ValidationError):
        KernelSpec(bandwidth=0.0)


def test_overlap_identical_arms():
    data = TrialData.from_arrays(y=[1.0, 2.0, 3.0, 4.0], s=[1.0, 2.0, 1.0, 2.0], z=[0, 0, 1, 1])
    report = check_overlap(data)
    assert report.ok and report.n_outside == 0


def test_overlap_containment():
    data = TrialData.from_arrays(y=[1.0] * 5, s=[2.0, 3.0, 1.0, 5.0, 2.5], z=[0, 0, 1, 1, 1])
    assert check_overlap(data).ok


def test_concentrated_treated_surrogates_break_overlap():
    trial = generate_trial(get_setting(5), seed=5)
    report = check_overlap(trial.full)
    assert not report.ok
    assert report.n_outside > 0


def test_matches_literal_double_sum():
    s = np.array([4.1, 5.3, 4.8, 5.9, 5.0, 5.2, 6.4, 4.7, 6.0, 5.5])
    z = np.array([0, 0, 0, 0, 0, 1, 1, 1, 1, 1])
    y = np.array([22.0, 29.1, 26.3, 31.5, 27.4, 36.2, 44.9, 33.8, 41.0, 39.2])
    data = TrialData.from_arrays(y=y, s=s, z=z)
    kernel = KernelSpec(kind=KernelKind.epanechnikov, bandwidth=1.5)

    inner = []
    for s0 in s[z == 0]:
        numerator = denominator = 0.0
        for s1, y1 in zip(s[z == 1], y[z == 1]):
            u = (s1 - s0) / 1.5
            k = 0.75 * (1 - u * u) / 1.5 if abs(u) < 1 else 0.0
            numerator += k * y1
            denominator += k
        inner.append(numerator / denominator)
    delta = y[z == 1].mean() - y[z == 0].mean()
    delta_s = np.mean(inner) - y[z == 0].mean()

    result = estimate_nonparametric(data, kernel=kernel)
    assert result.delta == pytest.approx(delta, abs=1e-12)
    assert result.delta_s == pytest.approx(delta_s, abs=1e-12)
    assert result.r_s == pytest.approx(1 - delta_s / delta, abs=1e-12)


def test_interpolating_relation_gives_surrogate_means():
    s1 = np.arange(10.0)
    s0 = np.array([2.0, 3.0, 5.0])
    y0 = np.array([1.0, 1.5, 0.5])
    data = TrialData.from_arrays(y=np.concatenate([y0, s1]), s=np.concatenate([s0, s1]), z=[0] * 3 + [1] * 10)

    result = estimate_nonparametric(data, kernel=KernelSpec(bandwidth=0.5))
    assert result.delta_s == pytest.approx(s0.mean() - y0.mean())


def test_unit_weights_reproduce_complete_case(setting1_trial):
    masked = setting1_trial.masked
    cc = estimate_nonparametric(masked)
    ipw = estimate_nonparametric(masked, WeightSet.unit(masked.observed))
    assert ipw == cc


def test_delta_uses_every_outcome(small_trial):
    result = estimate_nonparametric(small_trial)
    y, z = small_trial.y, small_trial.z
    assert result.delta == pytest.approx(y[z == 1].mean() - y[z == 0].mean())


def test_zero_effect_is_undefined():
    data = TrialData.from_arrays(
        y=[1.0, 2.0, 3.0, 1.0, 2.0, 3.0],
        s=[1.0, 2.0, 3.0, 1.5, 2.5, 3.5],
        z=[0, 0, 0, 1, 1, 1],
    )
    with pytest.raises(UndefinedPTEError):
        estimate_nonparametric(data)


def test_full_result_reports_extrapolation():
    trial = generate_trial(get_setting(5, n=400), seed=8)
    result = estimate_nonparametric_full(trial.full)
    assert not result.overlap.ok
    assert result.n_extrapolated > 0
    assert result.kernel.bandwidth == pytest.approx(select_bandwidth(trial.full.s[trial.full.z == 1]))


def test_non_overlap_is_logged_at_debug_only(caplog):
    trial = generate_trial(get_setting(5, n=400), seed=8)
    with caplog.at_level(logging.DEBUG, logger="surrogate"):
        result = estimate_nonparametric_full(trial.full)

    assert not result.overlap.ok
    notices = [r for r in caplog.records if "outside the treated range" in r.getMessage()]
    assert [r.levelno for r in notices] == [logging.DEBUG]


@pytest.mark.parametrize("seed", range(50))
def test_random_weighted_trials_match_literal_double_sum(seed):
    rng = np.random.default_rng(seed)
    data = random_trial(rng)
    w = np.where(data.observed, rng.uniform(0.5, 3.0, len(data)), 0.0)
    observed_s = data.s[data.observed]
    h = 2.0 * (observed_s.max() - observed_s.min()) + 0.1

    numerator = denominator = 0.0
    for i in data.observed_in_arm(0):
        inner_numerator = inner_denominator = 0.0
        for j in data.observed_in_arm(1):
            u = (data.s[j] - data.s[i]) / h
            k = 0.75 * (1 - u * u) / h if abs(u) < 1 else 0.0
            inner_numerator += w[j] * k * data.y[j]
            inner_denominator += w[j] * k
        numerator += w[i] * inner_numerator / inner_denominator
        denominator += w[i]
    y0_mean = data.y[data.z == 0].mean()
    delta = data.y[data.z == 1].mean() - y0_mean
    delta_s = numerator / denominator - y0_mean

    weights = WeightSet(probs=np.ones(len(data)), weights=w)
    result = estimate_nonparametric(data, weights, KernelSpec(kind=KernelKind.epanechnikov, bandwidth=h))
    assert result.delta == pytest.approx(delta, abs=1e-12)
    assert result.delta_s == pytest.approx(delta_s, abs=1e-12)


@pytest.mark.parametrize("seed", range(10))
def test_r_s_ignores_outcome_location_and_scale(seed):
    data = random_trial(np.random.default_rng(seed))
    base = estimate_nonparametric(data)

    moved = estimate_nonparametric(TrialData.from_arrays(y=40.0 - 3.0 * data.y, s=data.s, z=data.z))
    assert moved.delta == pytest.approx(-3.0 * base.delta, rel=1e-10)
    assert moved.r_s == pytest.approx(base.r_s, abs=1e-9)
