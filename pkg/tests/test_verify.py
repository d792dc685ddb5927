import math

import numpy as np
import pytest

from subsetflow import verify as V
from subsetflow.flow import FlowParams
from subsetflow.subset_space import separation


@pytest.fixture(scope="module")
def small_suite():
    return V.run_suite(V.SampleSpec(n=3, d=2, trials=60, seed=7))


def test_report_flag_recomputable():
    r = V.CheckReport("x", observed=1.005, bound=1.0, tolerance=1e-2, trials_run=1)
    assert r.passed
    assert not V.CheckReport("x", 1.02, 1.0, 1e-2, 1).passed
    assert not V.CheckReport("x", math.nan, 1.0, 0.0, 1).passed
    assert not V.CheckReport("x", math.inf, 1.0, 0.0, 1).passed


def test_sample_spec_validation():
    with pytest.raises(ValueError):
        V.SampleSpec(n=1)
    with pytest.raises(ValueError):
        V.SampleSpec(trials=0)
    with pytest.raises(ValueError):
        V.SampleSpec(scale=0.0)


def test_trial_streams_are_independent_of_trial_count():
    a = list(V._rngs(V.SampleSpec(trials=3, seed=5), "lipschitz"))
    b = list(V._rngs(V.SampleSpec(trials=10, seed=5), "lipschitz"))
    for ra, rb in zip(a, b):
        assert ra.uniform() == rb.uniform()


@pytest.mark.parametrize("regime", [0, 1, 2])
def test_draw_pair_regimes(regime):
    rng = V.trial_rng(1, 99, regime)
    for _ in range(20):
        x, y = V.draw_pair(rng, 4, 2, 1.0, regime)
        assert x.shape == y.shape == (4, 2)
        assert separation(x) > 0 and separation(y) > 0


def test_gradient_error_examples():
    assert V.gradient_error([[0.0], [1.0]]) < 1e-9
    assert V.gradient_error([[0.0], [1.0], [2.0]]) < 1e-9


def test_check_gradient():
    r = V.check_gradient(V.SampleSpec(n=4, d=3, trials=20, seed=1))
    assert r.passed and r.observed < 1e-6


def test_monotone_map_examples():
    a, b = np.array([1.0, 0.0]), np.array([0.0, 1.0])
    assert np.dot(V.unit(a) - V.unit(a), a - a) == 0
    assert np.dot(V.unit(a) - V.unit(b), a - b) == pytest.approx(2.0)
    assert np.dot(V.unit(a) - V.unit(-a), 2 * a) == pytest.approx(4.0)
    r = V.check_monotone_map(V.SampleSpec(n=2, d=3, trials=500, seed=2))
    assert r.passed


def test_convexity_check():
    assert V.check_convexity(V.SampleSpec(n=5, d=3, trials=300, seed=3)).passed


def test_contraction_identical_pair():
    x = np.array([[0.0, 0.0], [1.0, 0.2], [0.3, 1.0]])
    r = V.check_contraction(x, x)
    assert r.observed == 0.0 and r.passed


def test_contraction_translated_pair():
    rng = np.random.default_rng(4)
    x = rng.uniform(-1, 1, (3, 2))
    y = x + np.array([0.7, -0.2])
    inc, stab = V.synchronized_flow_stats(x, y)
    assert inc[0] < 1e-12
    assert stab[0] <= 1 / math.sqrt(3) * (1 + 1e-9)


def test_contraction_random_pairs():
    X, Y = V.sample_flow_pairs(V.SampleSpec(n=3, d=2, trials=30, seed=5))
    assert V.check_contraction(X, Y).passed
    assert V.check_stability_H(X, Y).passed


def test_stability_identical_and_translated():
    x = np.array([[0.0, 0.0], [3.0, 0.0]])
    assert V.check_stability_H(x, x).observed == 0.0
    rho = 0.4
    r = V.check_stability_H(x, x + [rho, 0.0])
    # d_H stays at rho, bound is sqrt(2) rho
    assert r.observed == pytest.approx(1 / math.sqrt(2), rel=1e-12)


def test_contraction_shape_mismatch():
    with pytest.raises(ValueError):
        V.check_contraction(np.zeros((3, 2)), np.zeros((2, 2)))


def test_lipschitz_midpoint_map_is_1_lipschitz():
    r = V.check_lipschitz(V.SampleSpec(n=2, d=2, trials=300, seed=6))
    assert r.passed
    assert r.observed <= 1.0 + 1e-6


def test_lipschitz_stratification():
    r = V.check_lipschitz(V.SampleSpec(n=3, d=2, trials=300, seed=8))
    total = r.witness["case1_trials"] + r.witness["case2_trials"]
    assert total == r.trials_run
    assert r.witness["case1_trials"] >= 0.1 * total
    assert r.witness["case2_trials"] >= 0.1 * total


def test_case2_identical_pair():
    x = np.array([[0.0, 0.0], [2.0, 0.1], [0.5, 1.4]])
    r = V.check_case2_certificate(x, x)
    assert r.passed and r.observed == 0.0
    assert r.witness["case1_instances"] == 0


def test_case2_midpoint_example():
    x = np.array([[0.0], [10.0]])
    y = np.array([[0.5], [9.5]])
    ratios = V.case2_ratios(x, y)[0]
    # y collides first; z is x's flow at t = 4.5 = {4.5, 5.5}, r(y) = {5} = r(x)
    assert ratios[0] == pytest.approx(1 / math.sqrt(2), rel=1e-6)
    assert ratios[3] == 0.0
    assert V.check_case2_certificate(x, y).passed


def test_case2_reports_case1_instances():
    x = np.array([[0.0], [1.0]])
    y = np.array([[0.6], [1.6]])
    assert np.isnan(V.case2_ratios(x, y)).all()
    r = V.check_case2_certificate(x, y)
    assert r.passed and r.witness["case1_instances"] == 1


def test_case2_random_pairs():
    for n in (3, 4, 5):
        X, Y = V.sample_case2_pairs(V.SampleSpec(n=n, d=2, trials=15, seed=n))
        assert V.check_case2_certificate(X, Y).passed


def test_counterexample():
    r = V.check_counterexample(0.01)
    assert r.passed
    assert r.witness["distance_error"] <= 1e-12
    assert min(r.witness["candidates_per_side"]) >= 1
    assert r.observed <= 0.05
    base = sorted(map(tuple, r.witness["forced_images"][0]))
    assert base == [(0.0, 0.0), (1.0, 0.0)]


def test_counterexample_slack_controls_radius():
    # a relaxation s admits sets up to about sqrt(2 s) from the exact image
    loose = V.check_counterexample(0.01, slack=0.01)
    assert loose.observed == pytest.approx(math.sqrt(2 * 0.01 + 0.01 ** 2), abs=0.01)
    assert not loose.passed


def test_counterexample_rejects_coarse_grid():
    with pytest.raises(ValueError):
        V.check_counterexample(0.1)


def test_flow_invariant_checks():
    spec = V.SampleSpec(n=4, d=2, trials=25, seed=9)
    for check in (V.check_collision_bracket, V.check_displacement, V.check_enumeration_invariance,
                  V.check_identity_lower):
        assert check(spec).passed, check.__name__
    assert V.check_closest_pair_slope(V.SampleSpec(n=4, d=2, trials=5, seed=9)).passed


def test_subset_space_checks():
    spec = V.SampleSpec(n=4, d=3, trials=200, seed=10)
    for check in (V.check_hausdorff_triangle, V.check_separation_lipschitz, V.check_canonicalize_idempotent,
                  V.check_gradient_bound, V.check_speed_bound):
        assert check(spec).passed, check.__name__


def test_run_suite_passes(small_suite):
    names = [r.name for r in small_suite]
    assert len(names) == len(set(names))
    failed = [r.name for r in small_suite if not r.passed]
    assert not failed


def test_run_suite_deterministic(small_suite):
    again = V.run_suite(V.SampleSpec(n=3, d=2, trials=60, seed=7))
    assert [r.to_dict() for r in again] == [r.to_dict() for r in small_suite]


def test_run_suite_other_seed_still_passes(small_suite):
    other = V.run_suite(V.SampleSpec(n=3, d=2, trials=60, seed=8))
    assert [r.passed for r in other] == [r.passed for r in small_suite]
    assert [r.to_dict()["witness"] for r in other] != [r.to_dict()["witness"] for r in small_suite]


def test_custom_flow_params_propagate():
    reports = V.run_suite(V.SampleSpec(n=2, d=1, trials=20, seed=1), FlowParams(step_safety=0.3))
    assert all(r.passed for r in reports)
