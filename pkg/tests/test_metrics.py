"""Selection metrics: RMSE indicators, deltas, ROC construction, Gini."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import helpers
from enkf_evidence.metrics import (
    RocCurve,
    confidence_delta,
    gini_score,
    rmse_forecast,
    rmse_truth,
    roc_curve,
    selection_probability,
)
from enkf_evidence.twin import ObservationBatch, ObservationOperator


# -- RMSE indicators --------------------------------------------------------


def test_rmse_truth_hand_cases():
    np.testing.assert_allclose(rmse_truth([1.0, 2.0], [0.0, -1.0]), np.sqrt(5.0), rtol=1e-15)
    np.testing.assert_allclose(rmse_truth([3.0, 4.0], [0.0, 0.0]), np.sqrt(12.5), rtol=1e-15)
    assert rmse_truth([1.0, 1.0], [1.0, 1.0]) == 0.0
    with pytest.raises(ValueError):
        rmse_truth([1.0, 2.0], [1.0])


def test_rmse_forecast_hand_case():
    stats = helpers.stats_from_anomalies([1.0, 2.0, 3.0], np.zeros((3, 4)))
    operator = ObservationOperator(np.array([0, 2]), 3)
    got = rmse_forecast(stats, [0.0, 5.0], operator)
    np.testing.assert_allclose(got, np.sqrt(2.5), rtol=1e-15)
    batch = ObservationBatch(time_index=7, values=np.array([0.0, 5.0]))
    assert rmse_forecast(stats, batch, operator) == got


# -- decision deltas --------------------------------------------------------


def test_confidence_delta_signs():
    # Smaller RMSE favours the correct version, larger evidence does too.
    assert confidence_delta(0.3, 0.5, "rmse") == pytest.approx(0.2)
    assert confidence_delta(0.5, 0.3, "rmse") == pytest.approx(-0.2)
    assert confidence_delta(-100.0, -110.0, "evidence") == pytest.approx(10.0)
    assert confidence_delta(-110.0, -100.0, "evidence") == pytest.approx(-10.0)
    np.testing.assert_allclose(
        confidence_delta(np.array([1.0, 2.0]), np.array([3.0, 1.0]), "rmse"), [2.0, -1.0]
    )
    with pytest.raises(ValueError):
        confidence_delta(1.0, 2.0, "likelihood")


def test_selection_probability_hand_cases():
    assert selection_probability(np.ones(7)) == 1.0
    assert selection_probability(-np.ones(7)) == -1.0
    deltas = np.array([1.0, 2.0, 3.0, 4.0, 5.0, -1.0, -2.0, -3.0])
    assert selection_probability(deltas) == pytest.approx(0.25)
    assert selection_probability(np.array([1.0, -1.0, 0.0, 0.0])) == 0.0
    with pytest.raises(ValueError):
        selection_probability(np.array([]))


def test_selection_probability_coin_flip():
    rng = np.random.default_rng(61)
    deltas = rng.standard_normal(50_000)
    assert abs(selection_probability(deltas)) < 0.02


# -- ROC curve --------------------------------------------------------------


def test_roc_perfect_classifier():
    roc = roc_curve(np.array([2.0, 1.0, 0.5]))
    np.testing.assert_array_equal(roc.thresholds, [np.inf, 2.0, 1.0, 0.5, 0.0])
    np.testing.assert_array_equal(roc.fpr, np.zeros(5))
    np.testing.assert_array_equal(roc.tpr, [0.0, 0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0])
    assert gini_score(roc) == 1.0


def test_roc_symmetric_staircase():
    roc = roc_curve(np.array([2.0, 1.0, -1.0, -2.0]))
    np.testing.assert_array_equal(roc.thresholds, [np.inf, 2.0, 1.0, 0.0])
    np.testing.assert_array_equal(roc.tpr, [0.0, 0.0, 0.5, 1.0])
    np.testing.assert_array_equal(roc.fpr, [0.0, 0.0, 0.5, 1.0])
    assert gini_score(roc) == 0.0


def test_roc_asymmetric_hand_case():
    # Points (0,0), (0,0), (.5,.5), (1,.5), (1,1): area 0.375, Gini -0.25.
    roc = roc_curve(np.array([1.0, 3.0, -2.0, -3.0]))
    np.testing.assert_array_equal(roc.tpr, [0.0, 0.0, 0.5, 0.5, 1.0])
    np.testing.assert_array_equal(roc.fpr, [0.0, 0.0, 0.5, 1.0, 1.0])
    assert gini_score(roc) == pytest.approx(-0.25)


def test_roc_degenerate_records():
    assert gini_score(roc_curve(-np.ones(4))) == -1.0
    assert gini_score(roc_curve(np.zeros(4))) == 0.0
    # Ties belong to neither class: a zero cannot spoil a perfect record.
    assert gini_score(roc_curve(np.array([0.0, 1.0]))) == 1.0
    with pytest.raises(ValueError):
        roc_curve(np.array([]))


def test_roc_endpoints_and_monotonicity():
    rng = np.random.default_rng(62)
    for _ in range(25):
        deltas = rng.standard_normal(rng.integers(1, 40))
        roc = roc_curve(deltas)
        assert roc.fpr[0] == 0.0 and roc.tpr[0] == 0.0
        assert np.all(np.diff(roc.thresholds) < 0.0)
        assert np.all(np.diff(roc.tpr) >= 0.0) and np.all(np.diff(roc.fpr) >= 0.0)
        assert np.all((roc.tpr >= 0.0) & (roc.tpr <= 1.0))
        assert np.all((roc.fpr >= 0.0) & (roc.fpr <= 1.0))
        assert -1.0 <= gini_score(roc) <= 1.0


def test_gini_matches_mann_whitney():
    # 2 AUC - 1 with ties at half weight equals the rank statistic on the
    # magnitudes; integer magnitudes force plenty of exact ties.
    rng = np.random.default_rng(63)
    for _ in range(200):
        deltas = rng.integers(-6, 7, size=rng.integers(2, 60)).astype(float)
        pos = deltas[deltas > 0.0]
        neg = -deltas[deltas < 0.0]
        if pos.size == 0 or neg.size == 0:
            continue
        gt = np.sum(pos[:, None] > neg[None, :])
        eq = np.sum(pos[:, None] == neg[None, :])
        auc = (gt + 0.5 * eq) / (pos.size * neg.size)
        np.testing.assert_allclose(gini_score(roc_curve(deltas)), 2.0 * auc - 1.0, atol=1e-12)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(min_value=-10, max_value=10), min_size=1, max_size=40))
def test_gini_invariant_under_monotone_odd_rescaling(ints):
    deltas = np.array(ints, dtype=float) / 4.0
    # x + x^3 on the quarter-integer lattice is exact in binary and
    # strictly increasing, so ranks and signs are untouched.
    rescaled = deltas + deltas**3
    base = roc_curve(deltas)
    other = roc_curve(rescaled)
    np.testing.assert_array_equal(base.tpr, other.tpr)
    np.testing.assert_array_equal(base.fpr, other.fpr)
    assert gini_score(base) == gini_score(other)


def test_gini_rejects_unsorted_curve():
    bad = RocCurve(
        thresholds=np.array([np.inf, 1.0, 0.0]),
        fpr=np.array([0.0, 0.6, 0.4]),
        tpr=np.array([0.0, 0.5, 1.0]),
    )
    with pytest.raises(ValueError):
        gini_score(bad)
    with pytest.raises(ValueError):
        RocCurve(thresholds=np.array([np.inf, 0.0]), fpr=np.zeros(2), tpr=np.zeros(3))
