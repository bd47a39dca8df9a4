"""Model-selection metrics: RMSE indicators, decision deltas, ROC and Gini.

A selection decision compares one indicator between the correct model
version and an incorrect one over the same window of cycles.  The
confidence delta is signed so that positive favours the correct version:
evidence is better when larger, RMSE when smaller.

The decision record over a run has no true-negative cell: every window is a
trial in which the correct version should win.  Decisions with delta > 0
are the positives, delta < 0 the negatives, and the ROC curve sweeps a
confidence threshold Xi over the magnitudes,

    TPR(Xi) = #{ delta > Xi} / n_+    (proportion of positives above Xi)
    FPR(Xi) = #{-delta > Xi} / n_-    (proportion of negatives above Xi)

so it runs from (0, 0) at Xi = +inf to (1, 1) at Xi = 0; ties (delta == 0)
belong to neither class.  The Gini score is twice the area between the
curve and the diagonal, i.e. 2 AUC - 1: +1 for a perfectly separating
indicator, 0 for a coin flip, negative when the indicator is confidently
wrong more often than confidently right.  Both the curve and the score
depend on the deltas only through signs and magnitude ranks, so they are
invariant under any strictly increasing odd rescaling.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .filters import ForecastStats
from .twin import ObservationOperator


def rmse_truth(analysis_mean: np.ndarray, truth: np.ndarray) -> float:
    """Root-mean-square analysis error against the known truth."""
    analysis_mean = np.asarray(analysis_mean, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if analysis_mean.shape != truth.shape:
        raise ValueError("analysis and truth must have matching shapes")
    return float(np.sqrt(np.mean((analysis_mean - truth) ** 2)))


def rmse_forecast(stats: ForecastStats, y, operator: ObservationOperator) -> float:
    """Root-mean-square forecast-minus-observation distance in observation space."""
    yv = np.asarray(getattr(y, "values", y), dtype=float)
    return float(np.sqrt(np.mean((operator.apply(stats.mean) - yv) ** 2)))


def confidence_delta(correct_value, incorrect_value, kind: str):
    """Signed decision delta; positive favours the correct model version.

    ``kind="rmse"``: delta = incorrect - correct (smaller error is better).
    ``kind="evidence"``: delta = correct - incorrect (larger log evidence
    is better).
    """
    correct_value = np.asarray(correct_value, dtype=float)
    incorrect_value = np.asarray(incorrect_value, dtype=float)
    if kind == "rmse":
        return incorrect_value - correct_value
    if kind == "evidence":
        return correct_value - incorrect_value
    raise ValueError(f"unknown indicator kind {kind!r}")


def selection_probability(deltas: np.ndarray) -> float:
    """2 R - 1, with R the win rate of the correct version and ties counted half.

    Ranges over [-1, 1]: 1 when every decision picks the correct version,
    0 for coin-flip behaviour.
    """
    deltas = np.asarray(deltas, dtype=float)
    if deltas.size == 0:
        raise ValueError("no decisions")
    wins = np.count_nonzero(deltas > 0.0)
    ties = np.count_nonzero(deltas == 0.0)
    r = (wins + 0.5 * ties) / deltas.size
    return 2.0 * r - 1.0


@dataclass(frozen=True)
class RocCurve:
    """ROC points swept over confidence thresholds, threshold descending.

    ``thresholds[0]`` is +inf so the curve starts at (0, 0); the last
    threshold is 0, where the curve reaches (1, 1).  A run with no
    negative (or no positive) decisions pins FPR (or TPR) to 0 instead.
    """

    thresholds: np.ndarray
    fpr: np.ndarray
    tpr: np.ndarray

    def __post_init__(self) -> None:
        if not (self.thresholds.shape == self.fpr.shape == self.tpr.shape):
            raise ValueError("thresholds, fpr, tpr must have matching shapes")


def roc_curve(deltas: np.ndarray) -> RocCurve:
    """ROC of the decision deltas; see the module docstring for conventions.

    The threshold grid is every distinct |delta| plus 0 and +inf.  TPR and
    FPR are step functions whose jumps all sit at those values, so this
    grid captures every distinct point of the curve.
    """
    deltas = np.asarray(deltas, dtype=float)
    if deltas.size == 0:
        raise ValueError("no decisions")
    pos = np.sort(deltas[deltas > 0.0])
    neg = np.sort(-deltas[deltas < 0.0])
    grid = np.unique(np.abs(deltas))
    if grid.size == 0 or grid[0] != 0.0:
        grid = np.concatenate(([0.0], grid))
    thresholds = np.concatenate(([np.inf], grid[::-1]))
    # strict inequality: #{v > Xi} via right-side search in the sorted values
    tpr = (pos.size - np.searchsorted(pos, thresholds, side="right")) / max(pos.size, 1)
    fpr = (neg.size - np.searchsorted(neg, thresholds, side="right")) / max(neg.size, 1)
    return RocCurve(thresholds=thresholds, fpr=fpr, tpr=tpr)


def gini_score(roc: RocCurve) -> float:
    """Twice the area between the ROC curve and the diagonal, 2 AUC - 1.

    The curve is monotone in FPR, so the area under it is a trapezoid sum;
    tie-induced diagonal steps contribute their half weight, matching the
    Mann-Whitney statistic on the delta magnitudes.  One-sided records
    short-circuit: no negatives means the indicator was never confidently
    wrong (score 1), no positives the mirror image (-1), neither at all 0.
    """
    x = roc.fpr
    y = roc.tpr
    if np.any(np.diff(x) < 0.0):
        raise ValueError("ROC curve must be nondecreasing in FPR")
    if x[-1] == 0.0 or y[-1] == 0.0:
        if x[-1] == y[-1]:
            return 0.0
        return 1.0 if x[-1] == 0.0 else -1.0
    area = float(np.trapezoid(y, x))
    return 2.0 * area - 1.0
