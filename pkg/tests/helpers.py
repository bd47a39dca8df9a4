"""Shared test utilities: independent oracles and random instance builders.

The oracles here are written from first principles (dense linear algebra,
textbook formulas) and never call the production code paths they certify.
"""

from __future__ import annotations

import subprocess
import sys

import numpy as np

from enkf_evidence.filters import ForecastStats, forecast_stats
from enkf_evidence.twin import DiagonalCovariance, ObservationOperator


def dense_kalman_update(mean, cov, y, H, variances):
    """Textbook Kalman update of (mean, cov), Joseph-form covariance.

    H is a dense (d, M) matrix, the observation covariance diag(variances).
    """
    mean = np.asarray(mean, float)
    cov = np.asarray(cov, float)
    H = np.asarray(H, float)
    R = np.diag(np.asarray(variances, float))
    innov_cov = H @ cov @ H.T + R
    gain = cov @ H.T @ np.linalg.inv(innov_cov)
    mean_a = mean + gain @ (np.asarray(y, float) - H @ mean)
    A = np.eye(cov.shape[0]) - gain @ H
    cov_a = A @ cov @ A.T + gain @ R @ gain.T
    return mean_a, cov_a


def gauss_logpdf(sigma, delta):
    """Dense Gaussian log density at delta, zero mean, covariance sigma."""
    sigma = np.asarray(sigma, float)
    delta = np.asarray(delta, float)
    sign, logdet = np.linalg.slogdet(sigma)
    assert sign > 0, "oracle covariance must be positive definite"
    quad = delta @ np.linalg.solve(sigma, delta)
    return -0.5 * (delta.size * np.log(2.0 * np.pi) + logdet + quad)


def random_members(rng, m, n, spread=1.0):
    """Random ensemble with a well-spread mean, shape (m, n)."""
    return 3.0 * rng.standard_normal((m, 1)) + spread * rng.standard_normal((m, n))


def random_instance(rng, m=None, n=None, d=None, inflation=1.0):
    """Random (stats, y, operator, noise) tuple for filter/evidence tests."""
    m = m if m is not None else int(rng.integers(2, 9))
    n = n if n is not None else int(rng.integers(2, 9))
    d = d if d is not None else int(rng.integers(1, m + 1))
    members = random_members(rng, m, n)
    stats = forecast_stats(members, inflation)
    if d == m:
        idx = np.arange(m)
    else:
        idx = np.sort(rng.choice(m, size=d, replace=False))
    operator = ObservationOperator(idx, m)
    noise = DiagonalCovariance(rng.uniform(0.3, 2.0, size=d))
    y = operator.apply(stats.mean) + rng.standard_normal(d)
    return stats, y, operator, noise


def ensemble_moments(members):
    """Sample mean and covariance (1/(N-1) normalization) of an ensemble."""
    members = np.asarray(members, float)
    mean = members.mean(axis=1)
    A = members - mean[:, None]
    return mean, A @ A.T / (members.shape[1] - 1)


def stats_from_anomalies(mean, X):
    """ForecastStats with the normalized anomalies given directly."""
    return ForecastStats(mean=np.asarray(mean, float), normalized_anomalies=np.asarray(X, float))


def run_cli(args, timeout=3600):
    """Run the package CLI in a subprocess; returns CompletedProcess."""
    return subprocess.run(
        [sys.executable, "-m", "enkf_evidence", *[str(a) for a in args]],
        capture_output=True,
        text=True,
        timeout=timeout,
    )
