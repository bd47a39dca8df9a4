"""Ensemble transform Kalman filters: global (ETKF) and localized (LETKF).

Conventions
-----------
An ensemble is an (M, N) array with members as columns.  Forecast statistics
are kept as the mean plus *normalized* anomalies X with the inflation factor
and the 1/sqrt(N-1) normalization already absorbed, so the implied forecast
covariance is simply  P = X X^T.

All analysis algebra happens in the N-dimensional ensemble space.  With
S = H X and a diagonal observation precision rho (entries 1/r_j, possibly
tapered by localization), the posterior ensemble-space covariance is

    Pt = (I_N + S^T diag(rho) S)^{-1}

and the update is

    mean_a = mean + X Pt S^T diag(rho) (y - H mean)
    X_a    = X Pt^{1/2}          (unique symmetric PSD square root)
    E_a    = mean_a 1^T + sqrt(N-1) X_a

The symmetric square root keeps anomaly sums at zero, so the analysis
ensemble mean is exactly ``mean_a``.

The LETKF solves this same problem independently at every gridpoint, using
only observations within a cut radius and with precisions tapered by
distance; gridpoint s keeps row s of its local analysis.  On a fully
observed ring every gridpoint sees the same-size local window, and the M
small problems are solved in one stacked (vectorized) call; a generic
per-gridpoint loop covers arbitrary observation networks and serves as the
reference implementation.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .localization import LocalizationSpec, local_precision, ring_geometry, select_local_obs
from .twin import DiagonalCovariance, ObservationOperator

# Ensemble-space Hessian eigenvalues are clamped at this fraction of the
# largest one before inversion, and the analysis aborts beyond this
# condition number: by then the ensemble has collapsed or blown up.
EIG_CLAMP = 1e-14
COND_LIMIT = 1e12


class FilterDivergence(RuntimeError):
    """The assimilation has broken down (non-finite or singular statistics)."""


@dataclass(frozen=True)
class InflationSpec:
    """Multiplicative prior inflation applied to forecast anomalies."""

    factor: float = 1.0

    def __post_init__(self) -> None:
        if not self.factor >= 1.0:
            raise ValueError(f"inflation factor must be >= 1, got {self.factor}")


@dataclass(frozen=True)
class ForecastStats:
    """Forecast mean and normalized anomalies; implied covariance is X X^T."""

    mean: np.ndarray                 # (M,)
    normalized_anomalies: np.ndarray  # (M, N)

    @property
    def n_members(self) -> int:
        return int(self.normalized_anomalies.shape[1])

    def covariance(self) -> np.ndarray:
        """Dense implied forecast covariance (for oracles and small problems)."""
        X = self.normalized_anomalies
        return X @ X.T


def forecast_stats(members: np.ndarray, inflation: InflationSpec | float = 1.0) -> ForecastStats:
    """Statistics of a forecast ensemble, with inflation folded in.

    Inflation multiplies the anomalies, so the implied covariance (and its
    trace) is multiplied by the factor squared.  Raises
    :class:`FilterDivergence` on non-finite members.
    """
    members = np.asarray(members, dtype=float)
    if members.ndim != 2 or members.shape[1] < 2:
        raise ValueError("ensemble must be (M, N) with at least 2 members")
    if not np.all(np.isfinite(members)):
        raise FilterDivergence("non-finite ensemble members")
    factor = getattr(inflation, "factor", inflation)
    if not factor >= 1.0:
        raise ValueError(f"inflation factor must be >= 1, got {factor}")
    mean = members.mean(axis=1)
    n = members.shape[1]
    X = (members - mean[:, None]) * (factor / np.sqrt(n - 1.0))
    return ForecastStats(mean=mean, normalized_anomalies=X)


def _obs_values(y) -> np.ndarray:
    return np.asarray(getattr(y, "values", y), dtype=float)


def _ensemble_transform(S: np.ndarray, prec: np.ndarray, delta: np.ndarray):
    """Solve the ensemble-space analysis, possibly for a stack of problems.

    Parameters are stacked along leading axes: S is (..., d, N), prec and
    delta are (..., d).  Returns ``(w, sqrt_pt)`` with w (..., N) the mean
    update weights and sqrt_pt (..., N, N) the symmetric square root of the
    posterior ensemble-space covariance.
    """
    St = np.swapaxes(S, -1, -2)                       # (..., N, d)
    C = St @ (S * prec[..., None])
    C = 0.5 * (C + np.swapaxes(C, -1, -2))  # enforce exact symmetry for eigh
    lam, V = np.linalg.eigh(C)
    h = 1.0 + lam  # spectrum of I + C
    if not np.all(np.isfinite(h)):
        raise FilterDivergence("non-finite ensemble-space spectrum")
    hmax = h.max(axis=-1, keepdims=True)
    h = np.maximum(h, EIG_CLAMP * hmax)
    if np.any(hmax / h.min(axis=-1, keepdims=True) > COND_LIMIT):
        raise FilterDivergence("ensemble-space matrix numerically singular")
    u = (St @ (prec * delta)[..., None])[..., 0]      # S^T diag(prec) delta
    t = (np.swapaxes(V, -1, -2) @ u[..., None])[..., 0]
    w = (V @ (t / h)[..., None])[..., 0]
    sqrt_pt = (V / np.sqrt(h)[..., None, :]) @ np.swapaxes(V, -1, -2)
    return w, sqrt_pt


def etkf_analysis(
    stats: ForecastStats,
    y,
    operator: ObservationOperator,
    noise: DiagonalCovariance,
) -> np.ndarray:
    """Global ETKF analysis; returns the (M, N) analysis ensemble."""
    X = stats.normalized_anomalies
    n = stats.n_members
    yv = _obs_values(y)
    if yv.shape != (operator.n_obs,):
        raise ValueError(f"observation vector has shape {yv.shape}, expected ({operator.n_obs},)")
    S = operator.apply(X)
    delta = yv - operator.apply(stats.mean)
    prec = 1.0 / noise.variances
    w, sqrt_pt = _ensemble_transform(S, prec, delta)
    mean_a = stats.mean + X @ w
    Xa = X @ sqrt_pt
    return mean_a[:, None] + np.sqrt(n - 1.0) * Xa


def _fully_observed(operator: ObservationOperator, loc: LocalizationSpec) -> bool:
    return (
        operator.state_size == loc.grid_size
        and operator.n_obs == loc.grid_size
        and operator.observed_indices[0] == 0  # strictly increasing + full count => identity
    )


def _letkf_batched(stats, yv, operator, noise, loc):
    # Fully observed ring: every gridpoint has the same local window shape,
    # so all M ensemble-space problems are solved in one stacked call.
    X = stats.normalized_anomalies
    M, n = X.shape
    geo = ring_geometry(loc)
    if geo.offsets.size == 0:
        return stats.mean[:, None] + np.sqrt(n - 1.0) * X, M
    idx = geo.window                                       # (M, dloc) obs positions
    prec = geo.taper[None, :] / noise.variances[idx]       # same taper at every gridpoint
    delta = yv - operator.apply(stats.mean)
    S = X[idx]                                             # (M, dloc, n)
    D = delta[idx]                                         # (M, dloc)
    w, sqrt_pt = _ensemble_transform(S, prec, D)
    mean_rows = stats.mean + np.sum(X * w, axis=1)
    anom_rows = (X[:, None, :] @ sqrt_pt)[:, 0, :]    # row s of X times its sqrt_pt
    return mean_rows[:, None] + np.sqrt(n - 1.0) * anom_rows, 0


def _letkf_rows(stats, yv, operator, noise, loc, rows, out):
    # Reference path: solve gridpoints one at a time into out[rows].
    X = stats.normalized_anomalies
    n = stats.n_members
    delta_full = yv - operator.apply(stats.mean)
    S_full = operator.apply(X)
    empty = 0
    for s in rows:
        pos, dist = select_local_obs(s, operator, loc)
        if pos.size == 0:
            # No information for this gridpoint: keep the forecast row.
            out[s] = stats.mean[s] + np.sqrt(n - 1.0) * X[s]
            empty += 1
            continue
        prec = local_precision(noise.variances[pos], dist, loc)
        w, sqrt_pt = _ensemble_transform(S_full[pos], prec, delta_full[pos])
        out[s] = (stats.mean[s] + X[s] @ w) + np.sqrt(n - 1.0) * (X[s] @ sqrt_pt)
    return empty


def letkf_analysis(
    stats: ForecastStats,
    y,
    operator: ObservationOperator,
    noise: DiagonalCovariance,
    loc: LocalizationSpec,
    method: str = "auto",
    n_threads: int = 1,
    diagnostics: dict | None = None,
) -> np.ndarray:
    """Localized ETKF analysis; returns the (M, N) analysis ensemble.

    ``method`` selects the stacked ring solver ("batched", fully observed
    ring only), the per-gridpoint loop ("loop"), or picks automatically
    ("auto").  Both give the same analysis to rounding.  ``n_threads``
    parallelizes the loop path over gridpoints; results are identical for
    any thread count.  If ``diagnostics`` is given, the number of
    gridpoints with an empty local observation set is accumulated under
    ``"empty_local_domains"``.
    """
    if operator.state_size != loc.grid_size:
        raise ValueError("localization grid_size does not match operator state_size")
    yv = _obs_values(y)
    if yv.shape != (operator.n_obs,):
        raise ValueError(f"observation vector has shape {yv.shape}, expected ({operator.n_obs},)")
    if method not in ("auto", "batched", "loop"):
        raise ValueError(f"unknown method {method!r}")
    if method == "batched" and not _fully_observed(operator, loc):
        raise ValueError("batched method requires a fully observed ring")

    use_batched = method == "batched" or (method == "auto" and _fully_observed(operator, loc))
    if use_batched:
        members, empty = _letkf_batched(stats, yv, operator, noise, loc)
    else:
        M, n = stats.normalized_anomalies.shape
        members = np.empty((M, n))
        if n_threads > 1:
            chunks = np.array_split(np.arange(M), n_threads)
            with ThreadPoolExecutor(max_workers=n_threads) as pool:
                counts = pool.map(
                    lambda rows: _letkf_rows(stats, yv, operator, noise, loc, rows, members),
                    [c for c in chunks if c.size],
                )
                empty = sum(counts)
        else:
            empty = _letkf_rows(stats, yv, operator, noise, loc, range(M), members)
    if diagnostics is not None:
        diagnostics["empty_local_domains"] = diagnostics.get("empty_local_domains", 0) + empty
    return members
