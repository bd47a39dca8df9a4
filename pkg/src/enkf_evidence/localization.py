"""Localization on the ring: distances, taper functions, local observation sets.

Localization suppresses spurious long-range sample covariances in small
ensembles.  Two ingredients are kept separate on purpose: a hard cut radius
selecting which observations a gridpoint sees at all (box-car selection),
and a smooth taper applied to the observation-error precision inside the
cut.  With the Gaspari-Cohn taper the natural cut is twice the localization
radius, which is exactly the taper's support.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

TAPER_KINDS = ("gaspari_cohn", "gaussian", "boxcar")


def ring_distance(i, j, grid_size: int):
    """Shortest distance between gridpoints on a ring of ``grid_size`` points."""
    d = np.abs(np.asarray(i) - np.asarray(j))
    return np.minimum(d, grid_size - d)


def gaspari_cohn(z):
    """Gaspari-Cohn fifth-order piecewise rational function of z = r / loc_radius.

    Compactly supported on [0, 2]:

        0 <= z < 1:  1 - 5/3 z^2 + 5/8 z^3 + 1/2 z^4 - 1/4 z^5
        1 <= z < 2:  4 - 5 z + 5/3 z^2 + 5/8 z^3 - 1/2 z^4 + 1/12 z^5 - 2/(3 z)
        z >= 2:      0

    Both branches give 5/24 at z = 1; the outer branch reaches exactly 0 at
    z = 2.  The 2/(3z) term is singular at z = 0, which the outer branch
    never reaches; z is still clamped away from 0 there as a guard.
    """
    z = np.asarray(z, dtype=float)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    if np.any(z < 0.0):
        raise ValueError("gaspari_cohn requires z >= 0")
    out = np.zeros_like(z)
    near = z < 1.0
    zn = z[near]
    out[near] = 1.0 + zn * zn * (-5.0 / 3.0 + zn * (5.0 / 8.0 + zn * (0.5 - 0.25 * zn)))
    far = (z >= 1.0) & (z < 2.0)
    zf = np.maximum(z[far], 1e-12)
    out[far] = (
        4.0
        + zf * (-5.0 + zf * (5.0 / 3.0 + zf * (5.0 / 8.0 + zf * (-0.5 + zf / 12.0))))
        - 2.0 / (3.0 * zf)
    )
    return float(out[0]) if scalar else out


def gaussian_taper(r, loc_radius: float):
    """exp(-r^2 / (2 loc_radius^2)); equals exp(-1/2) at r = loc_radius."""
    if loc_radius <= 0.0:
        raise ValueError("loc_radius must be positive")
    r = np.asarray(r, dtype=float)
    return np.exp(-0.5 * (r / loc_radius) ** 2)


@dataclass(frozen=True)
class LocalizationSpec:
    """Localization geometry and taper for a ring of ``grid_size`` points.

    ``loc_radius`` scales the taper; ``cut_radius`` bounds the box-car
    selection (inclusive, so a cut of 0 keeps a gridpoint's own
    observation).  ``taper`` is one of :data:`TAPER_KINDS`; "boxcar" means
    no smooth weighting at all inside the cut.
    """

    loc_radius: float
    cut_radius: float
    grid_size: int
    taper: str = "gaspari_cohn"

    def __post_init__(self) -> None:
        if self.loc_radius <= 0.0:
            raise ValueError("loc_radius must be positive")
        if self.cut_radius < 0.0:
            raise ValueError("cut_radius must be nonnegative")
        if self.grid_size < 1:
            raise ValueError("grid_size must be positive")
        if self.taper not in TAPER_KINDS:
            raise ValueError(f"unknown taper {self.taper!r}; expected one of {TAPER_KINDS}")

    @classmethod
    def for_ring(
        cls,
        grid_size: int,
        loc_radius: float,
        taper: str = "gaspari_cohn",
        cut_radius: float | None = None,
    ) -> "LocalizationSpec":
        """Spec with the conventional cut of twice the localization radius."""
        if cut_radius is None:
            cut_radius = 2.0 * loc_radius
        return cls(loc_radius=loc_radius, cut_radius=cut_radius, grid_size=grid_size, taper=taper)

    def taper_at(self, r):
        """Taper weight at raw ring distance r (not normalized)."""
        r = np.asarray(r, dtype=float)
        if self.taper == "gaspari_cohn":
            return gaspari_cohn(r / self.loc_radius)
        if self.taper == "gaussian":
            return gaussian_taper(r, self.loc_radius)
        return np.ones_like(r)  # boxcar: selection already handled by cut_radius


def select_local_obs(
    s: int, operator, loc: LocalizationSpec
) -> tuple[np.ndarray, np.ndarray]:
    """Observations within the cut radius of gridpoint ``s``.

    Returns ``(obs_positions, distances)`` where ``obs_positions`` indexes
    into the observation vector (ascending, hence deterministic) and
    ``distances`` are the matching ring distances.  Either may be empty.
    """
    if not 0 <= s < loc.grid_size:
        raise ValueError(f"gridpoint {s} outside ring of size {loc.grid_size}")
    dist = ring_distance(operator.observed_indices, s, loc.grid_size)
    keep = dist <= loc.cut_radius
    return np.nonzero(keep)[0], dist[keep]


def local_precision(
    variances: np.ndarray, distances: np.ndarray, loc: LocalizationSpec
) -> np.ndarray:
    """Tapered observation precisions taper(d) / variance for a local set.

    Zero taper weight gives exactly zero precision: the observation is
    selected but carries no information.
    """
    variances = np.asarray(variances, dtype=float)
    distances = np.asarray(distances, dtype=float)
    if variances.shape != distances.shape:
        raise ValueError("variances and distances must have matching shapes")
    return loc.taper_at(distances) / variances


@dataclass(frozen=True)
class RingGeometry:
    """Precomputed local windows of a fully observed ring.

    ``offsets`` are the signed gridpoint offsets within the cut radius
    (each ring position once), ``distances`` and ``taper`` their ring
    distances and taper weights, and ``window[s]`` the obs positions of
    gridpoint s's local set, shape (M, len(offsets)).  The ``active_*``
    fields keep only offsets with strictly positive taper, the ones that
    carry information.
    """

    offsets: np.ndarray
    distances: np.ndarray
    taper: np.ndarray
    window: np.ndarray
    active_offsets: np.ndarray
    active_taper: np.ndarray
    active_window: np.ndarray


@lru_cache(maxsize=64)
def ring_geometry(loc: LocalizationSpec) -> RingGeometry:
    """Geometry shared by every gridpoint when all ring points are observed."""
    m = loc.grid_size
    offs = np.arange(-(m // 2), m - m // 2)
    dist = np.minimum(np.abs(offs), m - np.abs(offs)).astype(float)
    keep = dist <= loc.cut_radius
    offs, dist = offs[keep], dist[keep]
    taper = np.atleast_1d(np.asarray(loc.taper_at(dist), dtype=float))
    window = (np.arange(m)[:, None] + offs[None, :]) % m
    active = taper > 0.0
    arrays = (
        offs, dist, taper, window,
        offs[active], taper[active], window[:, active],
    )
    for a in arrays:
        a.setflags(write=False)
    return RingGeometry(*arrays)


def correlation_matrix(loc: LocalizationSpec) -> np.ndarray:
    """(M, M) matrix C_ij = taper(ring_distance(i, j)), for covariance tapering.

    Symmetric with unit diagonal; used by the covariance-localized evidence
    route, where the forecast covariance is replaced by its Schur product
    with C.
    """
    idx = np.arange(loc.grid_size)
    dist = ring_distance(idx[:, None], idx[None, :], loc.grid_size)
    return np.asarray(loc.taper_at(dist), dtype=float)
