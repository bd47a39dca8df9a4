"""Lorenz-95 dynamics on a periodic ring, integrated with fixed-step RK4.

The model couples each variable to its neighbours through advection-like
quadratic terms, with linear damping and constant external forcing:

    dx_i/dt = (x_{i+1} - x_{i-2}) * x_{i-1} - x_i + F

Indices wrap around the ring.  One nondimensional time unit corresponds to
five days of synoptic-scale atmospheric dynamics, so a step of dt = 0.05 is
six hours.  At the standard configuration (40 variables, F = 8) the system
is chaotic with an error doubling time close to two days.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

# Conversion used when quoting times in days (1 model time unit = 5 days).
DAYS_PER_TIME_UNIT = 5.0


@lru_cache(maxsize=16)
def _neighbour_indices(grid_size: int):
    base = np.arange(grid_size)
    ip1 = np.roll(base, -1)  # i+1
    im2 = np.roll(base, 2)   # i-2
    im1 = np.roll(base, 1)   # i-1
    for a in (ip1, im2, im1):
        a.setflags(write=False)
    return ip1, im2, im1


@dataclass(frozen=True)
class Lorenz95Config:
    """Parameters of one model version.

    Attributes
    ----------
    forcing : float
        External forcing F.  Competing model versions differ only here.
    dt : float
        RK4 step size in model time units.  Must be positive.
    grid_size : int
        Number of ring variables.  At least 4, so every index in the
        tendency has a distinct neighbour.
    """

    forcing: float = 8.0
    dt: float = 0.05
    grid_size: int = 40

    def __post_init__(self) -> None:
        if not self.dt > 0.0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.grid_size < 4:
            raise ValueError(f"grid_size must be at least 4, got {self.grid_size}")


def tendency(x: np.ndarray, cfg: Lorenz95Config) -> np.ndarray:
    """Time derivative of the ring state.

    Parameters
    ----------
    x : ndarray, shape (M,) or (M, N)
        One state, or N states stacked as columns (an ensemble).  The ring
        dimension is always axis 0.
    cfg : Lorenz95Config

    Returns
    -------
    ndarray, same shape as ``x``.
    """
    x = np.asarray(x, dtype=float)
    if x.shape[0] != cfg.grid_size:
        raise ValueError(f"state has {x.shape[0]} variables, config says {cfg.grid_size}")
    ip1, im2, im1 = _neighbour_indices(cfg.grid_size)
    return (x[ip1] - x[im2]) * x[im1] - x + cfg.forcing


def rk4_step(x: np.ndarray, cfg: Lorenz95Config) -> np.ndarray:
    """Advance one classical RK4 step of size ``cfg.dt``."""
    dt = cfg.dt
    k1 = tendency(x, cfg)
    k2 = tendency(x + 0.5 * dt * k1, cfg)
    k3 = tendency(x + 0.5 * dt * k2, cfg)
    k4 = tendency(x + dt * k3, cfg)
    return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def propagate(x: np.ndarray, cfg: Lorenz95Config, n_steps: int) -> np.ndarray:
    """Advance ``n_steps`` RK4 steps.  ``n_steps`` may be zero."""
    if n_steps < 0:
        raise ValueError("n_steps must be nonnegative")
    x = np.asarray(x, dtype=float)
    for _ in range(n_steps):
        x = rk4_step(x, cfg)
    return x


def equilibrium(cfg: Lorenz95Config) -> np.ndarray:
    """The homogeneous fixed point x_i = F (tendency is exactly zero there)."""
    return np.full(cfg.grid_size, cfg.forcing)


def error_doubling_time(
    cfg: Lorenz95Config,
    n_pairs: int = 100,
    n_steps: int = 400,
    seed: int = 0,
    delta0: float = 1e-8,
    burn_in_steps: int = 2000,
    sample_stride: int = 50,
) -> float:
    """Mean error doubling time, in days.

    Runs pairs of trajectories separated by a tiny perturbation, renormalizes
    the separation back to ``delta0`` each time it doubles, and averages the
    doubling intervals.  Initial states are sampled along a single attractor
    trajectory, ``sample_stride`` steps apart, after ``burn_in_steps`` of
    spin-up from a perturbed equilibrium.

    Parameters
    ----------
    n_pairs : int
        Number of independent trajectory pairs.
    n_steps : int
        Steps each pair is run; should cover many doublings.
    seed : int
        Seeds the initial perturbations.
    delta0 : float
        Separation magnitude, small enough for linear error growth.

    Returns
    -------
    float
        Average time between doublings, converted to days.
    """
    rng = np.random.default_rng(seed)
    x = cfg.forcing * np.ones(cfg.grid_size) + 1e-3 * rng.standard_normal(cfg.grid_size)
    x = propagate(x, cfg, burn_in_steps)

    # Sample decorrelated on-attractor initial conditions along one trajectory.
    base = np.empty((cfg.grid_size, n_pairs))
    for p in range(n_pairs):
        base[:, p] = x
        x = propagate(x, cfg, sample_stride)

    d = rng.standard_normal((cfg.grid_size, n_pairs))
    d *= delta0 / np.linalg.norm(d, axis=0)
    pert = base + d

    doublings = np.zeros(n_pairs, dtype=int)
    last_doubling_step = np.zeros(n_pairs, dtype=int)
    for step in range(1, n_steps + 1):
        base = rk4_step(base, cfg)
        pert = rk4_step(pert, cfg)
        diff = pert - base
        err = np.linalg.norm(diff, axis=0)
        crossed = err >= 2.0 * delta0
        if np.any(crossed):
            doublings[crossed] += 1
            last_doubling_step[crossed] = step
            # Rescale the separation back to delta0 along its current direction.
            pert[:, crossed] = base[:, crossed] + diff[:, crossed] * (delta0 / err[crossed])

    ok = doublings > 0
    if not np.any(ok):
        raise RuntimeError("no doublings observed; increase n_steps")
    per_pair = last_doubling_step[ok] / doublings[ok]  # steps per doubling
    return float(np.mean(per_pair) * cfg.dt * DAYS_PER_TIME_UNIT)
