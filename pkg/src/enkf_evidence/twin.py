"""Twin experiments: synthetic truth, noisy observations, archive files.

A twin experiment integrates a "true" model version to produce a reference
trajectory, then observes it through a linear operator plus Gaussian noise.
Competing model versions are later run against the identical observation
archive.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .lorenz95 import Lorenz95Config, propagate
from .rng import stream_rng

# Stream labels; fixed so archives are reproducible from (seed, config) alone.
TRUTH_INIT_STREAM = "truth-init"
OBS_NOISE_STREAM = "obs-noise"

_FLOAT_FMT = "%.17g"  # round-trips float64 exactly


@dataclass(frozen=True)
class ObservationOperator:
    """Row-selection observation operator: y = x[observed_indices].

    ``observed_indices`` must be strictly increasing and inside
    ``[0, state_size)``.  Full observation is ``arange(state_size)``.
    """

    observed_indices: np.ndarray
    state_size: int

    def __post_init__(self) -> None:
        idx = np.asarray(self.observed_indices, dtype=int)
        object.__setattr__(self, "observed_indices", idx)
        if idx.ndim != 1 or idx.size == 0:
            raise ValueError("observed_indices must be a nonempty 1-d array")
        if np.any(np.diff(idx) <= 0):
            raise ValueError("observed_indices must be strictly increasing")
        if idx[0] < 0 or idx[-1] >= self.state_size:
            raise ValueError("observed_indices out of range")

    @property
    def n_obs(self) -> int:
        return int(self.observed_indices.size)

    @classmethod
    def full(cls, state_size: int) -> "ObservationOperator":
        return cls(np.arange(state_size), state_size)

    def apply(self, x: np.ndarray) -> np.ndarray:
        """Select observed components; works on (M,) states and (M, N) ensembles."""
        x = np.asarray(x)
        if x.shape[0] != self.state_size:
            raise ValueError(f"state size {x.shape[0]} != operator state_size {self.state_size}")
        return x[self.observed_indices]

    def matrix(self) -> np.ndarray:
        """Dense (d, M) matrix form, for oracle computations."""
        H = np.zeros((self.n_obs, self.state_size))
        H[np.arange(self.n_obs), self.observed_indices] = 1.0
        return H


@dataclass(frozen=True)
class DiagonalCovariance:
    """Diagonal covariance, stored as its variances (all strictly positive)."""

    variances: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.variances, dtype=float)
        object.__setattr__(self, "variances", v)
        if v.ndim != 1 or np.any(v <= 0.0) or not np.all(np.isfinite(v)):
            raise ValueError("variances must be a 1-d array of finite positive values")

    @classmethod
    def isotropic(cls, variance: float, size: int) -> "DiagonalCovariance":
        return cls(np.full(size, float(variance)))

    @property
    def size(self) -> int:
        return int(self.variances.size)


@dataclass(frozen=True)
class ObservationBatch:
    """Observation vector for one assimilation cycle."""

    time_index: int
    values: np.ndarray


@dataclass
class TwinRun:
    """Truth trajectory plus its synthetic observations.

    ``truth`` has shape (n_cycles, M) and ``observations`` (n_cycles, d);
    row k of both refers to the same cycle.
    """

    model: Lorenz95Config
    operator: ObservationOperator
    noise: DiagonalCovariance
    truth: np.ndarray
    observations: np.ndarray
    seed: int
    cycle_interval_steps: int = 1
    burn_in_steps: int = 10_000
    extra_meta: dict = field(default_factory=dict)

    @property
    def n_cycles(self) -> int:
        return int(self.truth.shape[0])

    def batch(self, k: int) -> ObservationBatch:
        return ObservationBatch(time_index=k, values=self.observations[k])


def generate_truth(
    cfg: Lorenz95Config,
    n_cycles: int,
    seed: int,
    cycle_interval_steps: int = 1,
    burn_in_steps: int = 10_000,
    init_perturbation: float = 1e-3,
) -> np.ndarray:
    """Reference trajectory sampled once per cycle, shape (n_cycles, M).

    The run starts at the model equilibrium plus a small seeded Gaussian
    perturbation and is spun onto the attractor for ``burn_in_steps`` RK4
    steps before the first recorded state.
    """
    if n_cycles < 1:
        raise ValueError("n_cycles must be at least 1")
    if cycle_interval_steps < 1:
        raise ValueError("cycle_interval_steps must be at least 1")
    rng = stream_rng(seed, TRUTH_INIT_STREAM)
    x = cfg.forcing * np.ones(cfg.grid_size) + init_perturbation * rng.standard_normal(cfg.grid_size)
    x = propagate(x, cfg, burn_in_steps)
    out = np.empty((n_cycles, cfg.grid_size))
    out[0] = x
    for k in range(1, n_cycles):
        x = propagate(x, cfg, cycle_interval_steps)
        out[k] = x
    return out


def synthesize_observations(
    truth: np.ndarray,
    operator: ObservationOperator,
    noise: DiagonalCovariance,
    seed: int,
) -> np.ndarray:
    """Noisy observations y_k = H x_k + eps_k, eps_k ~ N(0, R), shape (n_cycles, d)."""
    if noise.size != operator.n_obs:
        raise ValueError("noise covariance size does not match number of observations")
    rng = stream_rng(seed, OBS_NOISE_STREAM)
    eps = rng.standard_normal(truth.shape[0] * operator.n_obs).reshape(truth.shape[0], operator.n_obs)
    return truth[:, operator.observed_indices] + eps * np.sqrt(noise.variances)


def make_twin_run(
    cfg: Lorenz95Config,
    operator: ObservationOperator,
    noise: DiagonalCovariance,
    n_cycles: int,
    seed: int,
    cycle_interval_steps: int = 1,
    burn_in_steps: int = 10_000,
) -> TwinRun:
    """Generate truth and observations together under one master seed."""
    truth = generate_truth(
        cfg, n_cycles, seed, cycle_interval_steps=cycle_interval_steps, burn_in_steps=burn_in_steps
    )
    obs = synthesize_observations(truth, operator, noise, seed)
    return TwinRun(
        model=cfg,
        operator=operator,
        noise=noise,
        truth=truth,
        observations=obs,
        seed=seed,
        cycle_interval_steps=cycle_interval_steps,
        burn_in_steps=burn_in_steps,
    )


def _write_csv(path: Path, header_prefix: str, data: np.ndarray) -> None:
    cols = ["cycle"] + [f"{header_prefix}_{i}" for i in range(data.shape[1])]
    with open(path, "w", newline="\n") as f:
        f.write(",".join(cols) + "\n")
        for k in range(data.shape[0]):
            f.write(str(k) + "," + ",".join(_FLOAT_FMT % v for v in data[k]) + "\n")


def _read_csv(path: Path, header_prefix: str) -> np.ndarray:
    with open(path, "r", newline="") as f:
        header = f.readline().strip().split(",")
        if header[0] != "cycle" or not all(c.startswith(header_prefix + "_") for c in header[1:]):
            raise ValueError(f"{path}: unexpected header {header[:3]}...")
        rows = [line.strip().split(",") for line in f if line.strip()]
    data = np.array([[float(v) for v in r[1:]] for r in rows])
    cycles = np.array([int(r[0]) for r in rows])
    if not np.array_equal(cycles, np.arange(len(rows))):
        raise ValueError(f"{path}: cycle column must be 0..T-1 without gaps")
    return data


def save_archive(run: TwinRun, directory: str | Path, prefix: str = "twin") -> dict:
    """Write truth/observation CSVs plus a JSON metadata sidecar.

    Returns the metadata dict.  Values are written with 17 significant
    digits, so a load round-trips bit-exactly.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    _write_csv(directory / f"{prefix}_truth.csv", "x", run.truth)
    _write_csv(directory / f"{prefix}_obs.csv", "y", run.observations)
    meta = {
        "seed": run.seed,
        "forcing": run.model.forcing,
        "dt": run.model.dt,
        "grid_size": run.model.grid_size,
        "cycle_interval_steps": run.cycle_interval_steps,
        "burn_in_steps": run.burn_in_steps,
        "n_cycles": run.n_cycles,
        "observed_indices": [int(i) for i in run.operator.observed_indices],
        "obs_variances": [float(v) for v in run.noise.variances],
    }
    meta.update(run.extra_meta)
    with open(directory / f"{prefix}_meta.json", "w") as f:
        json.dump(meta, f, indent=2, sort_keys=True)
        f.write("\n")
    return meta


def load_archive(directory: str | Path, prefix: str = "twin") -> TwinRun:
    """Load an archive written by :func:`save_archive`."""
    directory = Path(directory)
    with open(directory / f"{prefix}_meta.json") as f:
        meta = json.load(f)
    cfg = Lorenz95Config(forcing=meta["forcing"], dt=meta["dt"], grid_size=meta["grid_size"])
    operator = ObservationOperator(np.asarray(meta["observed_indices"], dtype=int), cfg.grid_size)
    noise = DiagonalCovariance(np.asarray(meta["obs_variances"], dtype=float))
    truth = _read_csv(directory / f"{prefix}_truth.csv", "x")
    obs = _read_csv(directory / f"{prefix}_obs.csv", "y")
    if truth.shape[0] != obs.shape[0]:
        raise ValueError("truth and observation archives disagree on cycle count")
    return TwinRun(
        model=cfg,
        operator=operator,
        noise=noise,
        truth=truth,
        observations=obs,
        seed=meta["seed"],
        cycle_interval_steps=meta["cycle_interval_steps"],
        burn_in_steps=meta["burn_in_steps"],
    )
