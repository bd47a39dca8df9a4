"""Model-selection experiments: configuration, runs, sweeps, CSV outputs.

A selection experiment runs a twin experiment once, assimilates the shared
observation archive with every competing model version, records per-cycle
indicators (truth RMSE, forecast RMSE, global and local log evidence), and
post-processes them into windowed decision deltas, selection probabilities,
ROC curves and Gini scores.  Per-cycle series are recorded once; window
lengths, ROC thresholds and scores are derived afterwards, so sweeping the
window costs nothing extra.

All randomness derives from one master seed through named streams: the
truth initialization, the observation noise, and each model version's
ensemble initialization are independent and individually reproducible.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .evidence import (
    CycleEvidenceInputs,
    EvidenceSeries,
    local_log_cme_all,
    log_gcme_fast,
    obs_count_weights,
)
from .filters import FilterDivergence, etkf_analysis, forecast_stats, letkf_analysis
from .localization import LocalizationSpec
from .lorenz95 import Lorenz95Config, propagate
from .metrics import (
    confidence_delta,
    gini_score,
    rmse_forecast,
    rmse_truth,
    roc_curve,
    selection_probability,
)
from .rng import stream_rng
from .twin import DiagonalCovariance, ObservationOperator, TwinRun, make_twin_run

_FLOAT_FMT = "%.17g"

INDICATOR_KINDS = {"rmse": "rmse", "gcme": "evidence", "dlcme": "evidence"}
# Divergence guard: abort after this many consecutive cycles with truth RMSE
# above 10x the mean observation standard deviation.
DIVERGENCE_FACTOR = 10.0
DIVERGENCE_PATIENCE = 100


class ConfigError(ValueError):
    """Invalid experiment configuration."""


def default_tuning_grid() -> tuple[float, ...]:
    return tuple(round(1.0 + 0.01 * i, 2) for i in range(21))


@dataclass(frozen=True)
class ExperimentConfig:
    """Complete description of one selection experiment.

    ``cycles`` are the assessed cycles; ``spinup_cycles`` more are run first
    and discarded from every decision.  ``inflation`` is either a fixed
    factor (>= 1) applied to every version, or "auto" to grid-search the
    factor per version by minimizing time-mean truth RMSE over a short run.
    """

    correct_forcing: float = 8.0
    incorrect_forcings: tuple[float, ...] = (8.1, 8.3, 8.5, 8.7, 8.9)
    grid_size: int = 40
    dt: float = 0.05
    cycle_interval_steps: int = 1
    ensemble_size: int = 40
    cycles: int = 10_000
    spinup_cycles: int = 10_000
    windows: tuple[int, ...] = (1,)
    window_stride: int = 1
    loc_radius: float | None = None
    cut_radius: float | None = None
    taper: str = "gaspari_cohn"
    inflation: float | str = "auto"
    seed: int = 20_260_822
    indicators: tuple[str, ...] = ("rmse", "gcme")
    obs_variance: float = 1.0
    burn_in_steps: int = 10_000
    tuning_cycles: int = 2_000
    tuning_spinup: int = 500
    tuning_grid: tuple[float, ...] = field(default_factory=default_tuning_grid)
    emit_local_cme: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "incorrect_forcings", tuple(float(f) for f in self.incorrect_forcings))
        object.__setattr__(self, "windows", tuple(int(k) for k in self.windows))
        object.__setattr__(self, "indicators", tuple(self.indicators))
        object.__setattr__(self, "tuning_grid", tuple(float(g) for g in self.tuning_grid))
        if self.cycles < 1 or self.spinup_cycles < 0:
            raise ConfigError("cycles must be >= 1 and spinup_cycles >= 0")
        if self.ensemble_size < 2:
            raise ConfigError("ensemble_size must be at least 2")
        if not self.incorrect_forcings:
            raise ConfigError("need at least one incorrect forcing")
        if self.correct_forcing in self.incorrect_forcings:
            raise ConfigError("correct forcing listed among incorrect forcings")
        if not self.windows or min(self.windows) < 1:
            raise ConfigError("windows must be positive")
        if max(self.windows) > self.cycles:
            raise ConfigError("window longer than the assessed run")
        if self.window_stride < 1:
            raise ConfigError("window_stride must be positive")
        if not self.indicators:
            raise ConfigError("need at least one indicator")
        for ind in self.indicators:
            if ind not in INDICATOR_KINDS:
                raise ConfigError(f"unknown indicator {ind!r}")
        if "dlcme" in self.indicators and self.loc_radius is None:
            raise ConfigError("dlcme requires localization (loc_radius)")
        if self.emit_local_cme and self.loc_radius is None:
            raise ConfigError("emit_local_cme requires localization (loc_radius)")
        if self.obs_variance <= 0:
            raise ConfigError("obs_variance must be positive")
        if isinstance(self.inflation, str):
            if self.inflation != "auto":
                raise ConfigError(f"inflation must be a factor >= 1 or 'auto', got {self.inflation!r}")
            if not self.tuning_grid or min(self.tuning_grid) < 1.0:
                raise ConfigError("tuning_grid factors must be >= 1")
        elif not float(self.inflation) >= 1.0:
            raise ConfigError(f"inflation factor must be >= 1, got {self.inflation}")

    # -- derived pieces ---------------------------------------------------

    def model(self, forcing: float) -> Lorenz95Config:
        return Lorenz95Config(forcing=forcing, dt=self.dt, grid_size=self.grid_size)

    def localization_spec(self) -> LocalizationSpec | None:
        if self.loc_radius is None:
            return None
        return LocalizationSpec.for_ring(
            self.grid_size, self.loc_radius, taper=self.taper, cut_radius=self.cut_radius
        )

    def total_cycles(self) -> int:
        return self.spinup_cycles + self.cycles

    def forcings(self) -> tuple[float, ...]:
        return (self.correct_forcing,) + self.incorrect_forcings

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        for key in ("incorrect_forcings", "windows", "indicators", "tuning_grid"):
            d[key] = list(d[key])
        return d

    def sha256(self) -> str:
        canon = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            return cls(**d)
        except TypeError as e:
            raise ConfigError(str(e)) from e

    @classmethod
    def from_json(cls, path: str | Path) -> "ExperimentConfig":
        try:
            with open(path) as f:
                d = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read config {path}: {e}") from e
        if not isinstance(d, dict):
            raise ConfigError(f"config {path} must hold a JSON object")
        return cls.from_dict(d)


def model_tag(forcing: float) -> str:
    return f"F{forcing:g}"


# -- single data assimilation run -----------------------------------------


@dataclass
class ModelRunResult:
    """Per-cycle indicator series of one model version against one archive."""

    tag: str
    forcing: float
    inflation_factor: float
    rmse_truth: np.ndarray
    rmse_forecast: np.ndarray
    evidence: EvidenceSeries | None = None
    empty_local_domains: int = 0


def assimilate(
    twin: TwinRun,
    model: Lorenz95Config,
    ensemble_size: int,
    inflation_factor: float,
    loc: LocalizationSpec | None,
    seed: int,
    tag: str,
    n_cycles: int | None = None,
    compute_gcme: bool = True,
    compute_local: bool = False,
    method: str = "auto",
    n_threads: int = 1,
) -> ModelRunResult:
    """Run one model version against the archive, recording per-cycle series.

    The ensemble starts at the archive's first truth state plus unit
    Gaussian perturbations from the version's own init stream.  Each cycle
    propagates the ensemble, computes inflated forecast statistics, records
    forecast-based indicators, then assimilates the cycle's observations
    (ETKF, or LETKF when ``loc`` is given).  Evidence is always evaluated
    on the same inflated forecast the filter uses.

    Raises :class:`FilterDivergence` if truth RMSE stays above 10x the mean
    observation standard deviation for 100 consecutive cycles.
    """
    if n_cycles is None:
        n_cycles = twin.n_cycles
    if n_cycles > twin.n_cycles:
        raise ValueError("n_cycles exceeds archive length")
    M = model.grid_size
    rng = stream_rng(seed, f"ens-init/{tag}")
    members = twin.truth[0][:, None] + rng.standard_normal((M, ensemble_size))

    rt = np.empty(n_cycles)
    rf = np.empty(n_cycles)
    lg = np.empty(n_cycles) if compute_gcme else None
    ll = np.empty((n_cycles, M)) if compute_local else None
    if compute_local and loc is None:
        raise ValueError("local evidence requires a localization spec")

    diag: dict = {}
    div_limit = DIVERGENCE_FACTOR * float(np.sqrt(np.mean(twin.noise.variances)))
    div_run = 0
    for k in range(n_cycles):
        if k > 0:
            members = propagate(members, model, twin.cycle_interval_steps)
        stats = forecast_stats(members, inflation_factor)
        y = twin.observations[k]
        rf[k] = rmse_forecast(stats, y, twin.operator)
        if compute_gcme or compute_local:
            inputs = CycleEvidenceInputs(stats, y, twin.operator, twin.noise)
            if compute_gcme:
                lg[k] = log_gcme_fast(inputs)
            if compute_local:
                ll[k] = local_log_cme_all(inputs, loc, method=method)
        if loc is None:
            members = etkf_analysis(stats, y, twin.operator, twin.noise)
        else:
            members = letkf_analysis(
                stats, y, twin.operator, twin.noise, loc,
                method=method, n_threads=n_threads, diagnostics=diag,
            )
        rt[k] = rmse_truth(members.mean(axis=1), twin.truth[k])
        div_run = div_run + 1 if rt[k] > div_limit else 0
        if div_run >= DIVERGENCE_PATIENCE:
            raise FilterDivergence(
                f"{tag}: truth RMSE above {div_limit:.3g} for "
                f"{DIVERGENCE_PATIENCE} consecutive cycles (cycle {k})"
            )

    ev = EvidenceSeries(model_tag=tag, log_gcme=lg, log_local=ll) if compute_gcme else None
    return ModelRunResult(
        tag=tag,
        forcing=model.forcing,
        inflation_factor=inflation_factor,
        rmse_truth=rt,
        rmse_forecast=rf,
        evidence=ev,
        empty_local_domains=diag.get("empty_local_domains", 0),
    )


def tune_inflation(
    twin: TwinRun,
    model: Lorenz95Config,
    cfg: ExperimentConfig,
    loc: LocalizationSpec | None,
    tag: str,
    method: str = "auto",
    n_threads: int = 1,
) -> tuple[float, dict[float, float]]:
    """Grid-search the inflation factor minimizing time-mean truth RMSE.

    Each candidate runs a short assimilation (``tuning_spinup`` discarded,
    ``tuning_cycles`` scored) against the head of the shared archive, with
    identical initial ensembles.  Diverging candidates score infinity.
    Returns the winning factor (ties break toward the smaller factor) and
    the full score table.
    """
    n_cycles = cfg.tuning_spinup + cfg.tuning_cycles
    if n_cycles > twin.n_cycles:
        raise ConfigError("tuning run longer than the archive")
    scores: dict[float, float] = {}
    best: tuple[float, float] | None = None
    for factor in cfg.tuning_grid:
        try:
            res = assimilate(
                twin, model, cfg.ensemble_size, factor, loc, cfg.seed, tag,
                n_cycles=n_cycles, compute_gcme=False, compute_local=False,
                method=method, n_threads=n_threads,
            )
            score = float(np.mean(res.rmse_truth[cfg.tuning_spinup :]))
        except FilterDivergence:
            score = np.inf
        scores[factor] = score
        if best is None or score < best[1]:
            best = (factor, score)
    if best is None or not np.isfinite(best[1]):
        raise FilterDivergence(f"{tag}: every tuning candidate diverged")
    return best[0], scores


# -- windowed decision deltas ----------------------------------------------


def window_ends(cfg: ExperimentConfig, window: int) -> np.ndarray:
    """Absolute cycle indices where decision windows end.

    Windows lie entirely inside the assessed region, so with stride 1
    there are exactly ``cycles - window + 1`` decisions.
    """
    first = cfg.spinup_cycles + window - 1
    return np.arange(first, cfg.total_cycles(), cfg.window_stride)


def _window_sums(series: np.ndarray, ends: np.ndarray, window: int) -> np.ndarray:
    """Sliding sums over trailing windows of the given length, at ``ends``."""
    c = np.cumsum(series, axis=0)
    lo = ends - window
    out = c[ends].copy()
    inside = lo >= 0
    out[inside] -= c[lo[inside]]
    return out


def windowed_indicator(
    result: ModelRunResult,
    cfg: ExperimentConfig,
    indicator: str,
    window: int,
    weights: np.ndarray | None = None,
) -> np.ndarray:
    """Indicator value per decision window for one model version.

    Log evidence adds over a window.  Forecast RMSE pools: the root of the
    window-mean of per-cycle mean squared forecast-observation distances.
    """
    ends = window_ends(cfg, window)
    if indicator == "rmse":
        return np.sqrt(_window_sums(result.rmse_forecast**2, ends, window) / window)
    if indicator == "gcme":
        if result.evidence is None or result.evidence.log_gcme is None:
            raise ConfigError(f"{result.tag}: no global evidence recorded")
        return _window_sums(result.evidence.log_gcme, ends, window)
    if indicator == "dlcme":
        if result.evidence is None or result.evidence.log_local is None:
            raise ConfigError(f"{result.tag}: no local evidence recorded")
        if weights is None:
            raise ValueError("dlcme needs domain weights")
        return _window_sums(result.evidence.log_local, ends, window) @ weights
    raise ConfigError(f"unknown indicator {indicator!r}")


# -- CSV writers -----------------------------------------------------------


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return _FLOAT_FMT % v
    return str(v)


def _write_rows(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="\n") as f:
        f.write(",".join(header) + "\n")
        for row in rows:
            f.write(",".join(_fmt(v) for v in row) + "\n")


def write_evidence_csv(path: Path, result: ModelRunResult, weights, include_local: bool) -> None:
    """Evidence series schema: cycle, model_tag, log_gcme, log_dlcme[, log_local_*].

    ``log_dlcme`` is NaN when the run computed no local evidence, keeping
    the schema stable across localized and global-only runs.
    """
    ev = result.evidence
    T = ev.n_cycles
    dl = ev.dlcme_series(weights) if ev.log_local is not None else np.full(T, np.nan)
    header = ["cycle", "model_tag", "log_gcme", "log_dlcme"]
    if include_local:
        header += [f"log_local_{i}" for i in range(ev.log_local.shape[1])]
    rows = []
    for k in range(T):
        row = [k, result.tag, ev.log_gcme[k], dl[k]]
        if include_local:
            row += list(ev.log_local[k])
        rows.append(row)
    _write_rows(path, header, rows)


def write_metrics_csv(path: Path, result: ModelRunResult) -> None:
    rows = (
        [k, result.tag, result.rmse_truth[k], result.rmse_forecast[k]]
        for k in range(result.rmse_truth.shape[0])
    )
    _write_rows(path, ["cycle", "model_tag", "rmse_truth", "rmse_forecast"], rows)


def write_roc_csv(path: Path, roc) -> None:
    rows = zip(roc.thresholds, roc.fpr, roc.tpr)
    _write_rows(path, ["threshold", "FPR", "TPR"], rows)


# -- the full selection experiment ----------------------------------------


def run_selection_experiment(
    cfg: ExperimentConfig,
    out_dir: str | Path,
    method: str = "auto",
    n_threads: int = 1,
    log=None,
) -> dict:
    """Run the whole experiment and write its outputs under ``out_dir``.

    Writes per-version evidence and metrics CSVs, per-comparison delta and
    ROC CSVs, a summary table, and a manifest tying everything to the
    configuration hash, the master seed, and the shared observation
    archive's checksum.  Returns the manifest dict.
    """
    say = log if log is not None else (lambda _msg: None)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    loc = cfg.localization_spec()
    need_local = "dlcme" in cfg.indicators or cfg.emit_local_cme
    need_gcme = True  # evidence schema always carries log_gcme

    say(f"generating truth and observations ({cfg.total_cycles()} cycles)")
    operator = ObservationOperator.full(cfg.grid_size)
    noise = DiagonalCovariance.isotropic(cfg.obs_variance, cfg.grid_size)
    twin = make_twin_run(
        cfg.model(cfg.correct_forcing), operator, noise,
        n_cycles=cfg.total_cycles(), seed=cfg.seed,
        cycle_interval_steps=cfg.cycle_interval_steps, burn_in_steps=cfg.burn_in_steps,
    )
    obs_hash = hashlib.sha256(np.ascontiguousarray(twin.observations).tobytes()).hexdigest()
    truth_hash = hashlib.sha256(np.ascontiguousarray(twin.truth).tobytes()).hexdigest()
    weights = obs_count_weights(operator, loc) if need_local else None

    results: dict[str, ModelRunResult] = {}
    inflation_factors: dict[str, float] = {}
    tuning_tables: dict[str, dict[float, float]] = {}
    for forcing in cfg.forcings():
        tag = model_tag(forcing)
        model = cfg.model(forcing)
        if cfg.inflation == "auto":
            factor, table = tune_inflation(twin, model, cfg, loc, tag, method=method, n_threads=n_threads)
            tuning_tables[tag] = table
            say(f"{tag}: tuned inflation {factor:.2f}")
        else:
            factor = float(cfg.inflation)
        inflation_factors[tag] = factor
        results[tag] = assimilate(
            twin, model, cfg.ensemble_size, factor, loc, cfg.seed, tag,
            compute_gcme=need_gcme, compute_local=need_local,
            method=method, n_threads=n_threads,
        )
        mean_rt = float(np.mean(results[tag].rmse_truth[cfg.spinup_cycles :]))
        say(f"{tag}: assimilated {cfg.total_cycles()} cycles, assessed truth RMSE {mean_rt:.3f}")

    files: list[str] = []
    for tag, res in results.items():
        p = out / f"series_{tag}.csv"
        write_evidence_csv(p, res, weights, include_local=cfg.emit_local_cme)
        files.append(p.name)
        p = out / f"metrics_{tag}.csv"
        write_metrics_csv(p, res)
        files.append(p.name)

    correct = results[model_tag(cfg.correct_forcing)]
    summary_rows = []
    n_decisions: dict[str, int] = {}
    for f0 in cfg.incorrect_forcings:
        tag0 = model_tag(f0)
        for window in cfg.windows:
            per_ind = {}
            for ind in cfg.indicators:
                v1 = windowed_indicator(correct, cfg, ind, window, weights)
                v0 = windowed_indicator(results[tag0], cfg, ind, window, weights)
                per_ind[ind] = confidence_delta(v1, v0, INDICATOR_KINDS[ind])
            ends = window_ends(cfg, window)
            n_decisions[f"{tag0}_K{window}"] = int(ends.size)
            p = out / f"deltas_{tag0}_K{window}.csv"
            header = ["window_end"] + [f"delta_{ind}" for ind in cfg.indicators]
            _write_rows(p, header, zip(ends, *[per_ind[i] for i in cfg.indicators]))
            files.append(p.name)
            for ind in cfg.indicators:
                roc = roc_curve(per_ind[ind])
                p = out / f"roc_{ind}_{tag0}_K{window}.csv"
                write_roc_csv(p, roc)
                files.append(p.name)
                summary_rows.append([
                    ind, f0, window, cfg.ensemble_size,
                    cfg.loc_radius if cfg.loc_radius is not None else "",
                    selection_probability(per_ind[ind]), gini_score(roc),
                ])

    p = out / "summary.csv"
    _write_rows(p, ["indicator", "F0", "K", "N", "rho_loc", "selection_probability", "gini"], summary_rows)
    files.append(p.name)

    manifest = {
        "package_version": __version__,
        "config": cfg.to_dict(),
        "config_sha256": cfg.sha256(),
        "seed": cfg.seed,
        "truth_sha256": truth_hash,
        "observations_sha256": obs_hash,
        "inflation_factors": inflation_factors,
        "tuning_scores": {t: {f"{g:.2f}": s for g, s in tab.items()} for t, tab in tuning_tables.items()},
        "assessed_truth_rmse": {
            t: float(np.mean(r.rmse_truth[cfg.spinup_cycles :])) for t, r in results.items()
        },
        "empty_local_domains": {t: r.empty_local_domains for t, r in results.items()},
        "n_decisions": n_decisions,
        "files": sorted(files),
    }
    with open(out / "manifest.json", "w") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
        f.write("\n")
    say(f"wrote {len(files) + 1} files to {out}")
    return manifest


def run_radius_sweep(
    cfg: ExperimentConfig,
    radii,
    out_dir: str | Path,
    method: str = "auto",
    n_threads: int = 1,
    log=None,
) -> Path:
    """Repeat the experiment across localization radii; combine the summaries.

    Each radius runs in its own subdirectory with the cut fixed at twice
    the radius; the combined table lands in ``radius_sweep.csv``.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    say = log if log is not None else (lambda _msg: None)
    combined = []
    for radius in radii:
        say(f"radius sweep: rho_loc = {radius:g}")
        sub = out / f"rho{radius:g}"
        cfg_r = dataclasses.replace(cfg, loc_radius=float(radius), cut_radius=None)
        run_selection_experiment(cfg_r, sub, method=method, n_threads=n_threads, log=log)
        for r in read_summary(sub / "summary.csv"):
            combined.append([
                float(radius), r["indicator"], r["F0"], r["K"], r["N"],
                r["selection_probability"], r["gini"],
            ])
    p = out / "radius_sweep.csv"
    _write_rows(
        p, ["rho_loc", "indicator", "F0", "K", "N", "selection_probability", "gini"], combined
    )
    return p


# -- report ----------------------------------------------------------------


def read_summary(path: str | Path) -> list[dict]:
    """Parse a summary.csv (or radius_sweep.csv) into a list of row dicts."""
    rows = []
    with open(path) as f:
        header = f.readline().strip().split(",")
        for line in f:
            if not line.strip():
                continue
            vals = line.strip().split(",")
            rows.append(dict(zip(header, vals)))
    return rows


def format_report(rows: list[dict]) -> str:
    """Pivot summary rows into per-window text tables of probability and Gini."""
    inds = [i for i in ("rmse", "gcme", "dlcme") if any(r["indicator"] == i for r in rows)]
    windows = sorted({int(r["K"]) for r in rows})
    out = []
    for window in windows:
        for metric, label in (("selection_probability", "selection probability"), ("gini", "Gini score")):
            out.append(f"K={window}  {label}")
            out.append("  ".join(["F0".rjust(6)] + [i.rjust(8) for i in inds]))
            f0s = sorted({float(r["F0"]) for r in rows if int(r["K"]) == window})
            for f0 in f0s:
                cells = [f"{f0:g}".rjust(6)]
                for ind in inds:
                    match = [
                        r for r in rows
                        if r["indicator"] == ind and float(r["F0"]) == f0 and int(r["K"]) == window
                    ]
                    cells.append(f"{float(match[0][metric]):.3f}".rjust(8) if match else "-".rjust(8))
                out.append("  ".join(cells))
            out.append("")
    return "\n".join(out)
