"""Ensemble Kalman filtering and contextual model evidence on the Lorenz-95 ring.

Compare competing versions of a chaotic model by how well each one's data
assimilation predicts incoming observations: per-cycle log evidence (global,
or localized to match an LETKF) accumulated over windows, against the usual
RMSE baselines, scored by selection probabilities and ROC/Gini.
"""

__version__ = "0.1.0"

from .evidence import (
    CycleEvidenceInputs,
    EvidenceSeries,
    dl_cme,
    local_log_cme_all,
    log_gcme_dense,
    log_gcme_fast,
    log_glcme,
    log_local_cme,
    window_log_evidence,
)
from .filters import (
    FilterDivergence,
    ForecastStats,
    InflationSpec,
    etkf_analysis,
    forecast_stats,
    letkf_analysis,
)
from .localization import LocalizationSpec, gaspari_cohn, gaussian_taper, ring_distance
from .lorenz95 import Lorenz95Config, error_doubling_time, propagate, rk4_step, tendency
from .metrics import (
    RocCurve,
    confidence_delta,
    gini_score,
    rmse_forecast,
    rmse_truth,
    roc_curve,
    selection_probability,
)
from .twin import (
    DiagonalCovariance,
    ObservationBatch,
    ObservationOperator,
    TwinRun,
    generate_truth,
    load_archive,
    make_twin_run,
    save_archive,
    synthesize_observations,
)

__all__ = [
    "__version__",
    "CycleEvidenceInputs",
    "DiagonalCovariance",
    "EvidenceSeries",
    "FilterDivergence",
    "ForecastStats",
    "InflationSpec",
    "LocalizationSpec",
    "Lorenz95Config",
    "ObservationBatch",
    "ObservationOperator",
    "RocCurve",
    "TwinRun",
    "confidence_delta",
    "dl_cme",
    "error_doubling_time",
    "etkf_analysis",
    "forecast_stats",
    "gaspari_cohn",
    "gaussian_taper",
    "generate_truth",
    "gini_score",
    "letkf_analysis",
    "load_archive",
    "local_log_cme_all",
    "log_gcme_dense",
    "log_gcme_fast",
    "log_glcme",
    "log_local_cme",
    "make_twin_run",
    "propagate",
    "ring_distance",
    "rk4_step",
    "rmse_forecast",
    "rmse_truth",
    "roc_curve",
    "save_archive",
    "selection_probability",
    "synthesize_observations",
    "tendency",
    "window_log_evidence",
]
