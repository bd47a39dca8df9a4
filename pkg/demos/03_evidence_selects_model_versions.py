#!/usr/bin/env python3
"""Selecting the correct model version from observations alone.

Two candidate versions of the ring model differ only in their forcing
(8.0 vs 8.5).  Both assimilate the same archive, which was generated by
the F = 8 version.  Per cycle we record two indicators: the forecast RMSE
against the observations, and the log evidence (the likelihood of the
cycle's observations under the forecast ensemble).  A decision picks the
version the indicator favours; over many cycles the selection probability
and the Gini score say how reliable each indicator is.
"""

from pathlib import Path

from enkf_evidence.experiments import (
    ExperimentConfig,
    format_report,
    read_summary,
    run_selection_experiment,
)

cfg = ExperimentConfig(
    cycles=2_000,
    spinup_cycles=500,
    incorrect_forcings=(8.5,),
    windows=(1, 4),
    tuning_cycles=500,
    tuning_spinup=100,
)

out = Path("demo_output/selection")
manifest = run_selection_experiment(cfg, out, log=print)

print()
print("tuned inflation per version:", manifest["inflation_factors"])
print("assessed truth RMSE per version:", {
    tag: round(v, 3) for tag, v in manifest["assessed_truth_rmse"].items()
})
print()
print(format_report(read_summary(out / "summary.csv")))
print("longer windows accumulate evidence, so K = 4 separates the")
print("versions more cleanly than single-cycle decisions.")
