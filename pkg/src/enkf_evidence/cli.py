"""Command-line front end.

Subcommands::

    truth-gen      generate a truth/observation archive
    select         run the full model-selection experiment
    sweep-radius   repeat the experiment across localization radii
    sweep-window   repeat the decision analysis across window lengths
    report         pivot summary tables into readable form

Exit codes: 0 on success, 1 on configuration errors, 2 when the filter
diverges.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from .experiments import (
    ConfigError,
    ExperimentConfig,
    format_report,
    read_summary,
    run_radius_sweep,
    run_selection_experiment,
)
from .filters import FilterDivergence
from .twin import DiagonalCovariance, ObservationOperator, make_twin_run, save_archive

FULL_SCALE_CYCLES = 50_000


class _Parser(argparse.ArgumentParser):
    # Bad flags are configuration errors: exit 1, not argparse's default 2.
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(1)


def _parse_floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as e:
        raise ConfigError(f"cannot parse float list {text!r}") from e


def _parse_ints(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError as e:
        raise ConfigError(f"cannot parse int list {text!r}") from e


def _load_config(args) -> ExperimentConfig:
    if args.config is not None:
        cfg = ExperimentConfig.from_json(args.config)
    else:
        cfg = ExperimentConfig()
    updates = {}
    if args.seed is not None:
        if args.seed < 0 or args.seed > 2**64 - 1:
            raise ConfigError("--seed must fit in an unsigned 64-bit integer")
        updates["seed"] = args.seed
    if getattr(args, "full", False):
        updates["cycles"] = max(cfg.cycles, FULL_SCALE_CYCLES)
    if getattr(args, "emit_local_cme", False):
        updates["emit_local_cme"] = True
    if getattr(args, "windows", None):
        updates["windows"] = tuple(_parse_ints(args.windows))
    try:
        return dataclasses.replace(cfg, **updates) if updates else cfg
    except ConfigError:
        raise
    except ValueError as e:
        raise ConfigError(str(e)) from e


def _add_common(p: argparse.ArgumentParser, out_required: bool = True) -> None:
    p.add_argument("--config", type=Path, default=None, help="JSON experiment configuration")
    p.add_argument("--seed", type=int, default=None, help="master seed (unsigned 64-bit)")
    p.add_argument("--out", type=Path, required=out_required, help="output directory")
    p.add_argument("--full", action="store_true", help="full-scale run (50000 assessed cycles)")
    p.add_argument("--threads", type=int, default=1, help="worker threads for local analyses")
    p.add_argument(
        "--emit-local-cme", action="store_true",
        help="also write per-gridpoint local evidence columns",
    )


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="enkf-evidence", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("truth-gen", help="generate a truth/observation archive")
    _add_common(g)
    g.add_argument("--cycles", type=int, default=None, help="override archive length")
    g.add_argument("--prefix", default="twin", help="archive filename prefix")

    s = sub.add_parser("select", help="run the model-selection experiment")
    _add_common(s)

    r = sub.add_parser("sweep-radius", help="selection experiment across localization radii")
    _add_common(r)
    r.add_argument("--radii", default="2,3,4,5,6,8", help="comma-separated localization radii")

    w = sub.add_parser("sweep-window", help="selection experiment across window lengths")
    _add_common(w)
    w.add_argument("--windows", default="1,2,4", help="comma-separated window lengths")

    rep = sub.add_parser("report", help="pivot summary CSVs into readable tables")
    rep.add_argument("summaries", nargs="+", type=Path, help="summary.csv paths")
    rep.add_argument("--out", type=Path, default=None, help="also write the text report here")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "truth-gen":
            cfg = _load_config(args)
            n_cycles = args.cycles if args.cycles is not None else cfg.total_cycles()
            if n_cycles < 1:
                raise ConfigError("--cycles must be positive")
            run = make_twin_run(
                cfg.model(cfg.correct_forcing),
                ObservationOperator.full(cfg.grid_size),
                DiagonalCovariance.isotropic(cfg.obs_variance, cfg.grid_size),
                n_cycles=n_cycles,
                seed=cfg.seed,
                cycle_interval_steps=cfg.cycle_interval_steps,
                burn_in_steps=cfg.burn_in_steps,
            )
            meta = save_archive(run, args.out, prefix=args.prefix)
            print(json.dumps(meta, indent=2, sort_keys=True))
        elif args.command == "select":
            cfg = _load_config(args)
            run_selection_experiment(cfg, args.out, n_threads=args.threads, log=print)
        elif args.command == "sweep-radius":
            cfg = _load_config(args)
            radii = _parse_floats(args.radii)
            if not radii or min(radii) <= 0:
                raise ConfigError("--radii must be positive")
            path = run_radius_sweep(cfg, radii, args.out, n_threads=args.threads, log=print)
            print(f"combined table: {path}")
        elif args.command == "sweep-window":
            cfg = _load_config(args)
            run_selection_experiment(cfg, args.out, n_threads=args.threads, log=print)
        elif args.command == "report":
            rows = []
            for path in args.summaries:
                rows.extend(read_summary(path))
            if not rows:
                raise ConfigError("no summary rows found")
            text = format_report(rows)
            print(text)
            if args.out is not None:
                args.out.parent.mkdir(parents=True, exist_ok=True)
                args.out.write_text(text + "\n")
    except (ConfigError, OSError) as e:
        print(f"configuration error: {e}", file=sys.stderr)
        return 1
    except FilterDivergence as e:
        print(f"filter divergence: {e}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
