"""Command-line entry point.

    cellsim run --config scenario.cfg --out curves.csv

runs the configured experiment and writes the per-threshold outage table.
Command-line flags override the corresponding config keys.  Exit code 0 on
success, 1 with a diagnostic line on stderr otherwise.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from .outage import format_report, outage_report
from .scenario import (
    ARCHITECTURE_CHOICES,
    ConfigError,
    ScenarioConfig,
    emit_csv,
    parse_config_file,
    parse_threshold_sweep,
    run_experiment,
)
from .sir import COMBINER_MODES


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cellsim",
        description="Uplink outage simulator: sectored (used) vs microzone architectures.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run an outage experiment and write a CSV curve table")
    run.add_argument("--config", metavar="PATH", help="config file (omit for the default scenario)")
    run.add_argument("--seed", type=int, metavar="U64", help="override master_seed")
    run.add_argument("--drops", type=int, metavar="N", help="override n_drops")
    run.add_argument("--arch", choices=ARCHITECTURE_CHOICES, help="override architecture")
    run.add_argument("--out", metavar="PATH", required=True, help="output CSV path")
    run.add_argument(
        "--thresholds",
        metavar="START:STOP:STEP_dB",
        help="override the threshold sweep, e.g. -10:10:1",
    )
    run.add_argument("--paired", choices=("true", "false"), help="override drop pairing")
    run.add_argument("--combiner", choices=COMBINER_MODES, help="override combiner_mode")
    run.add_argument(
        "--workers", type=int, default=1, metavar="N", help="parallel drop workers (default 1)"
    )
    return parser


def _apply_overrides(cfg: ScenarioConfig, args: argparse.Namespace) -> ScenarioConfig:
    updates = {}
    if args.seed is not None:
        updates["master_seed"] = args.seed
    if args.drops is not None:
        updates["n_drops"] = args.drops
    if args.arch is not None:
        updates["architecture"] = args.arch
    if args.thresholds is not None:
        try:
            updates["thresholds"] = parse_threshold_sweep(args.thresholds)
        except ValueError as exc:
            raise ConfigError(f"--thresholds: {exc}") from None
    if args.paired is not None:
        updates["paired"] = args.paired == "true"
    if args.combiner is not None:
        updates["combiner_mode"] = args.combiner
    return replace(cfg, **updates) if updates else cfg


def _normalize_argv(argv):
    """Join '--thresholds -10:...' into one token so argparse does not read
    the leading-minus sweep value as an option."""
    if argv is None:
        argv = sys.argv[1:]
    merged = []
    skip = False
    for i, token in enumerate(argv):
        if skip:
            skip = False
            continue
        if token == "--thresholds" and i + 1 < len(argv) and argv[i + 1].startswith("-"):
            merged.append(f"--thresholds={argv[i + 1]}")
            skip = True
        else:
            merged.append(token)
    return merged


def main(argv=None) -> int:
    args = build_parser().parse_args(_normalize_argv(argv))
    try:
        cfg = parse_config_file(args.config) if args.config else ScenarioConfig()
        cfg = _apply_overrides(cfg, args)
        cfg.validate()
        if args.workers < 1:
            raise ConfigError(f"--workers must be >= 1, got {args.workers}")

        result = run_experiment(cfg, workers=args.workers)
        emit_csv(result, args.out)

        if "used" in result.curves and "microzone" in result.curves:
            rows = outage_report(result.curves["used"], result.curves["microzone"])
            print(format_report(rows))
        else:
            (arch, curve), = result.curves.items()
            for thr, est, ci in zip(curve.thresholds_db, curve.estimates, curve.ci_half_widths):
                print(f"{arch} @ {thr:g} dB: outage {est:.6g} +- {ci:.3g}")
        print(
            f"wrote {args.out} ({cfg.n_drops} drops, seed {cfg.master_seed}, "
            f"{result.elapsed_seconds:.1f} s)"
        )
        return 0
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
