"""Command-line sweep runner.

Precedence is flags > config file > built-in defaults.  --preset picks the
round budget (desk: 200 rounds for quick trend checks, full: 1000 rounds);
an explicit --rounds wins over the preset.  Exit code 0 on success, 2 on
configuration or I/O failure.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .config import ConfigError, ExperimentConfig, SweepSpec, parse_config
from .engine import run_sweep
from .events import EVENT_CATEGORIES
from .results import emit_results

PRESET_ROUNDS = {"desk": 200, "full": 1000}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="camcover",
        description="Sweep event-coverage probabilities for vehicle-mounted vs "
                    "stationary camera deployments and write CSV results.",
    )
    parser.add_argument("--config", type=Path, help="JSON config file (flat snake_case keys)")
    parser.add_argument("--seed", type=int, help="master seed")
    parser.add_argument("--rounds", type=int, help="rounds per sweep cell")
    parser.add_argument("--penetration", type=float,
                        help="restrict the sweep to one penetration value")
    parser.add_argument("--density", type=float,
                        help="restrict the sweep to one stationary camera density")
    parser.add_argument("--category", choices=sorted(EVENT_CATEGORIES),
                        help="restrict the sweep to one event category")
    parser.add_argument("--occlusion", choices=["on", "off"],
                        help="building occlusion of sight lines (default on)")
    parser.add_argument("--out", type=Path, default=Path("results"),
                        help="output directory (default ./results)")
    parser.add_argument("--preset", choices=sorted(PRESET_ROUNDS),
                        help="round budget preset: desk=200, full=1000")
    return parser


def resolve(args) -> tuple[ExperimentConfig, SweepSpec]:
    """Apply flag overrides on top of the config file (or defaults)."""
    if args.config is not None:
        config, sweep = parse_config(args.config)
    else:
        config, sweep = ExperimentConfig(), SweepSpec()
    if args.preset is not None:
        config = replace(config, rounds=PRESET_ROUNDS[args.preset])
    if args.rounds is not None:
        config = replace(config, rounds=args.rounds)
    if args.seed is not None:
        config = replace(config, seed=args.seed)
    if args.occlusion is not None:
        config = replace(config, occlusion=args.occlusion == "on")
    if args.category is not None:
        sweep = replace(sweep, categories=[args.category])
    if args.penetration is not None:
        sweep = replace(sweep, penetrations=[args.penetration])
    if args.density is not None:
        sweep = replace(sweep, stationary_densities=[args.density])
    config.validate()
    sweep.validate()
    return config, sweep


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config, sweep = resolve(args)
        report = run_sweep(config, sweep, workers=config.workers)
        paths = emit_results(report, args.out, config, sweep)
    except (ConfigError, OSError) as exc:
        print(f"camcover: {exc}", file=sys.stderr)
        return 2
    for (system, category, x), summary in report.sorted_items():
        print(f"{system:10s} {category:10s} x={x:<6g} "
              f"p_detect={summary.p_detect:.3f} p_monitor={summary.p_monitor:.3f} "
              f"rounds={summary.rounds}")
    for name in ("detection", "monitoring", "fragmentation", "manifest"):
        print(f"wrote {paths[name]}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
