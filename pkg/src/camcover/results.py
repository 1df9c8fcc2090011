"""Result emission: detection/monitoring/fragmentation CSVs plus a run manifest.

Row order, float formatting (probabilities at 6 decimals), and the manifest
key order are all fixed, so a given manifest and master seed reproduce the
output files byte for byte.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

from .config import ExperimentConfig, SweepSpec
from .metrics import CellSummary, MetricsReport

PROB_FMT = "{:.6f}"


def manifest_dict(config: ExperimentConfig, sweep: SweepSpec) -> dict:
    """Flat merge of the resolved config and sweep; itself a valid config file."""
    merged = config.to_dict()
    merged.update(sweep.to_dict())
    return merged


def emit_results(report: MetricsReport, out_dir, config: ExperimentConfig,
                 sweep: SweepSpec) -> dict[str, Path]:
    """Write detection.csv, monitoring.csv, fragmentation.csv, manifest.json."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "detection": out / "detection.csv",
        "monitoring": out / "monitoring.csv",
        "fragmentation": out / "fragmentation.csv",
        "manifest": out / "manifest.json",
    }
    _write_probability_csv(paths["detection"], report, which="detect")
    _write_probability_csv(paths["monitoring"], report, which="monitor")
    _write_fragmentation_csv(paths["fragmentation"], report, sweep)
    with open(paths["manifest"], "w", encoding="utf-8") as fh:
        json.dump(manifest_dict(config, sweep), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return paths


def _write_probability_csv(path: Path, report: MetricsReport, which: str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["system", "category", "penetration_or_density", "p", "ci_lo", "ci_hi", "rounds"]
        )
        for (system, category, x), summary in report.sorted_items():
            if which == "detect":
                p, ci = summary.p_detect, summary.detect_ci
            else:
                p, ci = summary.p_monitor, summary.monitor_ci
            writer.writerow([
                system, category, f"{x:g}",
                PROB_FMT.format(p), PROB_FMT.format(ci[0]), PROB_FMT.format(ci[1]),
                summary.rounds,
            ])


def _write_fragmentation_csv(path: Path, report: MetricsReport, sweep: SweepSpec) -> None:
    """Fragment histograms of the mobile cells at the sweep's reference penetration."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["category", "fragments", "pdf", "cdf"])
        for category in sweep.categories:
            summary = _mobile_cell_near(report, category, sweep.fragmentation_penetration)
            if summary is None:
                continue
            for k, pdf, cdf in summary.fragment_distribution():
                writer.writerow(
                    [category, k, PROB_FMT.format(pdf), PROB_FMT.format(cdf)]
                )


def _mobile_cell_near(report: MetricsReport, category: str,
                      penetration: float) -> CellSummary | None:
    """Mobile cell of the category closest to the requested penetration."""
    best = None
    best_key = None
    for (system, cat, x), summary in report.sorted_items():
        if system != "mobile" or cat != category:
            continue
        key = (abs(x - penetration), x)
        if best_key is None or key < best_key:
            best_key = key
            best = summary
    return best
