"""Side-by-side comparison of ground-truth and weak-label fine-tuning runs."""

from __future__ import annotations

import csv
from pathlib import Path

METRICS = ("accuracy", "weighted_f1")
CSV_HEADER = (
    "metric",
    "ground_truth_mean",
    "ground_truth_std",
    "weak_mean",
    "weak_std",
    "delta",
)


def _comparable_config(report: dict) -> dict:
    config = dict(report.get("config", {}))
    config.pop("label_source", None)
    return config


def compare(report_gt: dict, report_weak: dict) -> dict:
    """Per-metric mean(std) for both label sources plus delta = weak - ground truth.

    The two runs must share every config field except the label source, and
    the same seed list; standard deviations are the bar-whisker values.
    """
    if report_gt.get("config", {}).get("label_source") != "ground-truth":
        raise ValueError("first report must come from ground-truth fine-tuning")
    if _comparable_config(report_gt) != _comparable_config(report_weak):
        raise ValueError("reports differ in more than the label source")
    if report_gt["seeds"] != report_weak["seeds"]:
        raise ValueError("reports were run on different seed lists")

    rows = {}
    for metric in METRICS:
        gt = report_gt["aggregate"][metric]
        weak = report_weak["aggregate"][metric]
        rows[metric] = {
            "ground_truth": gt,
            "weak": weak,
            "delta": weak["mean"] - gt["mean"],
        }
    return {
        "schema_version": 1,
        "seeds": list(report_gt["seeds"]),
        "noise_ratio": report_weak.get("noise_ratio"),
        "metrics": rows,
    }


def write_comparison_csv(comparison: dict, path: str | Path) -> None:
    """Plot-ready rows; the std columns are the whisker lengths."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for metric in METRICS:
            row = comparison["metrics"][metric]
            writer.writerow(
                [
                    metric,
                    repr(row["ground_truth"]["mean"]),
                    repr(row["ground_truth"]["std"]),
                    repr(row["weak"]["mean"]),
                    repr(row["weak"]["std"]),
                    repr(row["delta"]),
                ]
            )
