"""Acceptance for the fine-tuning harness: both label modes complete on the
20-record fixture, weak==truth reproduces ground-truth metrics exactly, the
comparison CSV validates, and metrics match the shared conformance vectors.
"""

import csv
import json
import time

import pytest

from lmft.compare import CSV_HEADER, compare, write_comparison_csv
from lmft.metrics import accuracy, weighted_f1
from lmft.trainer import FinetuneConfig, finetune_multi


def test_weak_to_strong_harness(fixture20, conformance_path, tmp_path):
    start = time.monotonic()

    weak_path = tmp_path / "weak.csv"
    with open(weak_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["paper_id", "predicted_class", "confidence", "source"])
        for p in fixture20:
            writer.writerow([p.paper_id, p.label, "1.0", "acceptance"])

    seeds = (0, 1)
    gt_report = finetune_multi(fixture20, FinetuneConfig(), seeds=seeds)
    weak_report = finetune_multi(
        fixture20, FinetuneConfig(label_source=str(weak_path)), seeds=seeds
    )

    # weak labels equal to ground truth -> bit-identical metrics
    assert weak_report["per_seed"] == gt_report["per_seed"]
    assert weak_report["aggregate"] == gt_report["aggregate"]
    assert weak_report["noise_ratio"] == 0.0

    # comparison CSV schema: header + one numeric row per metric
    comparison = compare(gt_report, weak_report)
    assert comparison["metrics"]["accuracy"]["delta"] == 0.0
    out = tmp_path / "comparison.csv"
    write_comparison_csv(comparison, out)
    with open(out, newline="") as fh:
        rows = list(csv.reader(fh))
    assert tuple(rows[0]) == CSV_HEADER
    assert [r[0] for r in rows[1:]] == ["accuracy", "weighted_f1"]
    for row in rows[1:]:
        for cell in row[1:]:
            float(cell)

    # metrics agree with the classifier pipeline's oracle values
    payload = json.loads(conformance_path.read_text())
    for case in payload["cases"]:
        assert accuracy(case["pred"], case["truth"]) == pytest.approx(
            case["accuracy"], abs=1e-12
        )
        assert weighted_f1(case["pred"], case["truth"]) == pytest.approx(
            case["weighted_f1"], abs=1e-12
        )

    elapsed = time.monotonic() - start
    assert elapsed < 300.0, f"harness took {elapsed:.0f}s >= 300s"
    print(f"ACCEPTANCE 9 [weak-to-strong harness]: PASS ({elapsed:.1f}s)")
