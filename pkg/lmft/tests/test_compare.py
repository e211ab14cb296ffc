import csv

import pytest

from lmft.compare import CSV_HEADER, compare, write_comparison_csv


def make_report(label_source="ground-truth", acc=0.8, f1=0.75, seeds=(0, 1)):
    return {
        "schema_version": 1,
        "label": "finetune",
        "seeds": list(seeds),
        "per_seed": [{"seed": s, "accuracy": acc, "weighted_f1": f1} for s in seeds],
        "aggregate": {
            "accuracy": {"mean": acc, "std": 0.02},
            "weighted_f1": {"mean": f1, "std": 0.03},
        },
        "noise_ratio": 0.1 if label_source != "ground-truth" else None,
        "config": {
            "encoder": "mini",
            "learning_rate": 1e-4,
            "epochs": 30,
            "batch_size": 16,
            "label_source": label_source,
            "label_scope": "train",
        },
    }


class TestCompare:
    def test_identical_reports_zero_delta(self):
        gt = make_report()
        weak = make_report(label_source="weak.csv")
        comparison = compare(gt, weak)
        assert comparison["metrics"]["accuracy"]["delta"] == 0.0
        assert comparison["metrics"]["weighted_f1"]["delta"] == 0.0

    def test_delta_is_weak_minus_ground_truth(self):
        gt = make_report(acc=0.6, f1=0.55)
        weak = make_report(label_source="weak.csv", acc=0.7, f1=0.6)
        comparison = compare(gt, weak)
        assert comparison["metrics"]["accuracy"]["delta"] == pytest.approx(0.1)
        assert comparison["metrics"]["weighted_f1"]["delta"] == pytest.approx(0.05)
        assert comparison["noise_ratio"] == 0.1

    def test_mismatched_configs_rejected(self):
        gt = make_report()
        weak = make_report(label_source="weak.csv")
        weak["config"]["epochs"] = 10
        with pytest.raises(ValueError, match="label source"):
            compare(gt, weak)

    def test_mismatched_seeds_rejected(self):
        gt = make_report(seeds=(0, 1))
        weak = make_report(label_source="weak.csv", seeds=(0, 2))
        with pytest.raises(ValueError, match="seed"):
            compare(gt, weak)

    def test_first_report_must_be_ground_truth(self):
        weak = make_report(label_source="weak.csv")
        with pytest.raises(ValueError, match="ground-truth"):
            compare(weak, weak)

    def test_csv_schema(self, tmp_path):
        comparison = compare(make_report(), make_report(label_source="weak.csv"))
        path = tmp_path / "cmp.csv"
        write_comparison_csv(comparison, path)
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        assert tuple(rows[0]) == CSV_HEADER
        assert [r[0] for r in rows[1:]] == ["accuracy", "weighted_f1"]
        for row in rows[1:]:
            for cell in row[1:]:
                float(cell)  # every value parses as a number
