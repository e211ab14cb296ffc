import csv
import json

import numpy as np
import pytest

from lmft.data import load_corpus, load_weak_labels
from lmft.splits import make_split
from lmft.trainer import FinetuneConfig, finetune, finetune_multi, write_report

WEAK_HEADER = ["paper_id", "predicted_class", "confidence", "source"]


def write_weak_csv(path, labels: dict[str, str]):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(WEAK_HEADER)
        for pid, cls in labels.items():
            writer.writerow([pid, cls, "0.9", "test-fixture"])


class TestData:
    def test_load_corpus(self, fixture20):
        assert len(fixture20) == 20
        assert {p.label for p in fixture20} == {"Systems", "Applications"}
        assert all(p.text for p in fixture20)

    def test_duplicate_ids_rejected(self, tmp_path):
        line = json.dumps({"paper_id": "x", "title": "t", "summary": "s",
                           "taxonomy_label": "A"})
        path = tmp_path / "dup.jsonl"
        path.write_text(line + "\n" + line + "\n")
        with pytest.raises(ValueError, match="duplicate"):
            load_corpus(path)

    def test_weak_header_enforced(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b,c,d\n")
        with pytest.raises(ValueError, match="header"):
            load_weak_labels(path)


class TestSplitProtocol:
    def test_floor_rule(self):
        train, val, test = make_split(20, seed=0)
        assert (len(train), len(val), len(test)) == (12, 4, 4)

    def test_matches_published_protocol(self):
        # Same shuffle-and-floor protocol as the classifier pipeline: the
        # seeded permutation cut at floor(0.6n) / floor(0.2n).
        perm = np.random.default_rng(3).permutation(20)
        train, val, test = make_split(20, seed=3)
        assert np.array_equal(np.concatenate([train, val, test]), perm)


class TestFinetune:
    def test_ground_truth_mode_completes_with_valid_schema(self, fixture20):
        config = FinetuneConfig(epochs=3)
        report = finetune_multi(fixture20, config, seeds=(0,))
        assert report["schema_version"] == 1
        agg = report["aggregate"]
        assert 0.0 <= agg["accuracy"]["mean"] <= 1.0
        assert 0.0 <= agg["weighted_f1"]["mean"] <= 1.0
        assert report["noise_ratio"] is None
        assert report["config"]["label_source"] == "ground-truth"

    def test_deterministic_per_seed(self, fixture20):
        a = finetune(fixture20, FinetuneConfig(epochs=3, seed=1))
        b = finetune(fixture20, FinetuneConfig(epochs=3, seed=1))
        assert (a.accuracy, a.weighted_f1) == (b.accuracy, b.weighted_f1)

    def test_weak_equal_to_truth_identical_metrics(self, fixture20, tmp_path):
        weak_path = tmp_path / "weak.csv"
        write_weak_csv(weak_path, {p.paper_id: p.label for p in fixture20})
        gt = finetune_multi(fixture20, FinetuneConfig(epochs=3), seeds=(0, 1))
        weak = finetune_multi(
            fixture20, FinetuneConfig(epochs=3, label_source=str(weak_path)), seeds=(0, 1)
        )
        assert weak["per_seed"] == gt["per_seed"]
        assert weak["noise_ratio"] == 0.0

    def test_injected_noise_flagged(self, fixture20, tmp_path):
        labels = {p.paper_id: p.label for p in fixture20}
        flipped = 0
        for p in fixture20:
            if flipped < 2:  # 2 of 20 = 10% noise
                labels[p.paper_id] = ("Systems" if p.label == "Applications"
                                      else "Applications")
                flipped += 1
        weak_path = tmp_path / "noisy.csv"
        write_weak_csv(weak_path, labels)
        report = finetune_multi(
            fixture20, FinetuneConfig(epochs=2, label_source=str(weak_path)), seeds=(0,)
        )
        assert report["noise_ratio"] == pytest.approx(0.10, abs=1e-12)

    def test_missing_weak_ids_error(self, fixture20, tmp_path):
        weak_path = tmp_path / "partial.csv"
        write_weak_csv(weak_path, {fixture20[0].paper_id: fixture20[0].label})
        with pytest.raises(ValueError, match="missing ids"):
            finetune(fixture20, FinetuneConfig(epochs=1, label_source=str(weak_path)))

    def test_unknown_encoder_id_error(self, fixture20):
        with pytest.raises(ValueError, match="unknown encoder id"):
            finetune(fixture20, FinetuneConfig(epochs=1, encoder="no/such-model"))

    def test_all_scope_trains_on_every_record(self, fixture20, tmp_path):
        weak_path = tmp_path / "weak.csv"
        write_weak_csv(weak_path, {p.paper_id: p.label for p in fixture20})
        metrics = finetune(
            fixture20,
            FinetuneConfig(epochs=1, label_source=str(weak_path), label_scope="all"),
        )
        assert 0.0 <= metrics.accuracy <= 1.0

    def test_epochs_validated(self):
        with pytest.raises(ValueError):
            FinetuneConfig(epochs=0)

    def test_report_written(self, fixture20, tmp_path):
        report = finetune_multi(fixture20, FinetuneConfig(epochs=1), seeds=(0,))
        out = tmp_path / "report.json"
        write_report(report, out)
        assert json.loads(out.read_text())["label"] == "finetune (ground-truth)"
