import numpy as np
import pytest

from surveytax.errors import ValidationError
from surveytax.gcn import TrainConfig, train
from surveytax.graphs import build_co_category_graph
from surveytax.weaklabel import (
    WeakLabelEntry,
    WeakLabelSet,
    audit,
    generate_weak_labels,
    read_weak_labels,
    write_weak_labels,
)


@pytest.fixture(scope="module")
def separable_run(separable):
    records, taxonomy = separable
    graph = build_co_category_graph(records, taxonomy)
    run = train(graph, TrainConfig(seed=0), taxonomy)
    return records, taxonomy, graph, run


class TestGenerate:
    def test_separable_labels_equal_ground_truth(self, separable_run):
        records, taxonomy, graph, run = separable_run
        weak = generate_weak_labels(run, graph, taxonomy)
        assert len(weak.entries) == len(records)
        report = audit(weak, records)
        assert report.agreement == 1.0
        assert report.noise_ratio == 0.0

    def test_zero_weight_model_uniform_confidence(self, separable_run):
        records, taxonomy, graph, run = separable_run
        d = graph.features.cols
        zeroed = type(run)(
            config=run.config,
            n_classes=run.n_classes,
            masks=run.masks,
            loss_trace=run.loss_trace,
            val_accuracy_trace=run.val_accuracy_trace,
            best_epoch=run.best_epoch,
            best_state=(np.zeros((d, run.config.hidden)),
                        np.zeros((run.config.hidden, run.n_classes))),
            final_state=run.final_state,
            final_metrics=run.final_metrics,
        )
        weak = generate_weak_labels(zeroed, graph, taxonomy)
        k = run.n_classes
        for entry in weak.entries:
            assert entry.confidence == pytest.approx(1.0 / k, abs=1e-12)
            assert entry.predicted_class == taxonomy.name_of(0)  # tie rule

    def test_test_split_agreement_equals_test_accuracy(self, separable_run):
        records, taxonomy, graph, run = separable_run
        weak = generate_weak_labels(run, graph, taxonomy)
        test_ids = {graph.node_ids[i] for i in np.flatnonzero(run.masks["test"])}
        truth = {r.paper_id: r.taxonomy_label for r in records}
        subset = [e for e in weak.entries if e.paper_id in test_ids]
        agreement = sum(e.predicted_class == truth[e.paper_id] for e in subset) / len(subset)
        assert agreement == run.final_metrics["test"]["accuracy"]

    def test_source_carries_seed_and_selection(self, separable_run):
        records, taxonomy, graph, run = separable_run
        weak = generate_weak_labels(run, graph, taxonomy)
        assert "seed0" in weak.entries[0].source
        assert "best_val" in weak.entries[0].source


class TestRoundTrip:
    def test_export_import_identity(self, separable_run, tmp_path):
        records, taxonomy, graph, run = separable_run
        weak = generate_weak_labels(run, graph, taxonomy)
        path = tmp_path / "weak.csv"
        write_weak_labels(weak, path)
        loaded = read_weak_labels(path)
        assert loaded == weak  # generated_on is excluded from equality

    def test_header_enforced(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b\n1,2\n")
        with pytest.raises(ValidationError, match="header"):
            read_weak_labels(path)

    def test_confidence_bounds_validated(self):
        with pytest.raises(ValidationError):
            WeakLabelSet(entries=(
                WeakLabelEntry("p1", "Red", 0.0, "gcn"),
            ))

    def test_duplicate_paper_rejected(self):
        entry = WeakLabelEntry("p1", "Red", 0.5, "gcn")
        with pytest.raises(ValidationError):
            WeakLabelSet(entries=(entry, entry))


class TestAudit:
    def test_one_of_ten_flipped(self, separable_run):
        records, taxonomy, graph, run = separable_run
        ten = records[:10]
        entries = []
        for i, r in enumerate(ten):
            label = r.taxonomy_label
            if i == 0:
                label = next(c for c in taxonomy.classes if c != label)
            entries.append(WeakLabelEntry(r.paper_id, label, 0.9, "test"))
        report = audit(WeakLabelSet(entries=tuple(entries)), ten)
        assert report.agreement == pytest.approx(0.9, abs=1e-12)
        assert report.noise_ratio == pytest.approx(0.1, abs=1e-12)
        assert report.agreement + report.noise_ratio == 1.0

    def test_disjoint_ids_error(self, separable_run):
        records, *_ = separable_run
        weak = WeakLabelSet(entries=(WeakLabelEntry("ghost", "Red", 0.9, "t"),))
        with pytest.raises(ValidationError, match="ghost"):
            audit(weak, records)

    def test_empty_set_rejected(self, separable_run):
        records, *_ = separable_run
        with pytest.raises(ValidationError):
            audit(WeakLabelSet(entries=()), records)

    def test_confusion_counts(self, separable_run):
        records, taxonomy, *_ = separable_run
        entries = tuple(
            WeakLabelEntry(r.paper_id, taxonomy.classes[0], 0.8, "t") for r in records[:4]
        )
        report = audit(WeakLabelSet(entries=entries), records)
        assert sum(report.confusion.values()) == 4
