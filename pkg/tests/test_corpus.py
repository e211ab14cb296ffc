import io
import json

import pytest

from surveytax.corpus import (
    PaperRecord,
    StatsReport,
    SubsetSpec,
    Taxonomy,
    build_subset,
    corpus_stats,
    load_records,
    parse_records,
    write_records,
    write_stats_csv,
)
from surveytax.errors import ParseError, ValidationError


def make_line(**overrides) -> str:
    record = {
        "paper_id": "2301.00001",
        "title": "A Survey of Something",
        "authors": ["Ada Example"],
        "release_date": "2023-01-05",
        "links": ["https://example.org"],
        "categories": ["cs.CL"],
        "summary": "An example summary about language models.",
        "taxonomy_label": "Comprehensive",
    }
    record.update(overrides)
    return json.dumps(record)


class TestParseRecords:
    def test_single_line_round_trip(self):
        records = parse_records([make_line()])
        assert len(records) == 1
        r = records[0]
        assert r.paper_id == "2301.00001"
        assert r.title == "A Survey of Something"
        assert r.authors == ("Ada Example",)
        assert r.release_date == "2023-01-05"
        assert r.links == ("https://example.org",)
        assert r.categories == ("cs.CL",)
        assert r.taxonomy_label == "Comprehensive"

    def test_missing_title_cites_line_1(self):
        line = make_line()
        raw = json.loads(line)
        del raw["title"]
        with pytest.raises(ParseError, match="line 1.*title"):
            parse_records([json.dumps(raw)])

    def test_bad_json_cites_line_number(self):
        with pytest.raises(ParseError, match="line 2"):
            parse_records([make_line(), "{not json"])

    def test_duplicate_paper_id(self):
        with pytest.raises(ValidationError, match="duplicate paper_id"):
            parse_records([make_line(), make_line(title="Other")])

    def test_unknown_label_names_the_label(self, default_taxonomy):
        with pytest.raises(ValidationError, match="Nonsense"):
            parse_records([make_line(taxonomy_label="Nonsense")], default_taxonomy)

    def test_empty_categories_rejected(self):
        with pytest.raises(ValidationError, match="categories"):
            parse_records([make_line(categories=[])])

    def test_bad_date_rejected(self):
        with pytest.raises(ParseError, match="release_date"):
            parse_records([make_line(release_date="March 2023")])

    def test_datetime_is_normalized_to_date(self):
        records = parse_records([make_line(release_date="2023-01-05T12:30:00")])
        assert records[0].release_date == "2023-01-05"

    def test_blank_lines_skipped(self):
        records = parse_records([make_line(), "", "  "])
        assert len(records) == 1

    def test_fixture_has_10_records_3_labels(self, fixture10):
        assert len(fixture10) == 10
        assert len({r.taxonomy_label for r in fixture10}) == 3

    def test_write_then_load_round_trip(self, fixture10, tmp_path):
        out = tmp_path / "copy.jsonl"
        write_records(fixture10, out)
        assert load_records(out) == fixture10


class TestTaxonomy:
    def test_default_has_16_classes(self, default_taxonomy):
        assert default_taxonomy.num_classes == 16
        assert "Comprehensive" in default_taxonomy
        assert "Others" in default_taxonomy

    def test_ids_are_positions(self, default_taxonomy):
        for i, name in enumerate(default_taxonomy.classes):
            assert default_taxonomy.id_of(name) == i
            assert default_taxonomy.name_of(i) == name

    def test_unknown_label_raises(self, default_taxonomy):
        with pytest.raises(ValidationError, match="Bogus"):
            default_taxonomy.id_of("Bogus")

    def test_duplicate_classes_rejected(self):
        with pytest.raises(ValidationError):
            Taxonomy(classes=("A", "A"))

    def test_hints_for_unknown_class_rejected(self):
        with pytest.raises(ValidationError):
            Taxonomy(classes=("A", "B"), hints={"C": ("x",)})

    def test_from_file(self, tmp_path):
        path = tmp_path / "taxo.json"
        path.write_text(json.dumps({"classes": ["X", "Y"], "hints": {"X": ["kw"]}}))
        taxonomy = Taxonomy.from_file(path)
        assert taxonomy.classes == ("X", "Y")
        assert taxonomy.hints["X"] == ("kw",)


class TestBuildSubset:
    def test_empty_spec_is_identity(self, fixture10, default_taxonomy):
        out = build_subset(fixture10, SubsetSpec(), default_taxonomy)
        assert out == fixture10

    def test_cutoff_keeps_8_of_10(self, fixture10, default_taxonomy):
        # Two fixture records are from 2024-01 (counted by hand).
        spec = SubsetSpec(cutoff_date="2023-12-31")
        assert len(build_subset(fixture10, spec, default_taxonomy)) == 8

    def test_removed_class_drops_3(self, fixture10, default_taxonomy):
        spec = SubsetSpec(removed_classes=frozenset({"Education"}))
        out = build_subset(fixture10, spec, default_taxonomy)
        assert len(out) == 7
        assert all(r.taxonomy_label != "Education" for r in out)

    def test_unknown_class_rejected(self, fixture10, default_taxonomy):
        spec = SubsetSpec(removed_classes=frozenset({"NoSuchClass"}))
        with pytest.raises(ValidationError, match="NoSuchClass"):
            build_subset(fixture10, spec, default_taxonomy)

    def test_idempotent(self, fixture10, default_taxonomy):
        spec = SubsetSpec(cutoff_date="2023-12-31",
                          removed_classes=frozenset({"Trustworthy"}))
        once = build_subset(fixture10, spec, default_taxonomy)
        assert build_subset(once, spec, default_taxonomy) == once

    def test_partition_without_cutoff(self, fixture10, default_taxonomy):
        spec = SubsetSpec(removed_classes=frozenset({"Comprehensive"}))
        kept = build_subset(fixture10, spec, default_taxonomy)
        removed = [r for r in fixture10 if r.taxonomy_label == "Comprehensive"]
        assert len(kept) + len(removed) == len(fixture10)

    def test_order_preserved(self, fixture10, default_taxonomy):
        spec = SubsetSpec(removed_classes=frozenset({"Trustworthy"}))
        kept = build_subset(fixture10, spec, default_taxonomy)
        positions = [fixture10.index(r) for r in kept]
        assert positions == sorted(positions)


class TestCorpusStats:
    def test_single_record(self, fixture10):
        report = corpus_stats(fixture10[:1])
        assert report.n_records == 1
        assert sum(report.per_month.values()) == 1
        assert sum(report.per_class.values()) == 1
        assert report.per_class == {"Comprehensive": 1}

    def test_authored_category_counts(self, fixture10, default_taxonomy):
        # First record is cs.CL+cs.AI; records 2-3 are cs.CL-bearing; record 5
        # is cs.AI only. Chosen so counts are {cs.CL: 3, cs.AI: 2, cs.LG: 1}.
        subset = [fixture10[i] for i in (0, 1, 2, 4)]
        report = corpus_stats(subset)
        assert report.per_category == {"cs.CL": 3, "cs.AI": 2, "cs.LG": 1}

    def test_fixture_category_counts_by_hand(self, fixture10):
        report = corpus_stats(fixture10)
        assert report.per_category == {
            "cs.CL": 6, "cs.AI": 5, "cs.LG": 1, "cs.CR": 2, "cs.CY": 3,
        }

    def test_class_counts_sum_to_record_count(self, fixture10):
        report = corpus_stats(fixture10)
        assert sum(report.per_class.values()) == len(fixture10)
        assert report.per_class == {"Comprehensive": 4, "Trustworthy": 3, "Education": 3}

    def test_months(self, fixture10):
        report = corpus_stats(fixture10)
        assert report.per_month["2024-01"] == 2
        assert sum(report.per_month.values()) == 10

    def test_top_tokens_exclude_stopwords(self, fixture10):
        report = corpus_stats(fixture10, top_k=5)
        assert len(report.top_tokens) == 5
        for token, count in report.top_tokens:
            assert token == token.lower() and len(token) >= 2
            assert count >= 1

    def test_empty_input_rejected(self):
        with pytest.raises(ValidationError):
            corpus_stats([])

    def test_csv_has_header(self, fixture10, tmp_path):
        out = tmp_path / "stats.csv"
        write_stats_csv(corpus_stats(fixture10), out)
        first = out.read_text().splitlines()[0]
        assert first == "table,key,count"

    def test_json_dict_round_trips(self, fixture10):
        report = corpus_stats(fixture10)
        payload = json.loads(json.dumps(report.to_json_dict()))
        assert payload["n_records"] == 10
