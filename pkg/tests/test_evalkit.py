"""Metric correctness against independent oracles.

Two oracles: a from-scratch confusion-count implementation written
differently from the library code, and scikit-learn's reference metrics.
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.metrics import accuracy_score, precision_recall_fscore_support

from sarcfuse.errors import SarcfuseError
from sarcfuse.evalkit import MetricsReport, render_results_table, score


def brute_force(predictions, gold):
    """Independent reference: metrics from raw pair counts."""
    pairs = list(zip(gold, predictions))
    out = {"accuracy": sum(g == p for g, p in pairs) / len(pairs), "per_class": {}}
    f1s, weights = [], []
    for cls in (0, 1):
        tp = sum(1 for g, p in pairs if g == cls and p == cls)
        fp = sum(1 for g, p in pairs if g != cls and p == cls)
        fn = sum(1 for g, p in pairs if g == cls and p != cls)
        support = sum(1 for g, _ in pairs if g == cls)
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        out["per_class"][cls] = {
            "precision": precision, "recall": recall, "f1": f1, "support": support,
        }
        f1s.append(f1)
        weights.append(support)
    out["f1_macro"] = sum(f1s) / 2
    out["f1_weighted"] = sum(f * w for f, w in zip(f1s, weights)) / sum(weights)
    return out


def label_lists(min_size=1, max_size=60):
    return st.lists(st.integers(0, 1), min_size=min_size, max_size=max_size)


class TestScoreOracle:
    @given(st.data())
    @settings(max_examples=200, deadline=None)
    def test_matches_brute_force_exactly(self, data):
        gold = data.draw(label_lists())
        predictions = data.draw(
            st.lists(st.integers(0, 1), min_size=len(gold), max_size=len(gold))
        )
        report = score(predictions, gold)
        expected = brute_force(predictions, gold)
        assert report.accuracy == expected["accuracy"]
        assert report.f1_macro == expected["f1_macro"]
        assert report.f1_weighted == expected["f1_weighted"]
        for cls in (0, 1):
            got = report.per_class[cls]
            want = expected["per_class"][cls]
            assert got.precision == want["precision"]
            assert got.recall == want["recall"]
            assert got.f1 == want["f1"]
            assert got.support == want["support"]

    @given(st.data())
    @settings(max_examples=100, deadline=None)
    def test_matches_sklearn(self, data):
        gold = data.draw(label_lists(min_size=2))
        predictions = data.draw(
            st.lists(st.integers(0, 1), min_size=len(gold), max_size=len(gold))
        )
        report = score(predictions, gold)
        p, r, f, _ = precision_recall_fscore_support(
            gold, predictions, labels=[0, 1], zero_division=0
        )
        assert report.accuracy == pytest.approx(accuracy_score(gold, predictions))
        for cls in (0, 1):
            assert report.per_class[cls].precision == pytest.approx(p[cls], abs=1e-12)
            assert report.per_class[cls].recall == pytest.approx(r[cls], abs=1e-12)
            assert report.per_class[cls].f1 == pytest.approx(f[cls], abs=1e-12)
        _, _, f_macro, _ = precision_recall_fscore_support(
            gold, predictions, average="macro", labels=[0, 1], zero_division=0
        )[0:4]
        assert report.f1_macro == pytest.approx(f_macro, abs=1e-12)

    @given(st.data())
    @settings(max_examples=100, deadline=None)
    def test_label_swap_symmetry(self, data):
        gold = data.draw(label_lists())
        predictions = data.draw(
            st.lists(st.integers(0, 1), min_size=len(gold), max_size=len(gold))
        )
        plain = score(predictions, gold)
        flipped = score([1 - p for p in predictions], [1 - g for g in gold])
        assert plain.accuracy == flipped.accuracy
        assert plain.f1_macro == flipped.f1_macro
        for cls in (0, 1):
            a, b = plain.per_class[cls], flipped.per_class[1 - cls]
            assert (a.precision, a.recall, a.f1, a.support) == (
                b.precision, b.recall, b.f1, b.support,
            )


class TestScoreEdges:
    def test_perfect_predictions(self):
        report = score([0, 1, 0, 1], [0, 1, 0, 1])
        assert report.accuracy == 1.0
        assert report.f1_macro == 1.0
        assert report.f1_weighted == 1.0

    def test_all_wrong_balanced(self):
        report = score([1, 0, 1, 0], [0, 1, 0, 1])
        assert report.accuracy == 0.0
        assert report.f1_macro == 0.0

    def test_single_class_gold(self):
        report = score([1, 1, 1], [1, 1, 1])
        assert report.per_class[1].f1 == 1.0
        assert report.per_class[0].f1 == 0.0
        assert report.per_class[0].support == 0
        assert report.f1_weighted == 1.0

    def test_zero_denominators_give_zero(self):
        report = score([0, 0], [1, 1])
        assert report.per_class[1].precision == 0.0
        assert report.per_class[1].recall == 0.0
        assert report.per_class[0].precision == 0.0

    def test_length_mismatch(self):
        with pytest.raises(SarcfuseError):
            score([0, 1], [0])

    def test_empty(self):
        with pytest.raises(SarcfuseError):
            score([], [])

    def test_non_binary(self):
        with pytest.raises(SarcfuseError):
            score([0, 2], [0, 1])

    def test_report_dict_round_trip(self):
        report = score([0, 1, 1, 0, 1], [0, 1, 0, 0, 1])
        again = MetricsReport.from_dict(report.to_dict())
        assert again.to_dict() == report.to_dict()


class TestResultsTable:
    def _reports(self):
        strong = score([0, 1, 0, 1], [0, 1, 0, 1])
        weak = score([0, 0, 0, 1], [0, 1, 0, 1])
        return {
            ("sarc_movies", "fused"): strong,
            ("sarc_movies", "nbow"): weak,
            ("twitter", "nbow"): weak,
        }

    def test_best_f1_flagged_per_dataset(self):
        table = render_results_table(self._reports())
        starred = {
            (row["dataset"], row["model"]) for row in table.rows if row["best"]
        }
        assert starred == {("sarc_movies", "fused"), ("twitter", "nbow")}

    def test_csv_has_header_and_rows(self):
        table = render_results_table(self._reports())
        lines = table.to_csv().strip().splitlines()
        assert len(lines) == 4
        assert lines[0].startswith("dataset,")

    def test_text_marks_best(self):
        text = render_results_table(self._reports()).to_text()
        fused_line = next(l for l in text.splitlines() if "fused" in l)
        assert "*" in fused_line
