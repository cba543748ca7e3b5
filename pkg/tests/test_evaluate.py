import csv
import json

import pytest

from balancer import InputError
from balancer.coalition import CoalitionResult
from balancer.datasets import load_known_pairs, load_reference_partition
from balancer.evaluate import (
    EvalSetError,
    EvaluationPair,
    load_eval_set,
    score_partition,
    write_report_csv,
    write_report_json,
)


def partition(set1, set2):
    return CoalitionResult(frozenset(set1), frozenset(set2), start=None)


def pairs_csv(tmp_path, rows, header="a,b,relation"):
    path = tmp_path / "pairs.csv"
    path.write_text(header + "\n" + "\n".join(",".join(r) for r in rows) + "\n")
    return path


# loading -----------------------------------------------------------------------

def test_load_eval_set_canonicalizes_and_dedupes(tmp_path):
    path = pairs_csv(tmp_path, [
        ("zulu", "alpha", "enemy"),
        ("alpha", "zulu", "enemy"),
        ("Beta", "alpha", "ally"),
    ])
    pairs = load_eval_set(path)
    assert pairs == [
        EvaluationPair("alpha", "beta", "ally"),
        EvaluationPair("alpha", "zulu", "enemy"),
    ]


def test_load_eval_set_unknown_relation(tmp_path):
    path = pairs_csv(tmp_path, [("a", "b", "friend")])
    with pytest.raises(EvalSetError, match="friend"):
        load_eval_set(path)


def test_load_eval_set_conflicting_labels(tmp_path):
    path = pairs_csv(tmp_path, [("a", "b", "ally"), ("b", "a", "enemy")])
    with pytest.raises(EvalSetError, match="already listed"):
        load_eval_set(path)


def test_load_eval_set_self_pair(tmp_path):
    path = pairs_csv(tmp_path, [("a", "a", "ally")])
    with pytest.raises(EvalSetError):
        load_eval_set(path)


def test_load_eval_set_bad_header(tmp_path):
    path = pairs_csv(tmp_path, [("a", "b", "ally")], header="x,y,z")
    with pytest.raises(EvalSetError, match="header"):
        load_eval_set(path)


# scoring protocol ----------------------------------------------------------------

def test_score_partition_verdicts():
    p = partition({"a", "b"}, {"c"})
    pairs = [
        EvaluationPair.make("a", "c", "enemy"),   # opposite -> correct
        EvaluationPair.make("a", "b", "ally"),    # same -> correct
        EvaluationPair.make("b", "c", "ally"),    # opposite -> wrong
        EvaluationPair.make("a", "x", "enemy"),   # x unplaced -> missing
    ]
    report = score_partition(p, pairs)
    assert report.correct_count == 2
    assert report.wrong_count == 1
    assert report.missing_count == 1
    assert report.total == 4
    assert report.accuracy == 0.5
    by_pair = {(v.a, v.b): v for v in report.verdicts}
    assert by_pair[("a", "c")].predicted == "opposite"
    assert by_pair[("a", "x")].verdict == "missing"


def test_score_partition_empty_set2_makes_enemies_wrong():
    p = partition({"a", "b", "c"}, set())
    report = score_partition(p, [EvaluationPair.make("a", "b", "enemy")])
    assert report.correct_count == 0
    assert report.wrong_count == 1


def test_score_partition_swap_symmetry():
    p = partition({"a", "b"}, {"c", "d"})
    swapped = partition({"c", "d"}, {"a", "b"})
    pairs = [
        EvaluationPair.make("a", "c", "enemy"),
        EvaluationPair.make("a", "b", "ally"),
        EvaluationPair.make("c", "d", "enemy"),
    ]
    assert score_partition(p, pairs).correct_count == score_partition(swapped, pairs).correct_count


def test_score_partition_monotone_in_correct_pairs():
    p = partition({"a", "b"}, {"c"})
    pairs = [EvaluationPair.make("a", "b", "ally")]
    base = score_partition(p, pairs)
    extended = score_partition(p, pairs + [EvaluationPair.make("a", "c", "enemy")])
    assert extended.correct_count == base.correct_count + 1
    assert extended.total == base.total + 1


def test_score_partition_empty_pairs_rejected():
    with pytest.raises(EvalSetError, match="empty"):
        score_partition(partition({"a"}, {"b"}), [])


def test_score_partition_overlapping_sets_rejected():
    p = partition({"a", "b"}, {"b", "c"})
    with pytest.raises(InputError, match="overlap"):
        score_partition(p, [EvaluationPair.make("a", "b", "ally")])


# bundled benchmark ----------------------------------------------------------------

def test_bundled_fixture_counts():
    pairs = load_known_pairs()
    assert len(pairs) == 43
    assert sum(p.relation == "enemy" for p in pairs) == 25
    assert sum(p.relation == "ally" for p in pairs) == 18
    part = load_reference_partition()
    assert len(part.set1) == 99
    assert len(part.set2) == 98


def test_bundled_fixture_scores_32_of_43():
    report = score_partition(load_reference_partition(), load_known_pairs())
    assert report.correct_count == 32
    assert report.total == 43
    assert report.missing_count == 0
    assert report.accuracy == 32 / 43


def test_bundled_fixture_known_misses():
    report = score_partition(load_reference_partition(), load_known_pairs())
    wrong = {(v.a, v.b) for v in report.verdicts if v.verdict == "wrong"}
    assert ("north-korea", "south-korea") in wrong
    assert ("israel", "palestine") in wrong
    assert ("israel", "united-states") in wrong
    assert len(wrong) == 11


# report files ----------------------------------------------------------------------

def test_report_csv_and_json(tmp_path):
    p = partition({"a", "b"}, {"c"})
    report = score_partition(p, [
        EvaluationPair.make("a", "c", "enemy"),
        EvaluationPair.make("b", "c", "ally"),
    ])
    csv_path = tmp_path / "report.csv"
    write_report_csv(report, csv_path)
    with open(csv_path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["a", "b", "relation", "expected", "predicted", "result"]
    assert rows[1] == ["a", "c", "enemy", "opposite", "opposite", "right"]
    assert rows[2] == ["b", "c", "ally", "same", "opposite", "wrong"]

    json_path = tmp_path / "report.json"
    write_report_json(report, json_path)
    summary = json.loads(json_path.read_text())
    assert summary == {"correct": 1, "wrong": 1, "missing": 0, "total": 2, "accuracy": 0.5}
