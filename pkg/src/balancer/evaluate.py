"""Scoring a coalition partition against known ally/enemy nation pairs.

An enemy pair is predicted correctly when its members sit in opposite
coalitions, an ally pair when they share one. Pairs touching a nation absent
from both coalitions count as missing and still weigh down the accuracy.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import InputError
from .graph import normalize_name
from ._io import atomic_write

RELATIONS = ("ally", "enemy")


class EvalSetError(InputError):
    """An evaluation-pair file failed validation."""


@dataclass(frozen=True)
class EvaluationPair:
    """An unordered nation pair with its known relation; names stay sorted."""

    a: str
    b: str
    relation: str  # "ally" or "enemy"

    @classmethod
    def make(cls, a: str, b: str, relation: str) -> "EvaluationPair":
        a, b = sorted((normalize_name(a), normalize_name(b)))
        return cls(a, b, relation)

    @property
    def expected(self) -> str:
        return "same" if self.relation == "ally" else "opposite"


@dataclass(frozen=True)
class PairVerdict:
    a: str
    b: str
    relation: str
    expected: str  # "same" | "opposite"
    predicted: str  # "same" | "opposite" | "missing"
    verdict: str  # "correct" | "wrong" | "missing"


@dataclass
class EvaluationReport:
    verdicts: list[PairVerdict]
    correct_count: int
    wrong_count: int
    missing_count: int
    total: int
    accuracy: float


def load_eval_set(path) -> list[EvaluationPair]:
    """Load ``a,b,relation`` rows; duplicates collapse, conflicts are errors."""
    pairs: dict[tuple[str, str], EvaluationPair] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != ("a", "b", "relation"):
            raise EvalSetError(f"{path}: expected header a,b,relation")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != 3:
                raise EvalSetError(f"{path}: row {lineno}: expected 3 columns, got {len(row)}")
            relation = row[2].strip().lower()
            if relation not in RELATIONS:
                raise EvalSetError(
                    f"{path}: row {lineno}: unknown relation {row[2]!r}; expected ally or enemy"
                )
            pair = EvaluationPair.make(row[0], row[1], relation)
            if pair.a == pair.b:
                raise EvalSetError(f"{path}: row {lineno}: pair of a nation with itself")
            key = (pair.a, pair.b)
            if key in pairs and pairs[key].relation != relation:
                raise EvalSetError(
                    f"{path}: row {lineno}: pair ({pair.a}, {pair.b}) already listed "
                    f"as {pairs[key].relation!r}"
                )
            pairs[key] = pair
    if not pairs:
        raise EvalSetError(f"{path}: no evaluation pairs")
    return [pairs[key] for key in sorted(pairs)]


def score_partition(partition, pairs: Sequence[EvaluationPair]) -> EvaluationReport:
    """Judge every pair against a bipartition (anything with set1/set2 sets).

    Swapping the two coalition labels leaves the score unchanged; only
    same-versus-opposite membership matters.
    """
    if not pairs:
        raise EvalSetError("evaluation set is empty; accuracy is undefined")
    set1, set2 = partition.set1, partition.set2
    overlap = set(set1) & set(set2)
    if overlap:
        raise InputError(f"partition sets overlap on {sorted(overlap)[:5]}")

    def side(name: str) -> int | None:
        if name in set1:
            return 1
        if name in set2:
            return 2
        return None

    verdicts = []
    correct = wrong = missing = 0
    for pair in pairs:
        sa, sb = side(pair.a), side(pair.b)
        if sa is None or sb is None:
            predicted, verdict = "missing", "missing"
            missing += 1
        else:
            predicted = "same" if sa == sb else "opposite"
            if predicted == pair.expected:
                verdict = "correct"
                correct += 1
            else:
                verdict = "wrong"
                wrong += 1
        verdicts.append(
            PairVerdict(pair.a, pair.b, pair.relation, pair.expected, predicted, verdict)
        )
    total = len(pairs)
    return EvaluationReport(
        verdicts=verdicts,
        correct_count=correct,
        wrong_count=wrong,
        missing_count=missing,
        total=total,
        accuracy=correct / total,
    )


def write_report_csv(report: EvaluationReport, path) -> None:
    """Per-pair verdict table: pair, expected side, predicted side, result."""
    with atomic_write(path, newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("a", "b", "relation", "expected", "predicted", "result"))
        for v in report.verdicts:
            result = "right" if v.verdict == "correct" else v.verdict
            writer.writerow((v.a, v.b, v.relation, v.expected, v.predicted, result))


def write_report_json(report: EvaluationReport, path) -> None:
    summary = {
        "correct": report.correct_count,
        "wrong": report.wrong_count,
        "missing": report.missing_count,
        "total": report.total,
        "accuracy": report.accuracy,
    }
    with atomic_write(path) as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_eval_set_csv(pairs: Iterable[EvaluationPair], path) -> None:
    with atomic_write(path, newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("a", "b", "relation"))
        for pair in pairs:
            writer.writerow((pair.a, pair.b, pair.relation))
