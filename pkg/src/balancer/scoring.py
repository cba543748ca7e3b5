"""Directed relationship scores and their merge into a signed graph.

The score of a directed pair is a fixed linear combination of its normalized
factors: trade, open borders, diplomacy, treaties, and a favorable exchange
ratio push it up; wars, court cases, and religious conflicts push it down.
The two directions of a pair are then merged into one undirected edge weight.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, fields
from typing import Iterable

from .errors import InputError
from .graph import SignedEdge, SignedGraph
from .ingest import NormalizedRecord
from ._io import atomic_write


MERGE_RULES = ("mean", "sum", "min")


@dataclass(frozen=True)
class CoefficientSet:
    """Nonnegative weight per factor; sign of contribution is fixed by the score."""

    e: float  # export
    i: float  # import
    r: float  # religious conflicts
    d: float  # diplomatic relations
    w: float  # past wars
    b: float  # border openness
    c: float  # international court cases
    p: float  # peace treaties
    x: float  # exchange-rate ratio

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if not math.isfinite(value) or value < 0:
                raise InputError(f"coefficient {f.name!r} must be a nonnegative real, got {value}")

    @classmethod
    def from_file(cls, path, defaults: "CoefficientSet | None" = None) -> "CoefficientSet":
        """Read ``name = value`` lines; unknown names are errors, omitted names
        keep their default."""
        base = defaults if defaults is not None else DEFAULT_COEFFICIENTS
        values = {f.name: getattr(base, f.name) for f in fields(cls)}
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                text = line.split("#", 1)[0].strip()
                if not text:
                    continue
                if "=" not in text:
                    raise InputError(f"{path}:{lineno}: expected 'name = value', got {line!r}")
                name, _, raw = text.partition("=")
                name = name.strip()
                if name not in values:
                    raise InputError(
                        f"{path}:{lineno}: unknown coefficient {name!r}; "
                        f"expected one of {sorted(values)}"
                    )
                try:
                    values[name] = float(raw.strip())
                except ValueError:
                    raise InputError(f"{path}:{lineno}: bad value {raw.strip()!r}") from None
        return cls(**values)


# Default weighting of the nine factors.
DEFAULT_COEFFICIENTS = CoefficientSet(
    e=5.0, i=5.0, r=2.0, d=0.8, w=3.0, b=2.0, c=0.5, p=0.125, x=0.5
)


@dataclass(frozen=True)
class DirectedScore:
    source: str
    target: str
    value: float


def score_directed(rec: NormalizedRecord, coef: CoefficientSet = DEFAULT_COEFFICIENTS) -> DirectedScore:
    """Linear score of one normalized directed record."""
    value = (
        coef.e * rec.export
        + coef.i * rec.import_
        + coef.b * rec.border
        + coef.d * rec.diplomatic
        + coef.p * rec.peace_treaty
        + coef.x * rec.exchange_rate_ratio
        - coef.w * rec.war
        - coef.c * rec.icj_case
        - coef.r * rec.religious_conflicts
    )
    if not math.isfinite(value):
        raise InputError(
            f"non-finite score for pair ({rec.source}, {rec.target}); check input factors"
        )
    return DirectedScore(rec.source, rec.target, value)


def merge_undirected(forward: DirectedScore, backward: DirectedScore, rule: str = "mean") -> SignedEdge:
    """Combine the two directed scores of a pair into one undirected weight.

    ``mean`` preserves the score scale and is the default; ``sum`` and ``min``
    are provided for sensitivity studies. Symmetric in argument order.
    """
    if (forward.source, forward.target) != (backward.target, backward.source):
        raise InputError(
            f"cannot merge mismatched pairs ({forward.source}, {forward.target}) "
            f"and ({backward.source}, {backward.target})"
        )
    if rule == "mean":
        weight = (forward.value + backward.value) / 2.0
    elif rule == "sum":
        weight = forward.value + backward.value
    elif rule == "min":
        weight = min(forward.value, backward.value)
    else:
        raise InputError(f"unknown merge rule {rule!r}; expected one of {MERGE_RULES}")
    a, b = sorted((forward.source, forward.target))
    return SignedEdge(a, b, weight)


def build_graph(
    records: Iterable[NormalizedRecord],
    coef: CoefficientSet = DEFAULT_COEFFICIENTS,
    *,
    merge: str = "mean",
) -> SignedGraph:
    """Score every directed record and assemble the complete signed graph.

    Nation indices are assigned by sorted name. Every ordered pair of the
    nation set must be present exactly once; gaps are reported by name.
    """
    recs = list(records)
    names = sorted({r.source for r in recs} | {r.target for r in recs})
    if len(names) < 2:
        raise InputError("need at least two nations to build a graph")
    g = SignedGraph(names)
    by_pair: dict[tuple[int, int], DirectedScore] = {}
    for rec in recs:
        key = (g.index_of(rec.source), g.index_of(rec.target))
        if key in by_pair:
            raise InputError(f"duplicate directed pair ({rec.source}, {rec.target})")
        by_pair[key] = score_directed(rec, coef)

    missing = [
        (names[a], names[b])
        for a in range(g.n)
        for b in range(g.n)
        if a != b and (a, b) not in by_pair
    ]
    if missing:
        sample = ", ".join(f"({s}, {t})" for s, t in missing[:10])
        more = "" if len(missing) <= 10 else f" and {len(missing) - 10} more"
        raise InputError(f"missing directed pairs: {sample}{more}")

    for a in range(g.n - 1):
        for b in range(a + 1, g.n):
            edge = merge_undirected(by_pair[(a, b)], by_pair[(b, a)], merge)
            g.set_weight(a, b, edge.weight)
    return g


def directed_scores(
    records: Iterable[NormalizedRecord], coef: CoefficientSet = DEFAULT_COEFFICIENTS
) -> list[DirectedScore]:
    """Score all records, sorted by (source, target) for stable output."""
    return sorted(
        (score_directed(rec, coef) for rec in records),
        key=lambda s: (s.source, s.target),
    )


def write_directed_scores_csv(scores: Iterable[DirectedScore], path) -> None:
    with atomic_write(path, newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("source", "target", "score"))
        for s in scores:
            writer.writerow((s.source, s.target, repr(s.value)))
