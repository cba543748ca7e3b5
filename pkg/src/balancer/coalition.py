"""Two-coalition extraction from a near-balanced signed graph.

Starting from a seed nation placed in coalition 1, nations are expanded
breadth-first through two queues, one per coalition. Each dequeued nation
recruits its strongest still-unassigned positive neighbor into its own
coalition and pushes its strongest negative neighbor into the opposite one.
Nations the expansion never reaches are assigned afterwards to whichever
coalition their summed edge weights favor. A sweep runs the expansion from
every start nation and keeps the partition that scores best against a known
ally/enemy pair list.
"""

from __future__ import annotations

import json
import logging
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .errors import InputError
from .evaluate import EvaluationPair, score_partition
from .graph import SignedGraph, edge_sign, normalize_name
from ._io import atomic_write

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Assignment:
    """Why one nation landed where it did, in placement order."""

    nation: str
    coalition: int  # 1 or 2
    reason: str  # "start", "ally-of:<name>", "enemy-of:<name>", "leftover"


@dataclass
class CoalitionResult:
    """A bipartition of the nation set with its provenance.

    ``set1`` and ``set2`` are disjoint and together cover every nation;
    the start nation is always in ``set1``. ``eval_score`` is filled in by
    the sweep (correct pairs against the evaluation set).
    """

    set1: frozenset[str]
    set2: frozenset[str]
    start: str | None
    eval_score: int | None = None
    assignment_order: list[Assignment] | None = None

    def side_of(self, name: str) -> int | None:
        if name in self.set1:
            return 1
        if name in self.set2:
            return 2
        return None

    def to_json_dict(self) -> dict:
        return {
            "set1": sorted(self.set1),
            "set2": sorted(self.set2),
            "start": self.start,
            "eval_score": self.eval_score,
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "CoalitionResult":
        try:
            set1 = frozenset(normalize_name(str(x)) for x in data["set1"])
            set2 = frozenset(normalize_name(str(x)) for x in data["set2"])
        except (KeyError, TypeError) as exc:
            raise InputError(f"partition JSON needs 'set1' and 'set2' arrays: {exc}") from None
        overlap = set1 & set2
        if overlap:
            raise InputError(f"partition sets overlap: {sorted(overlap)[:5]}")
        start = data.get("start")
        return cls(
            set1=set1,
            set2=set2,
            start=normalize_name(str(start)) if start else None,
            eval_score=data.get("eval_score"),
        )


def _strongest_neighbors(
    g: SignedGraph, country: int, unassigned: np.ndarray
) -> tuple[int | None, int | None]:
    """Indices of the strongest positive and strongest negative unassigned
    neighbors of ``country``; zero-weight edges qualify for neither.

    Weight ties break toward the lexicographically smaller nation name.
    """
    row = g.row_weights(country)
    candidates = np.flatnonzero(unassigned)
    candidates = candidates[candidates != country]
    if len(candidates) == 0:
        return None, None
    weights = row[candidates]

    def best(mask: np.ndarray, maximize: bool) -> int | None:
        picks = candidates[mask]
        if len(picks) == 0:
            return None
        vals = weights[mask]
        extreme = vals.max() if maximize else vals.min()
        tied = picks[vals == extreme]
        return int(min(tied, key=lambda idx: g.names[idx]))

    return best(weights > 0, maximize=True), best(weights < 0, maximize=False)


def single_append(
    g: SignedGraph, country: int, set1: set[int], set2: set[int]
) -> tuple[int | None, int | None]:
    """One expansion step: recruit ``country``'s strongest free neighbors.

    The strongest positive neighbor joins ``country``'s own coalition and the
    strongest negative neighbor joins the opposite one; either may be absent.
    Mutates the sets in place and returns (positive, negative) picks.
    ``country`` must already be assigned.
    """
    if country in set1:
        own, other = set1, set2
    elif country in set2:
        own, other = set2, set1
    else:
        raise ValueError(f"country {country} is not assigned to either coalition yet")
    unassigned = np.ones(g.n, dtype=bool)
    assigned = list(set1 | set2)
    unassigned[assigned] = False
    pos, neg = _strongest_neighbors(g, country, unassigned)
    if pos is not None:
        own.add(pos)
    if neg is not None:
        other.add(neg)
    return pos, neg


def see_coalitions(g: SignedGraph, start: int | str) -> CoalitionResult:
    """Grow two coalitions outward from ``start``.

    Double-queue breadth-first expansion: each loop turn processes the head
    of the coalition-1 queue and then the head of the coalition-2 queue.
    A nation recruited as an ally is enqueued on its recruiter's queue, an
    enemy on the opposite queue, so every nation is dequeued at most once.
    Unreached nations are then assigned, in name order, to the coalition
    maximizing their summed edge weight into it.
    """
    s = g.index_of(start) if isinstance(start, str) else int(start)
    if not 0 <= s < g.n:
        raise InputError(f"start index {s} out of range for {g.n} nations")
    set1: set[int] = {s}
    set2: set[int] = set()
    order = [Assignment(g.names[s], 1, "start")]
    queue1: deque[int] = deque([s])
    queue2: deque[int] = deque()

    def expand(country: int, own_queue: deque[int], other_queue: deque[int]) -> None:
        recruiter = g.names[country]
        pos, neg = single_append(g, country, set1, set2)
        if pos is not None:
            own_queue.append(pos)
            order.append(
                Assignment(g.names[pos], 1 if pos in set1 else 2, f"ally-of:{recruiter}")
            )
        if neg is not None:
            other_queue.append(neg)
            order.append(
                Assignment(g.names[neg], 1 if neg in set1 else 2, f"enemy-of:{recruiter}")
            )

    while queue1 or queue2:
        if queue1:
            expand(queue1.popleft(), queue1, queue2)
        if queue2:
            expand(queue2.popleft(), queue2, queue1)

    leftovers = sorted(set(range(g.n)) - set1 - set2, key=lambda idx: g.names[idx])
    for idx in leftovers:
        row = g.row_weights(idx)
        # sorted gather pins the float summation order for reproducibility
        pull1 = float(row[sorted(set1)].sum()) if set1 else 0.0
        pull2 = float(row[sorted(set2)].sum()) if set2 else 0.0
        side = set1 if pull1 >= pull2 else set2
        side.add(idx)
        order.append(Assignment(g.names[idx], 1 if side is set1 else 2, "leftover"))

    return CoalitionResult(
        set1=frozenset(g.names[i] for i in set1),
        set2=frozenset(g.names[i] for i in set2),
        start=g.names[s],
        assignment_order=order,
    )


class StartScore(NamedTuple):
    start: str
    eval_score: int
    set1_size: int
    set2_size: int


def sweep_starts(
    g: SignedGraph,
    pairs: Sequence[EvaluationPair],
    *,
    jobs: int = 1,
) -> tuple[CoalitionResult, list[StartScore]]:
    """Run the expansion from every nation and keep the best-scoring partition.

    Score ties break toward the lexicographically smallest start name, so the
    result does not depend on evaluation order (the sweep may fan out over
    threads). Returns the winner plus the full per-start score table in start
    name order.
    """
    if g.n == 0:
        raise InputError("cannot sweep an empty graph")

    def one(idx: int) -> CoalitionResult:
        result = see_coalitions(g, idx)
        report = score_partition(result, pairs)
        result.eval_score = report.correct_count
        return result

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(one, range(g.n)))
    else:
        results = [one(idx) for idx in range(g.n)]

    results.sort(key=lambda r: r.start)
    best = max(results, key=lambda r: r.eval_score)  # max is stable: first = smallest name
    table = [
        StartScore(r.start, r.eval_score, len(r.set1), len(r.set2)) for r in results
    ]
    log.info("sweep: best start %s with %d correct pairs", best.start, best.eval_score)
    return best, table


# exports ---------------------------------------------------------------------


def write_partition_json(result: CoalitionResult, path) -> None:
    with atomic_write(path) as fh:
        json.dump(result.to_json_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_partition_json(path) -> CoalitionResult:
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InputError(f"{path}: invalid JSON: {exc}") from None
    return CoalitionResult.from_json_dict(data)


def write_partition_csv(result: CoalitionResult, path) -> None:
    """Two-column ``nation,set`` listing, sorted by nation name."""
    rows = [(name, 1) for name in result.set1] + [(name, 2) for name in result.set2]
    rows.sort()
    with atomic_write(path, newline="") as fh:
        fh.write("nation,set\n")
        for name, side in rows:
            fh.write(f"{name},{side}\n")


def write_start_scores_csv(table: Iterable[StartScore], path) -> None:
    with atomic_write(path, newline="") as fh:
        fh.write("start,eval_score,set1_size,set2_size\n")
        for row in table:
            fh.write(f"{row.start},{row.eval_score},{row.set1_size},{row.set2_size}\n")


def to_dot(
    g: SignedGraph,
    partition: CoalitionResult | None = None,
    subset: Sequence[str] | None = None,
) -> str:
    """Graphviz DOT text for the graph, styled by coalition and edge sign.

    Coalition-1 nodes are gold, coalition-2 nodes light green, unassigned
    nodes gray; positive edges blue, negative edges red. ``subset`` restricts
    the output to the induced subgraph on the named nations.
    """
    if subset is not None:
        indices = sorted(g.index_of(name) for name in subset)
        if not indices:
            raise InputError("subset selects no nations")
    else:
        indices = list(range(g.n))
    keep = set(indices)

    def node_attrs(name: str) -> str:
        side = partition.side_of(name) if partition is not None else None
        if side == 1:
            return 'style=filled, fillcolor="gold", coalition="1"'
        if side == 2:
            return 'style=filled, fillcolor="lightgreen", coalition="2"'
        return 'style=filled, fillcolor="gray90"'

    lines = ["graph coalitions {"]
    for idx in indices:
        name = g.names[idx]
        lines.append(f'  "{name}" [{node_attrs(name)}];')
    for a, b, w in g.edges():
        if a in keep and b in keep:
            color = "blue" if edge_sign(w) > 0 else "red"
            lines.append(f'  "{g.names[a]}" -- "{g.names[b]}" [color={color}];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def write_dot(g: SignedGraph, path, partition=None, subset=None) -> None:
    with atomic_write(path) as fh:
        fh.write(to_dot(g, partition, subset))
