"""Randomized triangle-flip dynamics that drive a signed graph toward balance.

Each step draws an unstable triangle uniformly at random (rejection sampling
over the full triangle list, with an index-scan fallback when unstable
triangles become rare) and toggles the sign of its least-magnitude edge:

* a negative edge turns positive with weight ``|w_a| + |w_b|``, the combined
  magnitude of the other two edges;
* a positive edge turns negative with weight ``-(|w_a| + |w_b| - |w_old|)``,
  clamped away from zero so the new sign is well defined.

The flipped triangle is always stable afterwards, but the other triangles
through that edge toggle too, so the global unstable count may rise; the loop
stops at a configurable unstable-count threshold or when the flip budget runs
out. The unstable count is maintained incrementally (an edge lies in exactly
n - 2 triangles) and can be audited against a full recount.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass
from math import comb
from typing import NamedTuple, Sequence

import numpy as np

from .errors import InputError, InvariantError
from .graph import (
    SignedGraph,
    Triangle,
    TriangleTable,
    count_unstable,
    edge_sign,
    triangle_node_array,
    triangle_rank,
    triangle_state,
    triangle_state_codes,
)
from ._io import atomic_write

log = logging.getLogger(__name__)

# Stop once unstable/total falls to this fraction: the 500,000-of-1,254,890
# stopping rule at full scale, carried over as a ratio so it rescales with n.
DEFAULT_THRESHOLD_FRACTION = 500_000 / 1_254_890


@dataclass
class BalanceConfig:
    """Knobs for one balance run; identical config + graph means identical run."""

    seed: int = 0
    threshold_fraction: float = DEFAULT_THRESHOLD_FRACTION
    max_flips: int | None = None  # None: 10 * C(n, 3)
    max_rejections_per_draw: int = 64
    min_magnitude: float = 1e-6
    trace_every: int = 1000
    audit: bool = False
    audit_every: int = 10_000

    def __post_init__(self):
        if not 0.0 <= self.threshold_fraction <= 1.0:
            raise InputError(
                f"threshold_fraction must be in [0, 1], got {self.threshold_fraction}"
            )
        if self.min_magnitude <= 0:
            raise InputError(f"min_magnitude must be positive, got {self.min_magnitude}")
        if self.max_rejections_per_draw < 1:
            raise InputError("max_rejections_per_draw must be >= 1")
        if self.max_flips is not None and self.max_flips < 0:
            raise InputError("max_flips must be >= 0")


@dataclass
class BalanceTrace:
    """What a balance run did: flip count, sampled history, and the endpoint."""

    flips_applied: int
    unstable_history: list[tuple[int, int]]  # (flip index, unstable count)
    final_unstable: int
    final_ratio: float  # stable / total
    terminated_by: str  # "threshold" or "budget"


class FlipResult(NamedTuple):
    edge: tuple[int, int]
    new_weight: float


def threshold_count(fraction: float, total: int) -> int:
    """Unstable-count stop level for a given fraction of ``total`` triangles.

    Ceiling of fraction * total, with a snap to the nearest integer first so
    that exact ratios (e.g. 500000/1254890 of 1254890) survive float rounding.
    """
    target = fraction * total
    nearest = round(target)
    if abs(target - nearest) <= 1e-9 * max(1.0, abs(target)):
        return int(nearest)
    return math.ceil(target)


def flip_least_edge(
    g: SignedGraph, tri: Triangle | Sequence[int], min_magnitude: float = 1e-6
) -> FlipResult:
    """Toggle the least-|weight| edge of an unstable triangle.

    Ties on |weight| break toward the smaller pair index. Raises ValueError
    if the triangle is already stable (caller bug).
    """
    nodes = tri.nodes if isinstance(tri, Triangle) else tuple(tri)
    a, b, c = sorted(int(v) for v in nodes)
    if not (a < b < c):
        raise ValueError(f"triangle nodes must be distinct, got {nodes}")
    pairs = ((a, b), (a, c), (b, c))
    weights = [g.weight(u, v) for u, v in pairs]
    if triangle_state(g, a, b, c).stable:
        raise ValueError(f"triangle {(a, b, c)} is already stable; nothing to flip")

    least = min(range(3), key=lambda k: (abs(weights[k]), g.pair_index(*pairs[k])))
    w_old = weights[least]
    others = [abs(weights[k]) for k in range(3) if k != least]
    if edge_sign(w_old) < 0:
        new_weight = others[0] + others[1]
    else:
        new_weight = -max(min_magnitude, others[0] + others[1] - abs(w_old))
    u, v = pairs[least]
    g.set_weight(u, v, new_weight)
    if not triangle_state(g, a, b, c).stable:
        raise InvariantError(f"triangle {(a, b, c)} still unstable after flipping ({u}, {v})")
    return FlipResult((u, v), new_weight)


class BalanceState:
    """Incremental unstable-triangle bookkeeping for one mutable graph.

    Holds the shared triangle node table, a per-triangle unstable bitmap, and
    the running unstable count. ``pick`` classifies candidates from live edge
    weights; the bitmap serves the rare-unstable fallback scan and is kept in
    sync by :meth:`apply_flip`.
    """

    def __init__(self, graph: SignedGraph):
        self.graph = graph
        self.tri_nodes = triangle_node_array(graph.n)
        self.unstable = (triangle_state_codes(graph, self.tri_nodes) % 2).astype(bool)
        self.unstable_count = int(self.unstable.sum())
        self.total = len(self.tri_nodes)

    def _is_unstable(self, rank: int) -> bool:
        a, b, c = self.tri_nodes[rank]
        w = self.graph._weights
        pm = self.graph._pair_matrix
        negatives = int(w[pm[a, b]] < 0) + int(w[pm[a, c]] < 0) + int(w[pm[b, c]] < 0)
        return negatives % 2 == 1

    def pick(self, rng: np.random.Generator, max_rejections: int = 64) -> int | None:
        """Rank of a uniformly drawn unstable triangle, or None if none remain.

        Rejection-samples against live edge signs; after ``max_rejections``
        misses, falls back to a uniform draw over the maintained index.
        """
        if self.unstable_count == 0:
            return None
        for _ in range(max_rejections):
            rank = int(rng.integers(self.total))
            if self._is_unstable(rank):
                return rank
        candidates = np.flatnonzero(self.unstable)
        return int(candidates[rng.integers(len(candidates))])

    def triangle_at(self, rank: int) -> tuple[int, int, int]:
        a, b, c = self.tri_nodes[rank]
        return int(a), int(b), int(c)

    def apply_flip(self, rank: int, min_magnitude: float = 1e-6) -> FlipResult:
        """Flip the picked triangle's least edge and resync affected triangles."""
        result = flip_least_edge(self.graph, self.triangle_at(rank), min_magnitude)
        self.update_edge(*result.edge)
        if self.unstable[rank]:
            raise InvariantError(f"triangle rank {rank} still marked unstable after flip")
        return result

    def update_edge(self, a: int, b: int) -> int:
        """Reclassify the n - 2 triangles containing edge (a, b).

        Returns the change in the unstable count; the bitmap and count are
        updated in place.
        """
        g = self.graph
        n = g.n
        if n < 3:
            return 0
        if a > b:
            a, b = b, a
        # Sorted triples {a, b, c} over all c, built segment-wise so no sort
        # is needed: c < a, a < c < b, c > b.
        arange = np.arange(n, dtype=np.int64)
        triples = np.empty((n - 2, 3), dtype=np.int64)
        triples[:a, 0] = arange[:a]
        triples[:a, 1] = a
        triples[:a, 2] = b
        mid = b - a - 1
        triples[a : a + mid, 0] = a
        triples[a : a + mid, 1] = arange[a + 1 : b]
        triples[a : a + mid, 2] = b
        triples[a + mid :, 0] = a
        triples[a + mid :, 1] = b
        triples[a + mid :, 2] = arange[b + 1 :]
        ranks = triangle_rank(triples, n)
        neg = g._weights < 0
        pm = g._pair_matrix
        codes = neg[pm[triples[:, 0], triples[:, 1]]].astype(np.int8)
        codes += neg[pm[triples[:, 0], triples[:, 2]]]
        codes += neg[pm[triples[:, 1], triples[:, 2]]]
        now_unstable = (codes % 2).astype(bool)
        delta = int(now_unstable.sum()) - int(self.unstable[ranks].sum())
        self.unstable[ranks] = now_unstable
        self.unstable_count += delta
        return delta

    def audit(self) -> None:
        """Compare incremental state against a full recount; raise on mismatch."""
        recount = count_unstable(self.graph)
        fresh = (triangle_state_codes(self.graph, self.tri_nodes) % 2).astype(bool)
        if recount.unstable != self.unstable_count or not np.array_equal(fresh, self.unstable):
            raise InvariantError(
                f"incremental unstable count {self.unstable_count} disagrees with "
                f"full recount {recount.unstable}"
            )


def pick_unstable(
    g: SignedGraph,
    triangles: TriangleTable | np.ndarray | None,
    rng: np.random.Generator,
    max_rejections: int = 64,
) -> Triangle | None:
    """Uniformly draw one currently unstable triangle, or None if all are stable.

    ``triangles`` fixes the candidate list (its stored states are a snapshot
    and are ignored; classification always uses live weights). Rejection
    sampling up to ``max_rejections`` draws, then a direct scan.
    """
    nodes = (
        triangles.node_array
        if isinstance(triangles, TriangleTable)
        else triangles
        if triangles is not None
        else triangle_node_array(g.n)
    )
    total = len(nodes)
    if total == 0:
        return None
    for _ in range(max_rejections):
        rank = int(rng.integers(total))
        a, b, c = (int(v) for v in nodes[rank])
        state = triangle_state(g, a, b, c)
        if not state.stable:
            return Triangle((a, b, c), state)
    codes = triangle_state_codes(g, nodes)
    candidates = np.flatnonzero(codes % 2)
    if len(candidates) == 0:
        return None
    rank = int(candidates[rng.integers(len(candidates))])
    a, b, c = (int(v) for v in nodes[rank])
    return Triangle((a, b, c), triangle_state(g, a, b, c))


def run_balance(g: SignedGraph, cfg: BalanceConfig) -> BalanceTrace:
    """Run the flip loop on ``g`` in place until threshold or budget.

    Deterministic for a fixed (graph, config): all randomness comes from the
    seeded generator. The unstable history is sampled every
    ``cfg.trace_every`` flips plus the first and last step.
    """
    state = BalanceState(g)
    total = state.total
    stop_at = threshold_count(cfg.threshold_fraction, total)
    budget = cfg.max_flips if cfg.max_flips is not None else 10 * comb(g.n, 3)
    rng = np.random.default_rng(cfg.seed)

    history: list[tuple[int, int]] = [(0, state.unstable_count)]
    flips = 0
    terminated_by = "threshold"
    log.info(
        "balance start: n=%d, %d triangles, %d unstable, stop at %d, budget %d",
        g.n, total, state.unstable_count, stop_at, budget,
    )
    while state.unstable_count > stop_at:
        if flips >= budget:
            terminated_by = "budget"
            break
        rank = state.pick(rng, cfg.max_rejections_per_draw)
        if rank is None:  # unreachable while count > stop_at >= 0; kept as a guard
            break
        state.apply_flip(rank, cfg.min_magnitude)
        flips += 1
        if cfg.trace_every and flips % cfg.trace_every == 0:
            history.append((flips, state.unstable_count))
        if cfg.audit and cfg.audit_every and flips % cfg.audit_every == 0:
            state.audit()

    if cfg.audit:
        state.audit()
    if not history or history[-1][0] != flips:
        history.append((flips, state.unstable_count))
    ratio = 1.0 if total == 0 else (total - state.unstable_count) / total
    log.info(
        "balance done: %d flips, %d unstable left (ratio %.4f), by %s",
        flips, state.unstable_count, ratio, terminated_by,
    )
    return BalanceTrace(
        flips_applied=flips,
        unstable_history=history,
        final_unstable=state.unstable_count,
        final_ratio=ratio,
        terminated_by=terminated_by,
    )


def write_trace_csv(trace: BalanceTrace, path) -> None:
    with atomic_write(path, newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("flip_index", "unstable_count"))
        for flip_index, unstable in trace.unstable_history:
            writer.writerow((flip_index, unstable))
