"""Signed complete graph over a nation set, with triangle enumeration and
stability classification.

The graph is complete and undirected; edge weights are real scores whose sign
encodes the tie polarity (weight >= 0 reads positive). Triangles are stable
when they carry an even number of negative edges (all-positive, or one
positive and two negatives) and unstable otherwise.
"""

from __future__ import annotations

import csv
import functools
import unicodedata
from collections.abc import Sequence
from enum import Enum
from math import comb
from typing import Iterator, NamedTuple

import numpy as np

from .errors import InputError
from ._io import atomic_write


def normalize_name(name: str) -> str:
    """Canonical nation name: lowercase, diacritics stripped, spaces to hyphens.

    Idempotent: normalizing an already-normalized name returns it unchanged.
    """
    text = unicodedata.normalize("NFKD", name)
    text = "".join(ch for ch in text if not unicodedata.combining(ch))
    text = "-".join(text.lower().split())
    while "--" in text:
        text = text.replace("--", "-")
    return text.strip("-")


class NationId(NamedTuple):
    index: int
    name: str


class SignedEdge(NamedTuple):
    """Undirected weighted edge; endpoint names are stored in sorted order."""

    a: str
    b: str
    weight: float


class TriangleState(Enum):
    """Sign pattern of a triangle, keyed by its number of negative edges."""

    PPP = 0
    PPN = 1
    PNN = 2
    NNN = 3

    @property
    def stable(self) -> bool:
        return self.value % 2 == 0


def edge_sign(weight: float) -> int:
    """Sign of an edge weight; exactly zero reads positive."""
    return -1 if weight < 0 else 1


def classify(signs: Sequence[float]) -> TriangleState:
    """Classify a triangle from the signs (or raw weights) of its three edges.

    Invariant under permutation of the triple; total over all eight sign
    combinations.
    """
    if len(signs) != 3:
        raise ValueError(f"expected three edge signs, got {len(signs)}")
    negatives = sum(1 for s in signs if s < 0)
    return TriangleState(negatives)


class Triangle(NamedTuple):
    nodes: tuple[int, int, int]  # sorted node indices
    state: TriangleState


class SignedGraph:
    """Complete undirected signed graph with dense condensed-pair storage.

    Node identity is positional: index ``i`` maps to ``names[i]``. Weights
    live in a single array of length C(n, 2) indexed by :meth:`pair_index`.
    Reads are safe to share across threads; any mutation requires exclusive
    access (single-writer, enforced by callers).
    """

    def __init__(self, names: Sequence[str], weights: np.ndarray | None = None):
        canonical = [normalize_name(nm) for nm in names]
        seen: dict[str, int] = {}
        for i, nm in enumerate(canonical):
            if not nm:
                raise InputError(f"empty nation name at position {i}")
            if nm in seen:
                raise InputError(f"duplicate nation name {nm!r} (positions {seen[nm]} and {i})")
            seen[nm] = i
        self.names: tuple[str, ...] = tuple(canonical)
        self.n: int = len(canonical)
        self._index: dict[str, int] = seen
        n_pairs = comb(self.n, 2)
        if weights is None:
            self._weights = np.zeros(n_pairs, dtype=np.float64)
        else:
            arr = np.asarray(weights, dtype=np.float64)
            if arr.shape != (n_pairs,):
                raise InputError(f"expected {n_pairs} pair weights, got shape {arr.shape}")
            self._weights = arr.copy()

    # identity ------------------------------------------------------------

    def index_of(self, name: str) -> int:
        key = normalize_name(name)
        try:
            return self._index[key]
        except KeyError:
            raise InputError(f"unknown nation {name!r}") from None

    def nation(self, index: int) -> NationId:
        return NationId(index, self.names[index])

    @property
    def nations(self) -> list[NationId]:
        return [NationId(i, nm) for i, nm in enumerate(self.names)]

    @property
    def edge_count(self) -> int:
        return comb(self.n, 2)

    # weights -------------------------------------------------------------

    def pair_index(self, a: int, b: int) -> int:
        """Condensed index of the unordered pair (a, b); symmetric in its args."""
        if a == b:
            raise ValueError(f"self-pair ({a}, {b}) has no edge")
        if a > b:
            a, b = b, a
        return a * (2 * self.n - a - 1) // 2 + (b - a - 1)

    @functools.cached_property
    def _pair_matrix(self) -> np.ndarray:
        """(n, n) lookup of pair indices; the diagonal is self-referential junk."""
        n = self.n
        m = np.zeros((n, n), dtype=np.int64)
        a, b = np.triu_indices(n, 1)
        idx = a * (2 * n - a - 1) // 2 + (b - a - 1)
        m[a, b] = idx
        m[b, a] = idx
        return m

    def weight(self, a: int, b: int) -> float:
        return float(self._weights[self.pair_index(a, b)])

    def set_weight(self, a: int, b: int, value: float) -> None:
        if not np.isfinite(value):
            raise ValueError(f"non-finite weight {value!r} for pair ({a}, {b})")
        self._weights[self.pair_index(a, b)] = value

    def sign(self, a: int, b: int) -> int:
        return edge_sign(self._weights[self.pair_index(a, b)])

    def pair_indices(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Vectorized :meth:`pair_index` over index arrays."""
        return self._pair_matrix[a, b]

    def weights_between(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return self._weights[self._pair_matrix[a, b]]

    def row_weights(self, node: int) -> np.ndarray:
        """Weights from ``node`` to every other node; the self slot is 0."""
        if self.n < 2:
            return np.zeros(self.n, dtype=np.float64)
        row = self._weights[self._pair_matrix[node]]
        row[node] = 0.0
        return row

    def condensed_weights(self) -> np.ndarray:
        """Copy of the underlying pair-indexed weight array."""
        return self._weights.copy()

    def copy(self) -> "SignedGraph":
        return SignedGraph(self.names, self._weights)

    def edges(self) -> Iterator[tuple[int, int, float]]:
        """All edges as (a, b, weight) with a < b, in pair-index order."""
        n = self.n
        k = 0
        for a in range(n - 1):
            for b in range(a + 1, n):
                yield a, b, float(self._weights[k])
                k += 1

    def __repr__(self) -> str:
        return f"SignedGraph(n={self.n}, edges={self.edge_count})"


# triangle machinery -------------------------------------------------------


@functools.lru_cache(maxsize=4)
def triangle_node_array(n: int) -> np.ndarray:
    """All sorted node triples of a complete n-graph, lexicographic order.

    Shape (C(n, 3), 3), dtype int32. Cached: the 197-nation table is ~15 MB
    and is shared by enumeration, counting, and the balance engine.
    """
    if n < 3:
        return np.empty((0, 3), dtype=np.int32)
    blocks = []
    for i in range(n - 2):
        jj, kk = np.triu_indices(n - i - 1, 1)
        block = np.empty((jj.size, 3), dtype=np.int32)
        block[:, 0] = i
        block[:, 1] = jj + i + 1
        block[:, 2] = kk + i + 1
        blocks.append(block)
    out = np.vstack(blocks)
    out.setflags(write=False)
    return out


def triangle_rank(nodes: np.ndarray, n: int) -> np.ndarray:
    """Position of sorted triples in the lexicographic enumeration.

    ``nodes`` is (..., 3) with each row sorted ascending. Inverse of row
    lookup into :func:`triangle_node_array`.
    """
    nodes = np.asarray(nodes, dtype=np.int64)
    x, y, z = nodes[..., 0], nodes[..., 1], nodes[..., 2]
    m = n - x  # triples starting at >= x form a suffix of C(m, 3) entries
    offset = comb(n, 3) - m * (m - 1) * (m - 2) // 6
    i = y - x - 1
    rest = n - x - 1
    return offset + i * (2 * rest - i - 1) // 2 + (z - y - 1)


def triangle_state_codes(g: SignedGraph, nodes: np.ndarray | None = None) -> np.ndarray:
    """Negative-edge count (0..3) per triangle, from the current weights.

    The code doubles as the :class:`TriangleState` value; odd codes are
    unstable.
    """
    if nodes is None:
        nodes = triangle_node_array(g.n)
    if len(nodes) == 0:
        return np.empty(0, dtype=np.uint8)
    neg = g._weights < 0
    codes = neg[g.pair_indices(nodes[:, 0], nodes[:, 1])].astype(np.uint8)
    codes += neg[g.pair_indices(nodes[:, 0], nodes[:, 2])]
    codes += neg[g.pair_indices(nodes[:, 1], nodes[:, 2])]
    return codes


def triangle_state(g: SignedGraph, a: int, b: int, c: int) -> TriangleState:
    """Current state of one triangle, read directly from edge weights."""
    return classify((g.weight(a, b), g.weight(a, c), g.weight(b, c)))


_STATES_BY_CODE = (TriangleState.PPP, TriangleState.PPN, TriangleState.PNN, TriangleState.NNN)


class TriangleTable(Sequence):
    """Ordered, immutable sequence of all triangles of a graph snapshot.

    Backed by the node array and a per-triangle state code captured at
    enumeration time; :class:`Triangle` tuples are materialized on access.
    At 197 nations the table holds 1,254,890 entries, so bulk consumers
    should use :attr:`node_array` / :attr:`state_codes` directly.
    """

    __slots__ = ("node_array", "state_codes")

    def __init__(self, node_array: np.ndarray, state_codes: np.ndarray):
        if len(node_array) != len(state_codes):
            raise ValueError("node and state arrays disagree in length")
        self.node_array = node_array
        self.state_codes = state_codes

    def __len__(self) -> int:
        return len(self.state_codes)

    def __getitem__(self, idx):
        if isinstance(idx, slice):
            return [self[i] for i in range(*idx.indices(len(self)))]
        nodes = self.node_array[idx]
        return Triangle(
            (int(nodes[0]), int(nodes[1]), int(nodes[2])),
            _STATES_BY_CODE[self.state_codes[idx]],
        )

    def __iter__(self) -> Iterator[Triangle]:
        states = self.state_codes.tolist()
        for row, code in zip(self.node_array.tolist(), states):
            yield Triangle((row[0], row[1], row[2]), _STATES_BY_CODE[code])

    def unstable_mask(self) -> np.ndarray:
        return (self.state_codes % 2).astype(bool)


def enumerate_triangles(g: SignedGraph) -> TriangleTable:
    """All C(n, 3) triangles in canonical order, classified by current signs.

    Canonical order is lexicographic by sorted node indices, so triangle
    lists from different code paths compare equal. n < 3 yields an empty
    table.
    """
    nodes = triangle_node_array(g.n)
    return TriangleTable(nodes, triangle_state_codes(g, nodes))


class UnstableCount(NamedTuple):
    unstable: int
    stable_ratio: float


def count_unstable(g: SignedGraph) -> UnstableCount:
    """Full recount of unstable triangles plus the stable/total ratio.

    This is the brute-force path: every triangle is reclassified from the
    current edge weights. An empty triangle set (n < 3) reports ratio 1.0.
    """
    codes = triangle_state_codes(g)
    total = len(codes)
    unstable = int(np.count_nonzero(codes % 2))
    ratio = 1.0 if total == 0 else (total - unstable) / total
    return UnstableCount(unstable, ratio)


# edge-list serialization ---------------------------------------------------

EDGE_HEADER = ("a", "b", "weight")


def write_edges_csv(g: SignedGraph, path) -> None:
    """Edge list ``a,b,weight`` in pair-index order; floats keep full precision."""
    with atomic_write(path, newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(EDGE_HEADER)
        for a, b, w in g.edges():
            writer.writerow((g.names[a], g.names[b], repr(w)))


def read_edges_csv(path) -> SignedGraph:
    """Load a complete-graph edge list written by :func:`write_edges_csv`.

    Nation indices are assigned by sorted name, so reloading a graph built
    through the scoring pipeline reproduces it exactly. Missing or duplicate
    pairs raise :class:`InputError`.
    """
    rows: list[tuple[str, str, float]] = []
    names: set[str] = set()
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != EDGE_HEADER:
            raise InputError(f"{path}: expected header {','.join(EDGE_HEADER)}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise InputError(f"{path}:{lineno}: expected 3 columns, got {len(row)}")
            a, b = normalize_name(row[0]), normalize_name(row[1])
            if a == b:
                raise InputError(f"{path}:{lineno}: self-edge {a!r}")
            try:
                w = float(row[2])
            except ValueError:
                raise InputError(f"{path}:{lineno}: bad weight {row[2]!r}") from None
            if not np.isfinite(w):
                raise InputError(f"{path}:{lineno}: non-finite weight {row[2]!r}")
            rows.append((a, b, w))
            names.add(a)
            names.add(b)
    g = SignedGraph(sorted(names))
    seen = np.zeros(g.edge_count, dtype=bool)
    for a, b, w in rows:
        k = g.pair_index(g.index_of(a), g.index_of(b))
        if seen[k]:
            raise InputError(f"{path}: duplicate edge ({a}, {b})")
        seen[k] = True
        g._weights[k] = w
    if not seen.all():
        a_all, b_all = np.triu_indices(g.n, 1)
        gaps = np.flatnonzero(~seen)
        sample = ", ".join(
            f"({g.names[a_all[k]]}, {g.names[b_all[k]]})" for k in gaps[:5]
        )
        raise InputError(
            f"{path}: incomplete graph, {len(gaps)} of {g.edge_count} pairs missing "
            f"(first: {sample})"
        )
    return g
