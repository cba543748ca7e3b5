"""Bundled benchmark fixtures and deterministic synthetic datasets.

Ships a reference 197-nation bipartition with a curated 43-pair ally/enemy
ground-truth set (the evaluation benchmark), plus a generator for synthetic
raw datasets used by the end-to-end tests. The generator draws only from
``Generator.random`` and ``Generator.integers`` so its output is stable
across numpy versions; the bundled synthetic files can always be regenerated
bit-for-bit.
"""

from __future__ import annotations

import itertools
from importlib import resources

import numpy as np

from .coalition import CoalitionResult, load_partition_json
from .evaluate import EvaluationPair, load_eval_set
from .ingest import FactorRecord, FactorStats, normalize_records
from .scoring import build_graph

SYNTHETIC30_SEED = 7


def _data_path(name: str):
    return resources.files("balancer.data") / name


def reference_partition_path():
    return _data_path("reference_partition.json")


def known_pairs_path():
    return _data_path("known_pairs.csv")


def synthetic30_path():
    return _data_path("synthetic30.csv")


def synthetic30_pairs_path():
    return _data_path("synthetic30_pairs.csv")


def load_reference_partition() -> CoalitionResult:
    """The bundled 197-nation two-coalition reference split."""
    return load_partition_json(reference_partition_path())


def load_known_pairs() -> list[EvaluationPair]:
    """The bundled 43 ally/enemy ground-truth pairs."""
    return load_eval_set(known_pairs_path())


def reference_nation_names() -> list[str]:
    """All 197 nation names of the reference partition, sorted."""
    partition = load_reference_partition()
    return sorted(partition.set1 | partition.set2)


def synthetic_records(names: list[str], seed: int) -> list[FactorRecord]:
    """A full directed dataset over ``names`` with plausible factor mixes.

    Pair-level facts (wars, borders, treaties, court cases, conflicts) are
    symmetric; trade volumes differ per direction and the exchange ratio of
    the reverse direction is the reciprocal. Deterministic for a seed.
    """
    if len(names) < 2:
        raise ValueError("need at least two nations")
    rng = np.random.default_rng(seed)
    records = []
    for a, b in itertools.combinations(sorted(names), 2):
        war = int(rng.random() < 0.08)
        icj = int(rng.random() < 0.05)
        treaty = int(rng.random() < 0.15) if war else int(rng.random() < 0.05)
        border = (-1, 0, 0, 0, 1, 2)[rng.integers(6)]
        religious = int(rng.random() < 0.35) * int(rng.integers(1, 5))
        diplomatic = int(rng.random() < 0.75)
        ratio = round(10.0 ** (rng.random() * 2.0 - 1.0), 6)

        def trade() -> float:
            if rng.random() < 0.05:
                return 0.0
            return round(10.0 ** (6.0 + 6.0 * rng.random()), 2)

        for source, target, xr in ((a, b, ratio), (b, a, round(1.0 / ratio, 6))):
            records.append(
                FactorRecord(
                    source=source,
                    target=target,
                    export=trade(),
                    import_=trade(),
                    religious_conflicts=religious,
                    diplomatic=diplomatic,
                    war=war,
                    border=border,
                    icj_case=icj,
                    peace_treaty=treaty,
                    exchange_rate_ratio=xr,
                )
            )
    return records


def synthetic_eval_pairs(names: list[str], seed: int, count: int = 20) -> list[EvaluationPair]:
    """Label ``count`` random pairs ally/enemy from the pre-balance edge sign.

    Circular by construction; these pairs exercise the evaluation plumbing for
    end-to-end runs, they are not ground truth.
    """
    records = synthetic_records(names, seed)
    normalized = normalize_records(records, FactorStats.from_records(records))
    g = build_graph(normalized)
    rng = np.random.default_rng(seed + 1)
    pairs_all = list(itertools.combinations(range(g.n), 2))
    chosen = rng.permutation(len(pairs_all))[: min(count, len(pairs_all))]
    out = []
    for k in sorted(int(i) for i in chosen):
        a, b = pairs_all[k]
        relation = "ally" if g.weight(a, b) >= 0 else "enemy"
        out.append(EvaluationPair.make(g.names[a], g.names[b], relation))
    return sorted(out, key=lambda p: (p.a, p.b))


def synthetic30_names() -> list[str]:
    return [f"nation-{i:02d}" for i in range(30)]
