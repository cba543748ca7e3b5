"""Command-line front end for the full pipeline and its individual stages.

Subcommands mirror the stages (ingest, score, balance, coalitions, evaluate,
export); ``pipeline`` chains them and writes a manifest with the config echo
and SHA-256 digests of every input, so a finished run can be replayed
byte-for-byte with ``pipeline --manifest``. Exit codes: 0 success, 2 invalid
input or configuration, 3 internal invariant violation.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from .errors import InputError, InvariantError
from . import balance as balance_mod
from . import coalition as coalition_mod
from . import evaluate as evaluate_mod
from . import ingest as ingest_mod
from . import scoring as scoring_mod
from .graph import read_edges_csv, write_edges_csv
from ._io import atomic_write, sha256_file

STAGES = ("all", "ingest", "score", "balance", "coalitions", "evaluate", "export")


@dataclass
class RunConfig:
    """Everything a pipeline run depends on; serialized into the manifest."""

    dataset: str | None = None
    pairs: str | None = None
    coefficients: str | None = None
    out_dir: str = "out"
    seed: int = 0
    threshold_fraction: float = balance_mod.DEFAULT_THRESHOLD_FRACTION
    max_flips: int | None = None
    max_rejections_per_draw: int = 64
    min_magnitude: float = 1e-6
    trace_every: int = 1000
    audit: bool = False
    merge: str = "mean"
    exchange_transform: str = "ratio_minus_one"
    impute: bool = False
    border_max: str = "observed"
    jobs: int = 1
    stage: str = "all"

    def balance_config(self) -> balance_mod.BalanceConfig:
        return balance_mod.BalanceConfig(
            seed=self.seed,
            threshold_fraction=self.threshold_fraction,
            max_flips=self.max_flips,
            max_rejections_per_draw=self.max_rejections_per_draw,
            min_magnitude=self.min_magnitude,
            trace_every=self.trace_every,
            audit=self.audit,
        )

    def coefficient_set(self) -> scoring_mod.CoefficientSet:
        if self.coefficients is None:
            return scoring_mod.DEFAULT_COEFFICIENTS
        return scoring_mod.CoefficientSet.from_file(self.coefficients)


def log_level_from_env(value: str | None) -> int:
    level = getattr(logging, (value or "warning").upper(), None)
    return level if isinstance(level, int) else logging.WARNING


def setup_logging() -> None:
    level = log_level_from_env(os.environ.get("BALANCER_LOG"))
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


# stage implementations ------------------------------------------------------


def stage_ingest(cfg: RunConfig, out: Path) -> Path:
    if not cfg.dataset:
        raise InputError("ingest needs --in with the raw dataset")
    records, stats = ingest_mod.load_dataset(cfg.dataset, impute=cfg.impute)
    normalized = ingest_mod.normalize_records(
        records,
        stats,
        exchange_transform=cfg.exchange_transform,
        border_max=cfg.border_max,
    )
    normalized_path = out / "normalized.csv"
    ingest_mod.write_normalized_csv(normalized, normalized_path)
    nations = sorted({r.source for r in records} | {r.target for r in records})
    report = {
        "rows": len(records),
        "nations": len(nations),
        "factors": {
            col: {"min": stats.min(col), "max": stats.max(col)}
            for col in ingest_mod.FACTOR_COLUMNS
        },
    }
    with atomic_write(out / "ingest_report.json") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"ingest: {len(records)} rows, {len(nations)} nations -> {normalized_path}")
    return normalized_path


def stage_score(cfg: RunConfig, out: Path, normalized_path) -> Path:
    normalized = ingest_mod.load_normalized(normalized_path)
    coef = cfg.coefficient_set()
    scores = scoring_mod.directed_scores(normalized, coef)
    scoring_mod.write_directed_scores_csv(scores, out / "directed_scores.csv")
    g = scoring_mod.build_graph(normalized, coef, merge=cfg.merge)
    edges_path = out / "edges.csv"
    write_edges_csv(g, edges_path)
    print(f"score: {g.n} nations, {g.edge_count} merged edges -> {edges_path}")
    return edges_path


def stage_balance(cfg: RunConfig, out: Path, edges_path) -> Path:
    g = read_edges_csv(edges_path)
    trace = balance_mod.run_balance(g, cfg.balance_config())
    balanced_path = out / "balanced_edges.csv"
    write_edges_csv(g, balanced_path)
    balance_mod.write_trace_csv(trace, out / "trace.csv")
    print(
        f"balance: {trace.flips_applied} flips, {trace.final_unstable} unstable left "
        f"(stable ratio {trace.final_ratio:.4f}), terminated by {trace.terminated_by}"
    )
    return balanced_path


def stage_coalitions(cfg: RunConfig, out: Path, balanced_path) -> Path:
    if not cfg.pairs:
        raise InputError("coalition sweep needs --pairs with the evaluation set")
    g = read_edges_csv(balanced_path)
    pairs = evaluate_mod.load_eval_set(cfg.pairs)
    best, table = coalition_mod.sweep_starts(g, pairs, jobs=cfg.jobs)
    partition_path = out / "partition.json"
    coalition_mod.write_partition_json(best, partition_path)
    coalition_mod.write_partition_csv(best, out / "partition.csv")
    coalition_mod.write_start_scores_csv(table, out / "start_scores.csv")
    print(
        f"coalitions: best start {best.start} scores {best.eval_score}/{len(pairs)} "
        f"(sets {len(best.set1)}/{len(best.set2)})"
    )
    return partition_path


def stage_evaluate(cfg: RunConfig, out: Path, partition_path) -> None:
    if not cfg.pairs:
        raise InputError("evaluation needs --pairs with the evaluation set")
    partition = coalition_mod.load_partition_json(partition_path)
    pairs = evaluate_mod.load_eval_set(cfg.pairs)
    report = evaluate_mod.score_partition(partition, pairs)
    evaluate_mod.write_report_csv(report, out / "evaluation.csv")
    evaluate_mod.write_report_json(report, out / "evaluation.json")
    print(
        f"evaluate: {report.correct_count}/{report.total} correct "
        f"({report.wrong_count} wrong, {report.missing_count} missing), "
        f"accuracy {report.accuracy:.4f}"
    )


def stage_export(cfg: RunConfig, out: Path, edges_path, partition_path, subset=None) -> None:
    g = read_edges_csv(edges_path)
    partition = (
        coalition_mod.load_partition_json(partition_path) if partition_path else None
    )
    dot_path = out / "coalitions.dot"
    coalition_mod.write_dot(g, dot_path, partition, subset)
    print(f"export: {dot_path}")


# manifest --------------------------------------------------------------------


def _digest_entry(path) -> dict:
    return {"path": str(path), "sha256": sha256_file(path)}


def write_manifest(cfg: RunConfig, out: Path) -> None:
    inputs = {}
    if cfg.dataset:
        inputs["dataset"] = _digest_entry(cfg.dataset)
    if cfg.pairs:
        inputs["pairs"] = _digest_entry(cfg.pairs)
    if cfg.coefficients:
        inputs["coefficients"] = _digest_entry(cfg.coefficients)
    manifest = {
        "tool": "balancer",
        "version": __version__,
        "config": dataclasses.asdict(cfg),
        "inputs": inputs,
    }
    with atomic_write(out / "manifest.json") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_manifest(path) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        try:
            manifest = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InputError(f"{path}: invalid manifest JSON: {exc}") from None
    config = manifest.get("config")
    if not isinstance(config, dict):
        raise InputError(f"{path}: manifest has no config block")
    known = {f.name for f in dataclasses.fields(RunConfig)}
    unknown = set(config) - known
    if unknown:
        raise InputError(f"{path}: unknown config keys {sorted(unknown)}")
    cfg = RunConfig(**config)
    for name, entry in (manifest.get("inputs") or {}).items():
        if not isinstance(entry, dict) or "path" not in entry:
            raise InputError(f"{path}: malformed input entry for {name!r}")
        recorded = entry.get("sha256")
        current = sha256_file(entry["path"])
        if recorded != current:
            raise InputError(
                f"{path}: input {name!r} ({entry['path']}) changed since the manifest "
                f"was written; cannot replay"
            )
    return cfg


# commands ----------------------------------------------------------------------


def _out_dir(args) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _config_from_args(args, stage: str = "all") -> RunConfig:
    return RunConfig(
        dataset=getattr(args, "infile", None),
        pairs=getattr(args, "pairs", None),
        coefficients=getattr(args, "coefficients", None),
        out_dir=args.out_dir,
        seed=getattr(args, "seed", 0),
        threshold_fraction=getattr(
            args, "threshold_fraction", balance_mod.DEFAULT_THRESHOLD_FRACTION
        ),
        max_flips=getattr(args, "max_flips", None),
        trace_every=getattr(args, "trace_every", 1000),
        audit=getattr(args, "audit", False),
        merge=getattr(args, "merge", "mean"),
        exchange_transform=getattr(args, "exchange_transform", "ratio_minus_one"),
        impute=getattr(args, "impute", False),
        border_max=getattr(args, "border_max", "observed"),
        jobs=getattr(args, "jobs", 1),
        stage=stage,
    )


def cmd_ingest(args) -> int:
    cfg = _config_from_args(args, "ingest")
    stage_ingest(cfg, _out_dir(args))
    return 0


def cmd_score(args) -> int:
    cfg = _config_from_args(args, "score")
    stage_score(cfg, _out_dir(args), args.infile)
    return 0


def cmd_balance(args) -> int:
    cfg = _config_from_args(args, "balance")
    stage_balance(cfg, _out_dir(args), args.infile)
    return 0


def cmd_coalitions(args) -> int:
    cfg = _config_from_args(args, "coalitions")
    stage_coalitions(cfg, _out_dir(args), args.infile)
    return 0


def cmd_evaluate(args) -> int:
    cfg = _config_from_args(args, "evaluate")
    stage_evaluate(cfg, _out_dir(args), args.partition)
    return 0


def cmd_export(args) -> int:
    cfg = _config_from_args(args, "export")
    subset = args.subset.split(",") if args.subset else None
    stage_export(cfg, _out_dir(args), args.infile, args.partition, subset)
    return 0


def _run_stage(name: str, fn, *fn_args):
    try:
        return fn(*fn_args)
    except InvariantError as exc:
        raise InvariantError(f"stage {name!r}: {exc}") from exc
    except InputError as exc:
        raise InputError(f"stage {name!r}: {exc}") from exc
    except OSError as exc:
        raise InputError(f"stage {name!r}: {exc}") from exc


def cmd_pipeline(args) -> int:
    if getattr(args, "manifest", None):
        cfg = load_manifest(args.manifest)
        if args.out_dir != "out":
            cfg.out_dir = args.out_dir
    else:
        cfg = _config_from_args(args, args.stage)
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    if cfg.stage == "all":
        if not cfg.dataset:
            raise InputError("pipeline needs --in with the raw dataset")
        if not cfg.pairs:
            raise InputError("pipeline needs --pairs with the evaluation set")
        normalized = _run_stage("ingest", stage_ingest, cfg, out)
        edges = _run_stage("score", stage_score, cfg, out, normalized)
        balanced = _run_stage("balance", stage_balance, cfg, out, edges)
        partition = _run_stage("coalitions", stage_coalitions, cfg, out, balanced)
        _run_stage("evaluate", stage_evaluate, cfg, out, partition)
        _run_stage("export", stage_export, cfg, out, balanced, partition)
        write_manifest(cfg, out)
        print(f"pipeline: outputs in {out}")
        return 0

    # single-stage dispatch from intermediate files
    if cfg.stage == "ingest":
        _run_stage("ingest", stage_ingest, cfg, out)
    elif cfg.stage == "score":
        _run_stage("score", stage_score, cfg, out, _require(args, "infile", "--in"))
    elif cfg.stage == "balance":
        _run_stage("balance", stage_balance, cfg, out, _require(args, "infile", "--in"))
    elif cfg.stage == "coalitions":
        _run_stage("coalitions", stage_coalitions, cfg, out, _require(args, "infile", "--in"))
    elif cfg.stage == "evaluate":
        _run_stage("evaluate", stage_evaluate, cfg, out, _require(args, "partition", "--partition"))
    elif cfg.stage == "export":
        subset = args.subset.split(",") if getattr(args, "subset", None) else None
        _run_stage(
            "export", stage_export, cfg, out,
            _require(args, "infile", "--in"), getattr(args, "partition", None), subset,
        )
    else:
        raise InputError(f"unknown stage {cfg.stage!r}")
    return 0


def _require(args, attr: str, flag: str):
    value = getattr(args, attr, None)
    if not value:
        raise InputError(f"stage {args.stage!r} needs {flag}")
    return value


# parser --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="balancer",
        description="Signed-network structural balance and coalition prediction.",
    )
    parser.add_argument("--version", action="version", version=f"balancer {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_out(p):
        p.add_argument("--out-dir", default="out", help="output directory (default: out)")

    def add_ingest_opts(p):
        p.add_argument("--impute", action="store_true",
                       help="fill missing cells/directions with neutral values")
        p.add_argument("--exchange-transform", default="ratio_minus_one",
                       choices=ingest_mod.EXCHANGE_TRANSFORMS)
        p.add_argument("--border-max", default="observed", choices=("observed", "domain"),
                       help="divisor for the border factor")

    def add_balance_opts(p):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--threshold-fraction", type=float,
                       default=balance_mod.DEFAULT_THRESHOLD_FRACTION,
                       help="unstable/total ratio at which to stop")
        p.add_argument("--max-flips", type=int, default=None)
        p.add_argument("--trace-every", type=int, default=1000)
        p.add_argument("--audit", action="store_true",
                       help="full-recount audits of the incremental counter")

    p = sub.add_parser("ingest", help="validate a raw dataset and normalize its factors")
    p.add_argument("--in", dest="infile", required=True)
    add_out(p)
    add_ingest_opts(p)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("score", help="score directed pairs and merge into a signed graph")
    p.add_argument("--in", dest="infile", required=True, help="normalized CSV")
    add_out(p)
    p.add_argument("--coefficients", default=None)
    p.add_argument("--merge", default="mean", choices=scoring_mod.MERGE_RULES)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("balance", help="run the triangle-flip dynamics on an edge list")
    p.add_argument("--in", dest="infile", required=True, help="edge-list CSV")
    add_out(p)
    add_balance_opts(p)
    p.set_defaults(func=cmd_balance)

    p = sub.add_parser("coalitions", help="extract the best two-coalition partition")
    p.add_argument("--in", dest="infile", required=True, help="balanced edge-list CSV")
    p.add_argument("--pairs", required=True, help="evaluation pairs CSV")
    add_out(p)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_coalitions)

    p = sub.add_parser("evaluate", help="score a partition against known pairs")
    p.add_argument("--partition", required=True, help="partition JSON")
    p.add_argument("--pairs", required=True, help="evaluation pairs CSV")
    add_out(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("pipeline", help="run every stage and write a replay manifest")
    p.add_argument("--in", dest="infile", default=None, help="raw dataset CSV")
    p.add_argument("--pairs", default=None, help="evaluation pairs CSV")
    p.add_argument("--coefficients", default=None)
    add_out(p)
    add_ingest_opts(p)
    add_balance_opts(p)
    p.add_argument("--merge", default="mean", choices=scoring_mod.MERGE_RULES)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--stage", default="all", choices=STAGES,
                   help="run one stage from intermediate files")
    p.add_argument("--partition", default=None, help="partition JSON (stage evaluate/export)")
    p.add_argument("--subset", default=None, help="comma-separated nations (stage export)")
    p.add_argument("--manifest", default=None, help="replay a previous run's manifest")
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("export", help="write a DOT rendering of a (partitioned) graph")
    p.add_argument("--in", dest="infile", required=True, help="edge-list CSV")
    p.add_argument("--partition", default=None, help="partition JSON")
    p.add_argument("--subset", default=None, help="comma-separated nation names")
    add_out(p)
    p.set_defaults(func=cmd_export)

    return parser


def main(argv=None) -> int:
    setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InputError, FileNotFoundError, IsADirectoryError, PermissionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except InvariantError as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return 3


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
