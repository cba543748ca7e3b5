"""Raw bilateral-relations CSV parsing, validation, and factor normalization.

One row describes one directed nation pair. Trade volumes and the count-style
factors are min-max normalized into [0, 1]; the border code is divided by its
maximum (so -1 maps to -0.5 when the max is 2); the exchange-rate ratio
collapses to +1 or -1. Every normalized value therefore lies in [-1, 1].
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import InputError
from .graph import normalize_name
from ._io import atomic_write

log = logging.getLogger(__name__)


class DatasetError(InputError):
    """A dataset file failed validation."""


# CSV column order is fixed; "import" is a keyword, hence the attribute alias.
FACTOR_COLUMNS = (
    "export",
    "import",
    "religious_conflicts",
    "diplomatic",
    "war",
    "border",
    "icj_case",
    "peace_treaty",
    "exchange_rate_ratio",
)
CSV_HEADER = ("source", "target") + FACTOR_COLUMNS
_ATTR_FOR_COLUMN = {col: ("import_" if col == "import" else col) for col in FACTOR_COLUMNS}

# Factors normalized with the min-max rule; border and exchange have their own.
MINMAX_FACTORS = (
    "export",
    "import",
    "religious_conflicts",
    "diplomatic",
    "war",
    "icj_case",
    "peace_treaty",
)

BORDER_DOMAIN = (-1, 0, 1, 2)
BORDER_DOMAIN_MAX = 2
RELIGIOUS_MAX = 4

EXCHANGE_TRANSFORMS = ("ratio_minus_one", "raw", "log")


@dataclass(frozen=True)
class FactorRecord:
    """One directed country-pair row of raw factor values."""

    source: str
    target: str
    export: float
    import_: float
    religious_conflicts: int
    diplomatic: int
    war: int
    border: int
    icj_case: int
    peace_treaty: int
    exchange_rate_ratio: float

    def factor(self, column: str) -> float:
        return getattr(self, _ATTR_FOR_COLUMN[column])


@dataclass(frozen=True)
class NormalizedRecord:
    """A factor record after normalization; every value lies in [-1, 1]."""

    source: str
    target: str
    export: float
    import_: float
    religious_conflicts: float
    diplomatic: float
    war: float
    border: float
    icj_case: float
    peace_treaty: float
    exchange_rate_ratio: float

    def factor(self, column: str) -> float:
        return getattr(self, _ATTR_FOR_COLUMN[column])


@dataclass(frozen=True)
class FactorStats:
    """Per-factor minimum and maximum over every row of a dataset."""

    minima: dict[str, float]
    maxima: dict[str, float]

    def min(self, column: str) -> float:
        return self.minima[column]

    def max(self, column: str) -> float:
        return self.maxima[column]

    @classmethod
    def from_records(cls, records: Iterable[FactorRecord]) -> "FactorStats":
        rows = list(records)
        if not rows:
            raise DatasetError("cannot compute factor statistics of an empty dataset")
        minima: dict[str, float] = {}
        maxima: dict[str, float] = {}
        for col in FACTOR_COLUMNS:
            values = [rec.factor(col) for rec in rows]
            minima[col] = float(min(values))
            maxima[col] = float(max(values))
        return cls(minima, maxima)


# parsing -------------------------------------------------------------------


def _neutral_value(column: str) -> float:
    # Exchange ratios must be positive; 1.0 is the equal-rates boundary.
    return 1.0 if column == "exchange_rate_ratio" else 0.0


def _parse_value(column: str, text: str, where: str, impute: bool) -> float:
    text = text.strip()
    if text == "":
        if impute:
            return _neutral_value(column)
        raise DatasetError(f"{where}: missing value for {column!r} (use --impute to default it)")
    try:
        value = float(text)
    except ValueError:
        raise DatasetError(f"{where}: {column!r} is not a number: {text!r}") from None
    if not np.isfinite(value):
        raise DatasetError(f"{where}: {column!r} is not finite: {text!r}")
    return value


def _validate_factor(column: str, value: float, where: str) -> float | int:
    if column in ("export", "import"):
        if value < 0:
            raise DatasetError(f"{where}: {column!r} must be >= 0, got {value}")
        return value
    if column == "exchange_rate_ratio":
        if value <= 0:
            raise DatasetError(f"{where}: {column!r} must be > 0, got {value}")
        return value
    if not float(value).is_integer():
        raise DatasetError(f"{where}: {column!r} must be an integer, got {value}")
    ivalue = int(value)
    if column == "religious_conflicts":
        if not 0 <= ivalue <= RELIGIOUS_MAX:
            raise DatasetError(
                f"{where}: religious_conflicts must be in 0..{RELIGIOUS_MAX}, got {ivalue}"
            )
    elif column == "border":
        if ivalue not in BORDER_DOMAIN:
            raise DatasetError(f"{where}: border must be one of {BORDER_DOMAIN}, got {ivalue}")
    else:  # diplomatic, war, icj_case, peace_treaty
        if ivalue not in (0, 1):
            raise DatasetError(f"{where}: {column!r} must be 0 or 1, got {ivalue}")
    return ivalue


def load_dataset(path, *, impute: bool = False) -> tuple[list[FactorRecord], FactorStats]:
    """Parse and validate a raw dataset CSV.

    Args:
        path: CSV with header ``source,target,export,import,...`` (see
            ``CSV_HEADER``), one directed pair per row.
        impute: when true, missing cells take a neutral value and a missing
            reverse direction is synthesized as an all-neutral row (with a
            warning). When false both are errors.

    Returns:
        The record list (imputed rows appended last, sorted) and the factor
        statistics over all returned records.
    """
    records: list[FactorRecord] = []
    seen: dict[tuple[str, str], int] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise DatasetError(f"{path}: empty file")
        if tuple(h.strip() for h in header) != CSV_HEADER:
            raise DatasetError(
                f"{path}: bad header; expected {','.join(CSV_HEADER)}, got {','.join(header)}"
            )
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            where = f"{path}: row {lineno}"
            if len(row) != len(CSV_HEADER):
                raise DatasetError(f"{where}: expected {len(CSV_HEADER)} columns, got {len(row)}")
            source = normalize_name(row[0])
            target = normalize_name(row[1])
            if not source or not target:
                raise DatasetError(f"{where}: empty nation name")
            if source == target:
                raise DatasetError(f"{where}: source equals target ({source!r})")
            key = (source, target)
            if key in seen:
                raise DatasetError(
                    f"{where}: duplicate directed pair ({source}, {target}), first at row {seen[key]}"
                )
            seen[key] = lineno
            values = {}
            for col, cell in zip(FACTOR_COLUMNS, row[2:]):
                parsed = _parse_value(col, cell, where, impute)
                values[_ATTR_FOR_COLUMN[col]] = _validate_factor(col, parsed, where)
            records.append(FactorRecord(source=source, target=target, **values))

    missing_reverse = sorted(
        (s, t) for (s, t) in seen if (t, s) not in seen
    )
    if missing_reverse:
        if not impute:
            sample = ", ".join(f"({t}, {s})" for s, t in missing_reverse[:5])
            raise DatasetError(
                f"{path}: {len(missing_reverse)} directed rows have no reverse direction "
                f"(first missing: {sample}); rerun with --impute to fill them neutrally"
            )
        log.warning(
            "%s: imputing %d missing reverse rows with neutral factors", path, len(missing_reverse)
        )
        for s, t in missing_reverse:
            records.append(
                FactorRecord(
                    source=t,
                    target=s,
                    export=0.0,
                    import_=0.0,
                    religious_conflicts=0,
                    diplomatic=0,
                    war=0,
                    border=0,
                    icj_case=0,
                    peace_treaty=0,
                    exchange_rate_ratio=1.0,
                )
            )

    if not records:
        raise DatasetError(f"{path}: no data rows")
    nations = {r.source for r in records} | {r.target for r in records}
    log.info("%s: %d rows, %d nations", path, len(records), len(nations))
    return records, FactorStats.from_records(records)


# normalization rules ---------------------------------------------------------


def normalize_minmax(value: float, lo: float, hi: float) -> float:
    """Min-max rule (value - lo) / (hi - lo); a constant factor maps to 0."""
    if hi < lo:
        raise ValueError(f"max {hi} < min {lo}")
    if hi == lo:
        return 0.0
    return (value - lo) / (hi - lo)


def normalize_border(value: float, max_value: float) -> float:
    """Border code divided by the maximum observed (or domain) code."""
    if max_value <= 0:
        raise DatasetError(
            f"border maximum is {max_value}; no open borders observed, "
            f"rerun with --border-max domain to divide by {BORDER_DOMAIN_MAX}"
        )
    return value / max_value


def normalize_exchange(ratio: float, transform: str = "ratio_minus_one") -> float:
    """Collapse an exchange-rate ratio to +1 (favorable) or -1.

    The sign function is applied to a transform of the ratio, since a raw
    positive ratio is trivially nonnegative. ``ratio_minus_one`` and ``log``
    both map ratios >= 1 to +1 and ratios < 1 to -1; ``raw`` keeps the
    untransformed value (constant +1 for valid ratios).
    """
    if ratio <= 0 or not np.isfinite(ratio):
        raise DatasetError(f"exchange_rate_ratio must be a positive real, got {ratio}")
    if transform == "ratio_minus_one":
        t = ratio - 1.0
    elif transform == "raw":
        t = ratio
    elif transform == "log":
        t = np.log(ratio)
    else:
        raise InputError(
            f"unknown exchange transform {transform!r}; expected one of {EXCHANGE_TRANSFORMS}"
        )
    return 1.0 if t >= 0 else -1.0


def normalize_records(
    records: Iterable[FactorRecord],
    stats: FactorStats,
    *,
    exchange_transform: str = "ratio_minus_one",
    border_max: str = "observed",
) -> list[NormalizedRecord]:
    """Apply the per-factor normalization rules to every record.

    ``border_max`` selects the border divisor: the observed maximum (default)
    or the domain maximum 2.
    """
    if border_max == "observed":
        border_divisor = stats.max("border")
    elif border_max == "domain":
        border_divisor = float(BORDER_DOMAIN_MAX)
    else:
        raise InputError(f"unknown border-max mode {border_max!r}; expected observed or domain")
    if border_divisor <= 0:
        raise DatasetError(
            f"border maximum is {border_divisor}; no open borders observed, "
            f"rerun with --border-max domain to divide by {BORDER_DOMAIN_MAX}"
        )

    out = []
    for rec in records:
        values = {}
        for col in MINMAX_FACTORS:
            values[_ATTR_FOR_COLUMN[col]] = normalize_minmax(
                rec.factor(col), stats.min(col), stats.max(col)
            )
        values["border"] = normalize_border(rec.border, border_divisor)
        values["exchange_rate_ratio"] = normalize_exchange(
            rec.exchange_rate_ratio, exchange_transform
        )
        out.append(NormalizedRecord(source=rec.source, target=rec.target, **values))
    return out


# serialization ---------------------------------------------------------------


def _format_value(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_rows(records, path) -> None:
    with atomic_write(path, newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for rec in records:
            writer.writerow(
                [rec.source, rec.target]
                + [_format_value(rec.factor(col)) for col in FACTOR_COLUMNS]
            )


def write_records_csv(records: Iterable[FactorRecord], path) -> None:
    """Serialize raw records; loading the file back yields identical records."""
    _write_rows(records, path)


def write_normalized_csv(records: Iterable[NormalizedRecord], path) -> None:
    """Serialize normalized records under the same schema as the raw CSV."""
    _write_rows(records, path)


def load_normalized(path) -> list[NormalizedRecord]:
    """Load a normalized CSV, checking every value against its post-range."""
    out: list[NormalizedRecord] = []
    seen: set[tuple[str, str]] = set()
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != CSV_HEADER:
            raise DatasetError(f"{path}: bad or missing normalized-CSV header")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            where = f"{path}: row {lineno}"
            if len(row) != len(CSV_HEADER):
                raise DatasetError(f"{where}: expected {len(CSV_HEADER)} columns, got {len(row)}")
            source, target = normalize_name(row[0]), normalize_name(row[1])
            if source == target:
                raise DatasetError(f"{where}: source equals target ({source!r})")
            if (source, target) in seen:
                raise DatasetError(f"{where}: duplicate directed pair ({source}, {target})")
            seen.add((source, target))
            values = {}
            for col, cell in zip(FACTOR_COLUMNS, row[2:]):
                try:
                    v = float(cell)
                except ValueError:
                    raise DatasetError(f"{where}: {col!r} is not a number: {cell!r}") from None
                if not np.isfinite(v):
                    raise DatasetError(f"{where}: {col!r} is not finite")
                if col in MINMAX_FACTORS and not 0.0 <= v <= 1.0:
                    raise DatasetError(f"{where}: normalized {col!r} outside [0, 1]: {v}")
                if col == "border" and not -1.0 <= v <= 1.0:
                    raise DatasetError(f"{where}: normalized border outside [-1, 1]: {v}")
                if col == "exchange_rate_ratio" and v not in (-1.0, 1.0):
                    raise DatasetError(f"{where}: normalized exchange must be -1 or +1, got {v}")
                values[_ATTR_FOR_COLUMN[col]] = v
            out.append(NormalizedRecord(source=source, target=target, **values))
    if not out:
        raise DatasetError(f"{path}: no data rows")
    return out
