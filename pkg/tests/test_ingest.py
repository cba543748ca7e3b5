import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from balancer import InputError
from balancer.ingest import (
    CSV_HEADER,
    FACTOR_COLUMNS,
    MINMAX_FACTORS,
    DatasetError,
    FactorRecord,
    FactorStats,
    load_dataset,
    load_normalized,
    normalize_border,
    normalize_exchange,
    normalize_minmax,
    normalize_records,
    write_normalized_csv,
    write_records_csv,
)


def make_record(source, target, **overrides):
    base = dict(
        source=source,
        target=target,
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
    base.update(overrides)
    return FactorRecord(**base)


def rows_to_csv(path, rows, header=CSV_HEADER):
    lines = [",".join(header)]
    lines += [",".join(str(cell) for cell in row) for row in rows]
    path.write_text("\n".join(lines) + "\n")


def toy_rows():
    # 3 nations, all 6 directed pairs
    return [
        ("alpha", "beta", 100.0, 50.0, 0, 1, 0, 2, 0, 0, 1.5),
        ("beta", "alpha", 40.0, 90.0, 0, 1, 0, 2, 0, 0, 0.6666),
        ("alpha", "gamma", 0.0, 10.0, 2, 0, 1, -1, 1, 0, 0.5),
        ("gamma", "alpha", 5.0, 0.0, 2, 0, 1, -1, 1, 0, 2.0),
        ("beta", "gamma", 20.0, 20.0, 1, 1, 0, 0, 0, 1, 1.0),
        ("gamma", "beta", 30.0, 10.0, 1, 1, 0, 0, 0, 1, 1.0),
    ]


# loading ---------------------------------------------------------------------

def test_load_toy_dataset(tmp_path):
    path = tmp_path / "raw.csv"
    rows_to_csv(path, toy_rows())
    records, stats = load_dataset(path)
    assert len(records) == 6
    assert {r.source for r in records} == {"alpha", "beta", "gamma"}
    assert stats.min("export") == 0.0
    assert stats.max("export") == 100.0
    assert stats.max("border") == 2.0
    assert stats.min("border") == -1.0


def test_load_rejects_bad_header(tmp_path):
    path = tmp_path / "raw.csv"
    rows_to_csv(path, toy_rows(), header=("src", "dst") + FACTOR_COLUMNS)
    with pytest.raises(DatasetError, match="header"):
        load_dataset(path)


def test_load_rejects_out_of_domain_border(tmp_path):
    path = tmp_path / "raw.csv"
    rows = toy_rows()
    rows[2] = rows[2][:7] + (3,) + rows[2][8:]
    rows_to_csv(path, rows)
    with pytest.raises(DatasetError, match="border") as err:
        load_dataset(path)
    assert "row 4" in str(err.value)


def test_load_rejects_negative_export_with_row_number(tmp_path):
    path = tmp_path / "raw.csv"
    rows = toy_rows()
    rows[0] = rows[0][:2] + (-1.0,) + rows[0][3:]
    rows_to_csv(path, rows)
    with pytest.raises(DatasetError, match="export") as err:
        load_dataset(path)
    assert "row 2" in str(err.value)


def test_load_rejects_duplicate_directed_pair(tmp_path):
    path = tmp_path / "raw.csv"
    rows_to_csv(path, toy_rows() + [toy_rows()[0]])
    with pytest.raises(DatasetError, match="duplicate"):
        load_dataset(path)


def test_load_missing_cell_strict_vs_impute(tmp_path):
    path = tmp_path / "raw.csv"
    rows = toy_rows()
    rows[1] = rows[1][:4] + ("",) + rows[1][5:]  # blank religious_conflicts
    rows_to_csv(path, rows)
    with pytest.raises(DatasetError, match="religious_conflicts"):
        load_dataset(path)
    records, _ = load_dataset(path, impute=True)
    rec = next(r for r in records if (r.source, r.target) == ("beta", "alpha"))
    assert rec.religious_conflicts == 0


def test_load_missing_direction_strict_vs_impute(tmp_path):
    path = tmp_path / "raw.csv"
    rows_to_csv(path, toy_rows()[:-1])  # drop gamma->beta
    with pytest.raises(DatasetError, match="reverse"):
        load_dataset(path)
    records, _ = load_dataset(path, impute=True)
    assert len(records) == 6
    imputed = next(r for r in records if (r.source, r.target) == ("gamma", "beta"))
    assert imputed.export == 0.0
    assert imputed.exchange_rate_ratio == 1.0  # neutral ratio, not 0


def test_load_normalizes_nation_names(tmp_path):
    path = tmp_path / "raw.csv"
    rows = [list(r) for r in toy_rows()]
    rows[0][0] = "Alpha"
    rows[1][1] = "ALPHA"
    rows_to_csv(path, rows)
    records, _ = load_dataset(path)
    assert {r.source for r in records} == {"alpha", "beta", "gamma"}


def test_round_trip_raw_records(tmp_path):
    path = tmp_path / "raw.csv"
    rows_to_csv(path, toy_rows())
    records, _ = load_dataset(path)
    out = tmp_path / "copy.csv"
    write_records_csv(records, out)
    records2, _ = load_dataset(out)
    assert records2 == records


# normalization rules ---------------------------------------------------------

def test_normalize_minmax_endpoints_and_midpoint():
    assert normalize_minmax(0.0, 0.0, 10.0) == 0.0
    assert normalize_minmax(10.0, 0.0, 10.0) == 1.0
    assert normalize_minmax(5.0, 0.0, 10.0) == 0.5


def test_normalize_minmax_degenerate_constant_factor():
    assert normalize_minmax(7.0, 7.0, 7.0) == 0.0


@given(
    lo=st.floats(-1e6, 1e6),
    span=st.floats(1e-3, 1e6),
    t1=st.floats(0, 1),
    t2=st.floats(0, 1),
)
def test_normalize_minmax_monotone(lo, span, t1, t2):
    hi = lo + span
    y1, y2 = lo + t1 * span, lo + t2 * span
    n1, n2 = normalize_minmax(y1, lo, hi), normalize_minmax(y2, lo, hi)
    if y1 <= y2:
        assert n1 <= n2


def test_normalize_border_values():
    assert normalize_border(-1, 2) == -0.5
    assert normalize_border(2, 2) == 1.0
    assert normalize_border(0, 2) == 0.0
    assert normalize_border(-1, 1) == -1.0


def test_normalize_border_degenerate_max():
    with pytest.raises(DatasetError, match="border-max"):
        normalize_border(0, 0)


def test_normalize_exchange_boundary_and_sides():
    assert normalize_exchange(1.0) == 1.0
    assert normalize_exchange(2.5) == 1.0
    assert normalize_exchange(0.4) == -1.0


def test_normalize_exchange_transforms():
    for ratio in (0.2, 0.9999, 1.0, 1.0001, 7.0):
        assert normalize_exchange(ratio, "log") == normalize_exchange(ratio, "ratio_minus_one")
        assert normalize_exchange(ratio, "raw") == 1.0


def test_normalize_exchange_rejects_nonpositive():
    with pytest.raises(DatasetError):
        normalize_exchange(0.0)
    with pytest.raises(DatasetError):
        normalize_exchange(-2.0)


def test_normalize_exchange_unknown_transform():
    with pytest.raises(InputError, match="transform"):
        normalize_exchange(1.0, "square")


# whole-dataset normalization ---------------------------------------------------

def test_normalize_records_ranges_on_toy(tmp_path):
    path = tmp_path / "raw.csv"
    rows_to_csv(path, toy_rows())
    records, stats = load_dataset(path)
    normalized = normalize_records(records, stats)
    assert len(normalized) == 6
    for rec in normalized:
        for col in FACTOR_COLUMNS:
            assert -1.0 <= rec.factor(col) <= 1.0
        for col in MINMAX_FACTORS:
            assert 0.0 <= rec.factor(col) <= 1.0
        assert rec.exchange_rate_ratio in (-1.0, 1.0)
    # extremal rows hit the endpoints
    exports = [r.export for r in normalized]
    assert min(exports) == 0.0
    assert max(exports) == 1.0
    borders = {r.border for r in normalized}
    assert borders == {-0.5, 0.0, 1.0}


def test_normalize_records_border_domain_mode(tmp_path):
    path = tmp_path / "raw.csv"
    rows = [list(r) for r in toy_rows()]
    for row in rows:
        row[7] = min(row[7], 1)  # observed max becomes 1
    rows_to_csv(path, rows)
    records, stats = load_dataset(path)
    observed = normalize_records(records, stats)
    domain = normalize_records(records, stats, border_max="domain")
    assert {r.border for r in observed} == {-1.0, 0.0, 1.0}
    assert {r.border for r in domain} == {-0.5, 0.0, 0.5}


def test_normalized_twice_stays_in_unit_interval(tmp_path):
    path = tmp_path / "raw.csv"
    rows_to_csv(path, toy_rows())
    records, stats = load_dataset(path)
    normalized = normalize_records(records, stats)
    stats2 = FactorStats(
        minima={c: min(r.factor(c) for r in normalized) for c in FACTOR_COLUMNS},
        maxima={c: max(r.factor(c) for r in normalized) for c in FACTOR_COLUMNS},
    )
    for rec in normalized:
        for col in MINMAX_FACTORS:
            again = normalize_minmax(rec.factor(col), stats2.min(col), stats2.max(col))
            assert 0.0 <= again <= 1.0


def test_normalized_csv_round_trip(tmp_path):
    path = tmp_path / "raw.csv"
    rows_to_csv(path, toy_rows())
    records, stats = load_dataset(path)
    normalized = normalize_records(records, stats)
    out = tmp_path / "norm.csv"
    write_normalized_csv(normalized, out)
    assert load_normalized(out) == normalized


def test_load_normalized_rejects_out_of_range(tmp_path):
    path = tmp_path / "raw.csv"
    rows_to_csv(path, toy_rows())
    records, stats = load_dataset(path)
    normalized = normalize_records(records, stats)
    out = tmp_path / "norm.csv"
    write_normalized_csv(normalized, out)
    text = out.read_text().replace("1.0", "1.5", 1)
    bad = tmp_path / "bad.csv"
    bad.write_text(text)
    with pytest.raises(DatasetError):
        load_normalized(bad)


# property test over generated datasets ----------------------------------------

@st.composite
def random_dataset(draw):
    n = draw(st.integers(3, 5))
    names = [f"nat{i}" for i in range(n)]
    records = []
    for a, b in itertools.permutations(range(n), 2):
        records.append(
            make_record(
                names[a],
                names[b],
                export=draw(st.floats(0, 1e12, allow_nan=False)),
                import_=draw(st.floats(0, 1e12, allow_nan=False)),
                religious_conflicts=draw(st.integers(0, 4)),
                diplomatic=draw(st.integers(0, 1)),
                war=draw(st.integers(0, 1)),
                border=draw(st.sampled_from([-1, 0, 1, 2])),
                icj_case=draw(st.integers(0, 1)),
                peace_treaty=draw(st.integers(0, 1)),
                exchange_rate_ratio=draw(st.floats(1e-3, 1e3)),
            )
        )
    return records


@settings(max_examples=30, deadline=None)
@given(records=random_dataset())
def test_normalization_ranges_property(records):
    stats = FactorStats.from_records(records)
    normalized = normalize_records(records, stats, border_max="domain")
    for rec in normalized:
        for col in FACTOR_COLUMNS:
            assert -1.0 <= rec.factor(col) <= 1.0
        for col in MINMAX_FACTORS:
            assert 0.0 <= rec.factor(col) <= 1.0
        assert rec.border in (-0.5, 0.0, 0.5, 1.0)
        assert rec.exchange_rate_ratio in (-1.0, 1.0)
    for col in MINMAX_FACTORS:
        values = [r.factor(col) for r in normalized]
        if stats.min(col) < stats.max(col):
            assert min(values) == 0.0
            assert max(values) == 1.0
        else:
            assert set(values) == {0.0}
