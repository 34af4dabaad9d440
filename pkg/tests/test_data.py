import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from sizecapm.data import (
    AlignmentError,
    DataError,
    DecilePanel,
    MonthKey,
    MonthlyPanel,
    MonthlySeries,
    ParseError,
    ValidationError,
    build_dataset,
    load_fred_series,
    load_french_deciles,
    load_panel,
    month_range,
    series_from_values,
)

HEADER = "month," + ",".join(f"d{k}" for k in range(1, 11)) + "\n"


def test_fixture_first_row(fixture_dir):
    d = load_french_deciles(fixture_dir)
    assert d.keys[0] == MonthKey(1990, 1)
    assert d.size[0, 0] == 31.84
    assert d.size[0, 9] == 19343.8
    assert d.size.shape == (3, 10)


def test_fixture_dataset_definitions(fixture_dir):
    panel = load_panel(fixture_dir, fixture_dir / "vix.csv", fixture_dir / "tb3.csv")
    ds = build_dataset(panel)
    S = panel.deciles.size
    assert len(ds) == 2
    assert ds.R[0, 4] == pytest.approx(math.log(S[1, 4] / S[0, 4]), abs=1e-15)
    assert ds.C[1, 0] == pytest.approx(math.log(S[1, 0] / S[1, 9]), abs=1e-15)
    assert ds.V[0] == pytest.approx(0.2335)
    rf = math.log1p(7.64 / 100) / 12
    assert ds.P[0, 2] == pytest.approx(math.log1p(1.26 / 100) - rf, abs=1e-15)
    assert np.allclose(ds.price_log_return[0], np.log1p(panel.deciles.price_return[0] / 100))


def test_relative_size_difference_identity(synthetic_files):
    _, panel = synthetic_files
    ds = build_dataset(panel)
    # C(t+1) - C(t) = R_k(t) - R_0(t)
    lhs = np.diff(ds.C, axis=0)
    rhs = (ds.R - ds.R0[:, None])[:-1]
    assert np.allclose(lhs, rhs, atol=1e-10)
    assert np.all(ds.C[:, 9] == 0)


def test_roundtrip_files(synthetic_files):
    root, panel = synthetic_files
    loaded = load_panel(root / "deciles", root / "vix.csv", root / "tb3.csv")
    assert loaded.keys == panel.keys
    assert np.array_equal(loaded.deciles.size, panel.deciles.size)
    assert np.array_equal(loaded.vix.values, panel.vix.values)


def _write_deciles(dirpath, rows_by_file):
    dirpath.mkdir()
    for fname, rows in rows_by_file.items():
        (dirpath / fname).write_text(HEADER + "".join(rows))


def _row(key, base=1.0):
    return key + "," + ",".join(str(base + k) for k in range(10)) + "\n"


def test_wrong_column_count(tmp_path):
    bad = "199001," + ",".join(["1"] * 9) + "\n"
    good = _row("199001")
    _write_deciles(tmp_path / "d", {"sizes.csv": [bad], "price_returns.csv": [good], "total_returns.csv": [good]})
    with pytest.raises(ParseError, match="expected 10 value columns, got 9"):
        load_french_deciles(tmp_path / "d")


def test_month_gap_in_deciles(tmp_path):
    rows = [_row("199001"), _row("199003")]
    _write_deciles(tmp_path / "d", {f: rows for f in ("sizes.csv", "price_returns.csv", "total_returns.csv")})
    with pytest.raises(AlignmentError, match="199001 and 199003"):
        load_french_deciles(tmp_path / "d")


def test_ragged_decile_files(tmp_path):
    a = [_row("199001"), _row("199002")]
    b = [_row("199001")]
    _write_deciles(tmp_path / "d", {"sizes.csv": a, "price_returns.csv": b, "total_returns.csv": a})
    with pytest.raises(AlignmentError):
        load_french_deciles(tmp_path / "d")


def test_nonpositive_size(tmp_path):
    bad = "199001,0," + ",".join(["1"] * 9) + "\n"
    good = _row("199001")
    _write_deciles(tmp_path / "d", {"sizes.csv": [bad], "price_returns.csv": [good], "total_returns.csv": [good]})
    with pytest.raises(ValidationError, match="nonpositive size"):
        load_french_deciles(tmp_path / "d")


def test_fred_missing_dot(tmp_path):
    p = tmp_path / "vix.csv"
    p.write_text("DATE,VIXCLS\n1990-01-01,23.3\n1990-02-01,.\n")
    with pytest.raises(ParseError, match="199002"):
        load_fred_series(p, "vix")


def test_fred_duplicate_month(tmp_path):
    p = tmp_path / "vix.csv"
    p.write_text("DATE,VIXCLS\n1990-01-01,23.3\n1990-01-01,24.0\n")
    with pytest.raises(ValidationError, match="duplicate"):
        load_fred_series(p, "vix")


def test_fred_empty(tmp_path):
    p = tmp_path / "vix.csv"
    p.write_text("DATE,VIXCLS\n")
    with pytest.raises(DataError, match="no observations"):
        load_fred_series(p, "vix")
    p.write_text("")
    with pytest.raises(DataError, match="no observations"):
        load_fred_series(p, "vix")


def test_fred_gap(tmp_path):
    p = tmp_path / "vix.csv"
    p.write_text("DATE,VIXCLS\n1990-01-01,23.3\n1990-03-01,24.0\n")
    with pytest.raises(AlignmentError):
        load_fred_series(p, "vix")


def test_fred_bad_header(tmp_path):
    p = tmp_path / "vix.csv"
    p.write_text("when,VIXCLS\n1990-01-01,23.3\n")
    with pytest.raises(ParseError, match="header"):
        load_fred_series(p, "vix")


def test_align_trims_to_common_range(fixture_dir):
    d = load_french_deciles(fixture_dir)
    vix = series_from_values([20.0, 21.0, 22.0, 23.0], MonthKey(1989, 12), "vix")
    rf = series_from_values([5.0, 5.0], MonthKey(1990, 2), "rf")
    panel = MonthlyPanel.align(d, vix, rf)
    assert panel.range == (MonthKey(1990, 2), MonthKey(1990, 3))
    assert list(panel.vix.values) == [22.0, 23.0]


def test_panel_rejects_mismatched_range(fixture_dir):
    d = load_french_deciles(fixture_dir)
    vix = series_from_values([20.0, 21.0], MonthKey(1990, 1), "vix")
    rf = series_from_values([5.0, 5.0, 5.0], MonthKey(1990, 1), "rf")
    with pytest.raises(AlignmentError):
        MonthlyPanel(d, vix, rf)


def test_panel_rejects_nonpositive_vix(fixture_dir):
    d = load_french_deciles(fixture_dir)
    vix = series_from_values([20.0, 0.0, 22.0], MonthKey(1990, 1), "vix")
    rf = series_from_values([5.0, 5.0, 5.0], MonthKey(1990, 1), "rf")
    with pytest.raises(ValidationError):
        MonthlyPanel(d, vix, rf)


def test_nonfinite_rejected():
    with pytest.raises(ValidationError):
        series_from_values([1.0, float("nan")])


def test_empty_series():
    with pytest.raises(ValidationError, match="no observations"):
        MonthlySeries((), np.array([]))


def test_malformed_month():
    with pytest.raises(ParseError):
        MonthKey.parse("1990-1")
    with pytest.raises(ValidationError):
        MonthKey.parse("199013")


@given(st.integers(1900, 2100), st.integers(1, 12), st.integers(0, 400))
def test_month_arithmetic(year, month, n):
    k = MonthKey(year, month)
    assert MonthKey.parse(str(k)) == k
    r = [k]
    for _ in range(n):
        r.append(r[-1].next())
    assert month_range(k, r[-1]) == r
    assert r[-1].index() - k.index() == n


def test_decile_panel_shape_check():
    keys = (MonthKey(1990, 1),)
    with pytest.raises(AlignmentError):
        DecilePanel(keys, np.ones((1, 9)), np.ones((1, 10)), np.ones((1, 10)))
