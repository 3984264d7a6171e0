import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from toporisk.market_data import (
    DataError,
    PricePanel,
    ReturnsPanel,
    WindowSpec,
    compute_returns,
    drop_incomplete_assets,
    load_prices,
    rolling_windows,
    window_count,
)


def write(tmp_path, text, name="prices.csv"):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_load_valid_csv(tmp_path):
    path = write(tmp_path, "date,AAA,BBB\n2020-01-01,1,2\n2020-01-02,1.5,2.5\n2020-01-03,2,3\n")
    panel = load_prices(path)
    assert panel.dates == ("2020-01-01", "2020-01-02", "2020-01-03")
    assert panel.assets == ("AAA", "BBB")
    assert panel.prices.shape == (3, 2)


def test_load_keeps_empty_cells_as_missing(tmp_path):
    path = write(tmp_path, "date,AAA,BBB\n2020-01-01,1,\n2020-01-02,1.5,2.5\n")
    panel = load_prices(path)
    assert np.isnan(panel.prices[0, 1])


@pytest.mark.parametrize(
    "body, message",
    [
        ("2020-01-01,1,0\n", "non-positive price '0' at row 2, column BBB"),
        ("2020-01-01,1,-3\n", "non-positive price"),
        ("2020-01-01,1,abc\n", "non-numeric cell 'abc' at row 2, column BBB"),
        ("2020-13-01,1,2\n", "malformed date"),
        ("2020-01-02,1,2\n2020-01-01,1,2\n", "dates not increasing"),
        ("2020-01-01,1,2\n2020-01-01,1,2\n", "duplicate date"),
    ],
)
def test_load_errors_name_the_cell(tmp_path, body, message):
    path = write(tmp_path, "date,AAA,BBB\n" + body)
    with pytest.raises(DataError, match=message):
        load_prices(path)


def test_load_missing_file(tmp_path):
    with pytest.raises(DataError, match="no such file"):
        load_prices(tmp_path / "nope.csv")


def panel_with(prices, assets=None):
    prices = np.asarray(prices, float)
    assets = assets or tuple(f"X{i}" for i in range(prices.shape[1]))
    dates = tuple(f"2020-01-{i + 1:02d}" for i in range(prices.shape[0]))
    return PricePanel(dates, tuple(assets), prices)


def test_drop_incomplete():
    p = panel_with([[1, 2, 3], [1, np.nan, 3], [1, 2, 3]], ("A", "B", "C"))
    out = drop_incomplete_assets(p)
    assert out.assets == ("A", "C")
    assert drop_incomplete_assets(out).assets == out.assets


def test_drop_incomplete_all_complete_is_identity():
    p = panel_with([[1, 2], [2, 3]])
    out = drop_incomplete_assets(p)
    assert out.assets == p.assets
    np.testing.assert_array_equal(out.prices, p.prices)


def test_drop_incomplete_empty_universe():
    p = panel_with([[1, np.nan], [np.nan, 3]])
    with pytest.raises(DataError, match="empty universe"):
        drop_incomplete_assets(p)


@pytest.mark.parametrize(
    "prices, expected",
    [
        ([100, 110], [0.10]),
        ([5, 5, 5], [0.0, 0.0]),
        ([100, 50, 100], [-0.5, 1.0]),  # hand application of (p_t - p_{t-1}) / p_{t-1}
    ],
)
def test_compute_returns(prices, expected):
    r = compute_returns(panel_with(np.array(prices, float)[:, None]))
    np.testing.assert_allclose(r.returns[:, 0], expected, rtol=0, atol=1e-15)
    assert len(r.dates) == len(prices) - 1


def test_compute_returns_needs_two_dates():
    with pytest.raises(DataError):
        compute_returns(panel_with([[1.0]]))


@given(st.lists(st.floats(1.0, 1e3), min_size=2, max_size=60))
def test_compounding_recovers_price_ratio(prices):
    # 1 + r loses digits when a price drops ~1000x in one step, hence rel=1e-10
    r = compute_returns(panel_with(np.array(prices)[:, None]))
    growth = np.prod(1 + r.returns[:, 0])
    assert growth == pytest.approx(prices[-1] / prices[0], rel=1e-10)


def returns_panel(T, n=1):
    dates = tuple(str(i).zfill(6) for i in range(T))
    return ReturnsPanel(dates, tuple(f"X{i}" for i in range(n)), np.zeros((T, n)))


def test_rolling_windows_exact_fit():
    assert len(rolling_windows(returns_panel(273), WindowSpec(252, 21, 21))) == 1


def test_rolling_windows_two():
    # enumeration: starts 0 and 21; 21 + 273 = 294 rows used exactly
    wins = rolling_windows(returns_panel(294), WindowSpec(252, 21, 21))
    assert len(wins) == 2
    ins, outs = wins[1]
    assert ins.dates[0] == "000021"
    assert outs.dates[0] == "000273" and outs.dates[-1] == "000293"


def test_rolling_windows_too_short():
    with pytest.raises(DataError):
        rolling_windows(returns_panel(272), WindowSpec(252, 21, 21))


@given(st.integers(1, 30), st.integers(1, 10), st.integers(1, 10), st.integers(0, 120))
def test_window_layout(in_len, out_len, shift, extra):
    T = in_len + out_len + extra
    spec = WindowSpec(in_len, out_len, shift)
    panel = returns_panel(T)
    wins = rolling_windows(panel, spec)
    count = len(wins)
    # brute-force enumeration of start offsets whose out-slice fits
    assert count == sum(1 for s in range(T) if s % shift == 0 and s + in_len + out_len <= T)
    assert count == window_count(T, spec)
    for m, (ins, outs) in enumerate(wins):
        assert int(ins.dates[0]) == m * shift
        assert int(outs.dates[0]) == int(ins.dates[-1]) + 1
        assert len(ins) == in_len and len(outs) == out_len


def test_window_spec_validation():
    with pytest.raises(ValueError):
        WindowSpec(0, 1, 1)
