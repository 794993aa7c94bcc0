import math

import numpy as np
import pytest

from curvecast import (
    DataError,
    FunctionalTimeSeries,
    IntradayGrid,
    PriceMatrix,
    cidr_transform,
    ingest_price_matrix,
    interpolate_missing,
    inverse_cidr,
    read_price_csv,
    write_wide_csv,
)


def make_prices(seed, n, tau):
    r = np.random.default_rng(seed)
    return 100.0 * np.exp(np.cumsum(r.normal(0.0, 0.01, size=(n, tau)), axis=1))


class TestGrid:
    def test_regular_times(self):
        g = IntradayGrid.regular(5)
        assert g.tau == 5
        assert g.times == (0.0, 5.0, 10.0, 15.0, 20.0)

    def test_too_few_points(self):
        with pytest.raises(DataError):
            IntradayGrid.regular(2)


class TestCidr:
    def test_hand_example(self):
        pm = PriceMatrix(
            np.array([[100.0, 110.0, 121.0], [100.0, 90.0, 81.0]]),
            IntradayGrid.regular(3),
        )
        fts = cidr_transform(pm)
        expected = np.array(
            [
                [100 * math.log(1.1), 100 * math.log(1.21)],
                [100 * math.log(0.9), 100 * math.log(0.81)],
            ]
        )
        assert np.allclose(fts.values, expected, atol=1e-12)

    def test_first_point_always_zero_reference(self):
        pm = PriceMatrix(make_prices(4, 7, 9), IntradayGrid.regular(9))
        fts = cidr_transform(pm)
        assert fts.values.shape == (7, 8)
        assert fts.grid.tau == 9

    def test_round_trip(self):
        prices = make_prices(5, 12, 10)
        pm = PriceMatrix(prices, IntradayGrid.regular(10))
        back = inverse_cidr(cidr_transform(pm), prices[:, 0])
        assert np.allclose(back.prices, prices, atol=1e-10)

    def test_inverse_needs_matching_opens(self):
        pm = PriceMatrix(make_prices(6, 3, 5), IntradayGrid.regular(5))
        with pytest.raises(DataError):
            inverse_cidr(cidr_transform(pm), [100.0, 100.0])

    def test_rejects_nonpositive_price(self):
        with pytest.raises(DataError):
            PriceMatrix(np.array([[100.0, -1.0, 102.0]]), IntradayGrid.regular(3))

    def test_rejects_wrong_width(self):
        with pytest.raises(DataError):
            PriceMatrix(np.array([[100.0, 101.0]]), IntradayGrid.regular(3))


class TestSeries:
    def test_head_and_window(self):
        values = np.arange(12.0).reshape(6, 2)
        fts = FunctionalTimeSeries(values, IntradayGrid.regular(3))
        assert np.array_equal(fts.head(2).values, values[:2])
        assert np.array_equal(fts.window(2, 5).values, values[2:5])


class TestIngestion:
    def test_interior_gap_interpolated(self):
        pm = interpolate_missing(np.array([[100.0, np.nan, 104.0]]))
        assert pm.prices[0, 1] == pytest.approx(102.0)

    def test_drops_bad_days_and_reports(self):
        raw = np.array(
            [
                [100.0, 101.0, 102.0, 103.0],
                [100.0, np.nan, 102.0, 103.0],
                [np.nan, np.nan, np.nan, np.nan],
                [100.0, 101.0, np.nan, np.nan],
            ]
        )
        with pytest.warns(UserWarning):
            pm, kept, summary = ingest_price_matrix(raw, dates=list("abcd"))
        assert kept == ["a", "b"]
        assert pm.prices.shape == (2, 4)
        assert summary["days_in"] == 4
        assert summary["days_kept"] == 2
        assert summary["interpolated_cells"] == 1
        assert {d["date"] for d in summary["days_dropped"]} == {"c", "d"}

    def test_max_missing_frac(self):
        raw = np.array(
            [
                [100.0, 101.0, 102.0, 103.0, 104.0, 105.0],
                [100.0, 101.0, np.nan, np.nan, np.nan, 105.0],
            ]
        )
        with pytest.warns(UserWarning):
            _, kept, _ = ingest_price_matrix(raw, max_missing_frac=0.4)
        assert kept == ["day0001"]

    def test_clean_input_no_warning(self):
        raw = make_prices(7, 4, 5)
        pm, kept, summary = ingest_price_matrix(raw)
        assert len(kept) == 4
        assert summary["days_dropped"] == []


class TestCsv:
    def test_round_trip_with_dates(self, tmp_path):
        prices = make_prices(8, 5, 6)
        dates = [f"2024-01-{d:02d}" for d in range(1, 6)]
        path = tmp_path / "px.csv"
        write_wide_csv(str(path), PriceMatrix(prices, IntradayGrid.regular(6)), dates)
        raw, grid, got_dates = read_price_csv(str(path))
        assert got_dates == dates
        assert grid.tau == 6
        assert np.allclose(raw, prices, atol=1e-12)

    def test_missing_file_is_data_error(self, tmp_path):
        with pytest.raises(DataError):
            read_price_csv(str(tmp_path / "nope.csv"))
