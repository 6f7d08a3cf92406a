"""Ingestion, scaling, splitting, and windowing."""

import numpy as np
import pytest

from conftest import write_csv
from modecast.errors import (
    ConstantSeriesError,
    EmptyInputError,
    NonFiniteError,
    TooFewRowsError,
    TooShortError,
)
from modecast.series import (
    TimeSeries,
    apply_scaler,
    fit_scaler,
    make_windows,
    read_csv_dataset,
    split_dataset,
    split_spec_for,
)


class TestTimeSeries:
    def test_rejects_nan(self):
        with pytest.raises(NonFiniteError):
            TimeSeries(np.array([1.0, np.nan, 3.0]), name="bad")

    def test_rejects_inf(self):
        with pytest.raises(NonFiniteError):
            TimeSeries(np.array([1.0, np.inf]))

    def test_values_are_read_only(self):
        ts = TimeSeries(np.arange(5.0))
        with pytest.raises(ValueError):
            ts.values[0] = 99.0

    def test_detached_from_source_array(self):
        src = np.arange(4.0)
        ts = TimeSeries(src)
        src[0] = 123.0
        assert ts.values[0] == 0.0

    def test_with_values_keeps_identity(self):
        ts = TimeSeries(np.arange(3.0), name="load", channel_id=2)
        out = ts.with_values(np.ones(7))
        assert (out.name, out.channel_id, len(out)) == ("load", 2, 7)


class TestScaler:
    def test_population_std(self):
        # mean 2, population std sqrt(2/3) (divisor N, not N-1)
        ts = TimeSeries(np.array([1.0, 2.0, 3.0]))
        params = fit_scaler(ts)
        assert params.mean == pytest.approx(2.0, abs=1e-15)
        assert params.std == pytest.approx(np.sqrt(2.0 / 3.0), abs=1e-15)

    def test_too_short(self):
        with pytest.raises(TooShortError):
            fit_scaler(TimeSeries(np.array([5.0])))

    def test_constant_series(self):
        with pytest.raises(ConstantSeriesError):
            fit_scaler(TimeSeries(np.full(10, 3.14)))

    def test_round_trip(self):
        rng = np.random.default_rng(0)
        ts = TimeSeries(rng.normal(5.0, 2.0, size=200))
        params = fit_scaler(ts)
        back = apply_scaler(apply_scaler(ts, params), params, direction="inverse")
        np.testing.assert_allclose(back.values, ts.values, atol=1e-12)

    def test_forward_standardizes(self):
        rng = np.random.default_rng(1)
        ts = TimeSeries(rng.normal(-3.0, 0.5, size=500))
        scaled = apply_scaler(ts, fit_scaler(ts))
        assert abs(scaled.values.mean()) < 1e-12
        assert scaled.values.std() == pytest.approx(1.0, abs=1e-12)

    def test_bad_direction(self):
        ts = TimeSeries(np.arange(4.0))
        with pytest.raises(ValueError):
            apply_scaler(ts, fit_scaler(ts), direction="sideways")


class TestSplit:
    @pytest.mark.parametrize(
        "rows,train,test,trimmed",
        [
            (10, 9, 1, False),
            (400, 360, 40, False),
            (499, 449, 50, False),
            (500, 400, 100, False),
            (9999, 7999, 2000, False),
            (10000, 8000, 2000, False),
            (10001, 8000, 2000, True),
            (12000, 8000, 2000, True),
        ],
    )
    def test_protocol(self, rows, train, test, trimmed):
        result = split_dataset(rows)
        assert result == (train, test, trimmed)

    def test_too_few_rows(self):
        with pytest.raises(TooFewRowsError):
            split_dataset(9)

    def test_partition_is_exhaustive(self):
        for rows in range(10, 700, 13):
            result = split_dataset(rows)
            assert result.train_rows + result.test_rows == min(rows, 10000)

    def test_spec_fractions(self):
        assert split_spec_for(499).train_fraction == 0.9
        assert split_spec_for(500).train_fraction == 0.8
        assert split_spec_for(10001).trim_limit == 10000


class TestWindows:
    def test_counts_and_content(self):
        values = np.arange(10.0)
        ws = make_windows(values, lookback=4, horizon=2)
        assert ws.n_rows == 10 - 4 - 2 + 1
        np.testing.assert_array_equal(ws.inputs[0], [0, 1, 2, 3])
        np.testing.assert_array_equal(ws.targets[0], [4, 5])
        np.testing.assert_array_equal(ws.inputs[-1], [4, 5, 6, 7])
        np.testing.assert_array_equal(ws.targets[-1], [8, 9])

    def test_window_i_starts_at_i(self):
        values = np.arange(30.0)
        ws = make_windows(values, lookback=5, horizon=3)
        for i in range(ws.n_rows):
            np.testing.assert_array_equal(ws.inputs[i], values[i : i + 5])
            np.testing.assert_array_equal(ws.targets[i], values[i + 5 : i + 8])

    def test_exact_length_yields_one_window(self):
        ws = make_windows(np.arange(7.0), lookback=4, horizon=3)
        assert ws.n_rows == 1

    def test_too_short(self):
        with pytest.raises(TooShortError):
            make_windows(np.arange(6.0), lookback=4, horizon=3)

    @pytest.mark.parametrize("lookback,horizon", [(0, 2), (2, 0), (-1, 1)])
    def test_invalid_sizes(self, lookback, horizon):
        with pytest.raises(ValueError):
            make_windows(np.arange(10.0), lookback, horizon)

    def test_accepts_time_series(self):
        ts = TimeSeries(np.arange(8.0))
        ws = make_windows(ts, lookback=3, horizon=2)
        assert ws.n_rows == 4


class TestCsvIngestion:
    def test_basic_read(self, tmp_path):
        path = write_csv(tmp_path / "a.csv", {"x": np.arange(5.0), "y": np.arange(5.0) * 2})
        data = read_csv_dataset(path)
        assert data.n_rows == 5
        assert data.column_names() == ["x", "y"]
        assert data.timestamps[:2] == ("0", "1")
        np.testing.assert_array_equal(data.series[1].values, np.arange(5.0) * 2)
        assert data.series[1].channel_id == 1
        assert data.dropped_rows == 0

    def test_drops_bad_rows(self, tmp_path):
        path = tmp_path / "mess.csv"
        path.write_text(
            "timestamp,v\n"
            "0,1.0\n"
            "1,not_a_number\n"
            "2,2.0\n"
            "3,nan\n"
            "4,3.0\n"
            "5,1.0,extra_field\n",
            encoding="utf-8",
        )
        data = read_csv_dataset(path)
        assert data.dropped_rows == 3
        assert data.n_rows == 3
        np.testing.assert_array_equal(data.series[0].values, [1.0, 2.0, 3.0])
        # timestamps of surviving rows are kept verbatim
        assert data.timestamps == ("0", "2", "4")

    def test_timestamps_verbatim(self, tmp_path):
        path = tmp_path / "t.csv"
        path.write_text(
            "timestamp,v\n2021-01-01 00:00,1.0\n2021-01-01 01:00,2.0\n",
            encoding="utf-8",
        )
        data = read_csv_dataset(path)
        assert data.timestamps == ("2021-01-01 00:00", "2021-01-01 01:00")

    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("", encoding="utf-8")
        with pytest.raises(EmptyInputError):
            read_csv_dataset(path)

    def test_timestamp_only_header(self, tmp_path):
        path = tmp_path / "one.csv"
        path.write_text("timestamp\n0\n1\n", encoding="utf-8")
        with pytest.raises(EmptyInputError):
            read_csv_dataset(path)

    def test_no_usable_rows(self, tmp_path):
        path = tmp_path / "allbad.csv"
        path.write_text("timestamp,v\n0,oops\n1,inf\n", encoding="utf-8")
        with pytest.raises(EmptyInputError):
            read_csv_dataset(path)

    def test_select_reorders_and_renumbers(self, tmp_path):
        path = write_csv(
            tmp_path / "m.csv",
            {"a": np.ones(4), "b": np.ones(4) * 2, "c": np.ones(4) * 3},
        )
        data = read_csv_dataset(path).select(["c", "a"])
        assert data.column_names() == ["c", "a"]
        assert [s.channel_id for s in data.series] == [0, 1]
        np.testing.assert_array_equal(data.series[0].values, np.full(4, 3.0))

    def test_select_unknown_column_names_available(self, tmp_path):
        path = write_csv(tmp_path / "m.csv", {"a": np.ones(4), "b": np.ones(4)})
        data = read_csv_dataset(path)
        with pytest.raises(KeyError) as exc:
            data.select(["temperature"])
        assert "temperature" in str(exc.value)
        assert "a" in str(exc.value) and "b" in str(exc.value)
