"""Data ingestion, seasonal filtering, monthly aggregation, column dropping."""

import numpy as np
import pytest

from conftest import daily_dates, make_frame
from hydrovarx import (
    Column,
    SeasonFilter,
    TimeSeriesFrame,
    aggregate_monthly,
    drop_columns,
    filter_season,
    load_csv,
    write_csv,
)
from hydrovarx.errors import (
    ColumnNotFoundError,
    ContractError,
    EmptyDataError,
    InputError,
    InvalidOperationError,
    NonFiniteError,
    UnsupportedResolutionError,
)


def _write(path, text):
    path.write_text(text)
    return path


def test_load_csv_basic(tmp_path):
    csv = _write(tmp_path / "d.csv",
                 "Date,WTD,Rainfall\n"
                 "2016-01-01,-50.5,0.0\n"
                 "2016-01-02,-51.0,12.5\n"
                 "2016-01-03,-52.25,0.1\n")
    frame = load_csv(csv, ["WTD"])
    assert frame.n == 3 and frame.k == 1 and frame.m == 1
    assert frame.target_names == ("WTD",)
    assert frame.exog_names == ("Rainfall",)
    np.testing.assert_array_equal(frame.targets[:, 0], [-50.5, -51.0, -52.25])
    np.testing.assert_array_equal(frame.exog[:, 0], [0.0, 12.5, 0.1])
    assert frame.dropped_rows == 0
    assert frame.complete.all()


def test_load_csv_drops_incomplete_rows(tmp_path):
    csv = _write(tmp_path / "d.csv",
                 "Date,WTD,Rainfall\n"
                 "2016-01-01,-50,0\n"
                 "2016-01-02,,1\n"          # empty cell
                 "2016-01-03,-52,NA\n"       # NA token
                 "2016-01-04,NaN,2\n"        # NaN token
                 "2016-01-05,-54,3\n")
    frame = load_csv(csv, ["WTD"])
    assert frame.n == 2
    assert frame.dropped_rows == 3
    np.testing.assert_array_equal(frame.targets[:, 0], [-50.0, -54.0])


def test_load_csv_sorts_by_date(tmp_path):
    csv = _write(tmp_path / "d.csv",
                 "Date,Y\n2016-01-03,3\n2016-01-01,1\n2016-01-02,2\n")
    frame = load_csv(csv, ["Y"])
    np.testing.assert_array_equal(frame.targets[:, 0], [1.0, 2.0, 3.0])


def test_load_csv_duplicate_date_rejected(tmp_path):
    csv = _write(tmp_path / "d.csv",
                 "Date,Y\n2016-01-01,1\n2016-01-01,2\n")
    with pytest.raises(InputError):
        load_csv(csv, ["Y"])


def test_load_csv_bad_cell_names_line_and_column(tmp_path):
    csv = _write(tmp_path / "d.csv",
                 "Date,Y\n2016-01-01,1\n2016-01-02,oops\n")
    with pytest.raises(InputError, match="line 3.*'Y'"):
        load_csv(csv, ["Y"])


def test_load_csv_missing_target_column(tmp_path):
    csv = _write(tmp_path / "d.csv", "Date,Y\n2016-01-01,1\n")
    with pytest.raises(ColumnNotFoundError):
        load_csv(csv, ["Nope"])


def test_load_csv_all_rows_missing(tmp_path):
    csv = _write(tmp_path / "d.csv",
                 "Date,Y\n2016-01-01,NA\n2016-01-02,\n")
    with pytest.raises(EmptyDataError):
        load_csv(csv, ["Y"])


def test_load_csv_explicit_exog_subset(tmp_path):
    csv = _write(tmp_path / "d.csv",
                 "Date,Y,a,b,c\n2016-01-01,1,2,3,4\n2016-01-02,5,6,7,8\n")
    frame = load_csv(csv, ["Y"], exog_columns=["c", "a"])
    assert frame.exog_names == ("c", "a")
    np.testing.assert_array_equal(frame.exog, [[4.0, 2.0], [8.0, 6.0]])


def test_write_csv_round_trip_exact(tmp_path):
    rng = np.random.default_rng(0)
    frame = make_frame(rng.normal(size=20) * 1e3, rng.normal(size=(20, 2)))
    path = tmp_path / "out.csv"
    write_csv(frame, path)
    back = load_csv(path, ["Y1"])
    np.testing.assert_array_equal(back.targets, frame.targets)
    np.testing.assert_array_equal(back.exog, frame.exog)
    np.testing.assert_array_equal(back.dates, frame.dates)


def test_frame_rejects_unsorted_dates():
    dates = np.array(["2016-01-02", "2016-01-01"], dtype="datetime64[D]")
    with pytest.raises(ContractError):
        TimeSeriesFrame(dates, np.zeros(2), np.zeros((2, 0)),
                        (Column("Y", role="target"),))


def test_frame_rejects_nonfinite():
    with pytest.raises(NonFiniteError):
        make_frame([1.0, np.inf, 3.0])


def test_frame_arrays_read_only():
    frame = make_frame([1.0, 2.0, 3.0])
    with pytest.raises(ValueError):
        frame.targets[0, 0] = 9.0


def test_column_values_lookup():
    frame = make_frame([1.0, 2.0], [[5.0], [6.0]])
    np.testing.assert_array_equal(frame.column_values("x1"), [5.0, 6.0])
    with pytest.raises(ColumnNotFoundError):
        frame.column_values("zzz")


# -- seasonal filtering -------------------------------------------------------

def test_season_boundary_spring():
    # Mar 31 is dormant; Apr 1 opens the growing season
    frame = make_frame([1.0, 2.0], start="2016-03-31")
    grow = filter_season(frame, "growing")
    assert grow.n == 1
    assert grow.dates[0] == np.datetime64("2016-04-01")
    dorm = filter_season(frame, "dormant")
    assert dorm.n == 1
    assert dorm.dates[0] == np.datetime64("2016-03-31")


def test_season_boundary_autumn():
    # Oct 31 closes the growing season; Nov 1 is dormant
    frame = make_frame([1.0, 2.0], start="2016-10-31")
    grow = filter_season(frame, "growing")
    assert grow.dates.tolist() == [np.datetime64("2016-10-31")]
    dorm = filter_season(frame, "dormant")
    assert dorm.dates.tolist() == [np.datetime64("2016-11-01")]


def test_seasons_partition_every_date():
    frame = make_frame(np.arange(366 * 2, dtype=float), start="2016-01-01")
    grow = SeasonFilter("growing").contains(frame.dates)
    dorm = SeasonFilter("dormant").contains(frame.dates)
    assert np.all(grow ^ dorm)


def test_feb_29_is_dormant():
    frame = make_frame([1.0], start="2016-02-29")
    assert filter_season(frame, "dormant").n == 1


def test_filter_all_is_identity():
    frame = make_frame([1.0, 2.0, 3.0])
    same = filter_season(frame, "all")
    np.testing.assert_array_equal(same.targets, frame.targets)


def test_filter_season_empty_result(tmp_path):
    frame = make_frame([1.0, 2.0], start="2016-06-01")
    with pytest.raises(EmptyDataError):
        filter_season(frame, "dormant")


def test_filter_monthly_resolution_rejected():
    frame = make_frame(np.arange(40, dtype=float), start="2016-06-01")
    monthly = aggregate_monthly(frame)
    with pytest.raises(UnsupportedResolutionError):
        filter_season(monthly, "growing")


def test_bad_season_mode_rejected():
    with pytest.raises(ContractError):
        SeasonFilter("summer")


# -- monthly aggregation ------------------------------------------------------

def test_aggregate_monthly_sum_and_mean():
    # 3 June days: Rainfall summed to 15, WTD averaged to -60
    frame = make_frame([-50.0, -60.0, -70.0], [[10.0], [0.0], [5.0]],
                       start="2016-06-01", target_names=["WTD"],
                       exog_names=["Rainfall"])
    monthly = aggregate_monthly(frame, sum_columns=("Rainfall",))
    assert monthly.n == 1
    assert monthly.resolution == "monthly"
    assert monthly.dates[0] == np.datetime64("2016-06-01")
    assert monthly.targets[0, 0] == -60.0
    assert monthly.exog[0, 0] == 15.0


def test_aggregate_monthly_single_day_month():
    frame = make_frame([-3.25], [[7.0]], start="2016-02-14")
    monthly = aggregate_monthly(frame, sum_columns=("x1",))
    assert monthly.targets[0, 0] == -3.25
    assert monthly.exog[0, 0] == 7.0


def test_aggregate_monthly_two_months():
    # 31 Jan days + 29 Feb days (2016 is a leap year)
    frame = make_frame(np.arange(60, dtype=float), start="2016-01-01")
    monthly = aggregate_monthly(frame)
    assert monthly.n == 2
    assert monthly.dates.tolist() == [np.datetime64("2016-01-01"),
                                      np.datetime64("2016-02-01")]
    np.testing.assert_allclose(monthly.coverage, [1.0, 1.0])


def test_aggregate_monthly_conservation():
    rng = np.random.default_rng(5)
    frame = make_frame(rng.normal(size=100), rng.uniform(0, 20, size=(100, 1)),
                       start="2016-03-10", exog_names=["Rainfall"])
    monthly = aggregate_monthly(frame, sum_columns=("Rainfall",))
    np.testing.assert_allclose(monthly.exog[:, 0].sum(), frame.exog[:, 0].sum(),
                               rtol=1e-12)


def test_aggregate_monthly_coverage_fraction():
    # 15 days of a 30-day month -> coverage 0.5
    frame = make_frame(np.arange(15, dtype=float), start="2016-06-01")
    monthly = aggregate_monthly(frame)
    np.testing.assert_allclose(monthly.coverage, [0.5])


# -- column dropping ----------------------------------------------------------

def test_drop_columns_removes_data():
    frame = make_frame([1.0, 2.0], [[1.0, 2.0], [3.0, 4.0]],
                       exog_names=["keep", "gone"])
    out = drop_columns(frame, ["gone"])
    assert out.exog_names == ("keep",)
    np.testing.assert_array_equal(out.exog, [[1.0], [3.0]])
    assert out.n == frame.n


def test_drop_columns_empty_set_identity():
    frame = make_frame([1.0, 2.0], [[1.0], [2.0]])
    out = drop_columns(frame, [])
    np.testing.assert_array_equal(out.exog, frame.exog)
    assert out.exog_names == frame.exog_names


def test_drop_columns_disjoint_sets_commute():
    frame = make_frame([1.0, 2.0], [[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]],
                       exog_names=["a", "b", "c"])
    ab = drop_columns(drop_columns(frame, ["a"]), ["b"])
    ba = drop_columns(drop_columns(frame, ["b"]), ["a"])
    assert ab.exog_names == ba.exog_names == ("c",)
    np.testing.assert_array_equal(ab.exog, ba.exog)


def test_drop_target_rejected():
    frame = make_frame([1.0, 2.0], [[1.0], [2.0]])
    with pytest.raises(InvalidOperationError):
        drop_columns(frame, ["Y1"])


def test_drop_unknown_rejected():
    frame = make_frame([1.0, 2.0], [[1.0], [2.0]])
    with pytest.raises(ColumnNotFoundError):
        drop_columns(frame, ["mystery"])
