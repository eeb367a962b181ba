"""Daily/monthly multivariate time-series container and CSV ingestion.

The on-disk convention is a plain CSV with one date column (ISO ``YYYY-MM-DD``)
and one numeric column per variable. Cells that are empty or read ``NA`` /
``NaN`` (case-insensitive) mark missing values; any row with a missing value in
a used column is dropped at load time, so every retained row is complete.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (
    ColumnNotFoundError,
    ContractError,
    EmptyDataError,
    InputError,
    InvalidOperationError,
    NonFiniteError,
    UnsupportedResolutionError,
)

MISSING_TOKENS = frozenset({"", "na", "nan"})

#: inclusive (month, day) windows; together they partition the calendar year
GROWING_WINDOW = ((4, 1), (10, 31))
DORMANT_WINDOW = ((11, 1), (3, 31))


def _is_missing(token: str) -> bool:
    return token.strip().lower() in MISSING_TOKENS


@dataclass(frozen=True)
class Column:
    """Metadata for one variable: name, physical unit, and role."""

    name: str
    unit: str = ""
    role: str = "exog"  # "target" | "exog"

    def __post_init__(self) -> None:
        if self.role not in ("target", "exog"):
            raise ContractError(f"unknown column role {self.role!r}")


@dataclass(frozen=True)
class SeasonFilter:
    """Seasonal row filter. Windows are day-resolved and partition the year."""

    mode: str = "all"  # "all" | "growing" | "dormant"

    def __post_init__(self) -> None:
        if self.mode not in ("all", "growing", "dormant"):
            raise ContractError(f"unknown season mode {self.mode!r}")

    def contains(self, dates: np.ndarray) -> np.ndarray:
        """Boolean mask of dates inside the window.

        Growing season runs Apr 1 - Oct 31; dormant runs Nov 1 - Mar 31,
        wrapping the year boundary (Feb 29 is dormant). Both windows align
        with month boundaries, so membership reduces to the month number.
        """
        if self.mode == "all":
            return np.ones(dates.shape, dtype=bool)
        months = dates.astype("datetime64[M]")
        month_no = (months - months.astype("datetime64[Y]")).astype(int) + 1
        growing = (month_no >= GROWING_WINDOW[0][0]) & (month_no <= GROWING_WINDOW[1][0])
        return growing if self.mode == "growing" else ~growing


@dataclass(frozen=True)
class TimeSeriesFrame:
    """Immutable complete-case time series at daily or monthly resolution.

    ``targets`` holds the modeled variables (n x k), ``exog`` the candidate
    drivers (n x m). ``columns`` lists target metadata first, then exogenous,
    matching the matrix layout. ``complete`` is the per-row completeness mask;
    after loading it is all True by construction. ``coverage`` (monthly frames
    only) gives the fraction of calendar days each month had data for.
    """

    dates: np.ndarray
    targets: np.ndarray
    exog: np.ndarray
    columns: tuple[Column, ...]
    resolution: str = "daily"
    complete: np.ndarray = field(default=None)  # type: ignore[assignment]
    dropped_rows: int = 0
    coverage: np.ndarray | None = None

    def __post_init__(self) -> None:
        dates = np.asarray(self.dates, dtype="datetime64[D]")
        targets = np.asarray(self.targets, dtype=float)
        if targets.ndim == 1:
            targets = targets.reshape(-1, 1)
        exog = np.asarray(self.exog, dtype=float)
        if exog.size == 0:
            exog = exog.reshape(len(dates), 0)
        elif exog.ndim == 1:
            exog = exog.reshape(-1, 1)
        complete = self.complete
        if complete is None:
            complete = np.ones(len(dates), dtype=bool)
        complete = np.asarray(complete, dtype=bool)

        if self.resolution not in ("daily", "monthly"):
            raise ContractError(f"unknown resolution {self.resolution!r}")
        n = len(dates)
        if targets.shape[0] != n or exog.shape[0] != n or complete.shape[0] != n:
            raise ContractError("dates, targets, exog and mask row counts differ")
        if n > 1 and not np.all(dates[1:] > dates[:-1]):
            raise ContractError("dates must be strictly increasing and unique")
        if len(self.columns) != targets.shape[1] + exog.shape[1]:
            raise ContractError("column metadata does not match matrix widths")
        roles = [c.role for c in self.columns]
        k = targets.shape[1]
        if roles != ["target"] * k + ["exog"] * exog.shape[1]:
            raise ContractError("columns must list targets first, then exogenous")
        if not (np.all(np.isfinite(targets)) and np.all(np.isfinite(exog))):
            raise NonFiniteError("frame contains non-finite values")

        for name, arr in (("dates", dates), ("targets", targets),
                          ("exog", exog), ("complete", complete)):
            arr = np.ascontiguousarray(arr)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.coverage is not None:
            cov = np.ascontiguousarray(np.asarray(self.coverage, dtype=float))
            cov.setflags(write=False)
            object.__setattr__(self, "coverage", cov)

    # -- views ---------------------------------------------------------------

    @property
    def n(self) -> int:
        return len(self.dates)

    @property
    def k(self) -> int:
        return self.targets.shape[1]

    @property
    def m(self) -> int:
        return self.exog.shape[1]

    @property
    def target_names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.columns[: self.k])

    @property
    def exog_names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.columns[self.k:])

    def column_values(self, name: str) -> np.ndarray:
        """Values of one named column (target or exogenous)."""
        names = self.target_names + self.exog_names
        if name not in names:
            raise ColumnNotFoundError(f"no column named {name!r}")
        i = names.index(name)
        return self.targets[:, i] if i < self.k else self.exog[:, i - self.k]


def load_csv(path, target_columns, date_column: str = "Date",
             exog_columns=None, units=None) -> TimeSeriesFrame:
    """Load a daily CSV into a complete-case TimeSeriesFrame.

    Parameters
    ----------
    path : str or Path
        CSV file with a header row.
    target_columns : sequence of str
        Names of the modeled variables, in the order they should appear.
    date_column : str
        Name of the ISO-date column.
    exog_columns : sequence of str, optional
        Exogenous columns to keep. Default: every other column in file order.
    units : mapping, optional
        Column name -> unit string, recorded as metadata only.

    Rows with a missing value (empty, ``NA`` or ``NaN``, case-insensitive) in
    any used column are dropped; the count is kept in ``dropped_rows``.
    Malformed numbers or dates raise :class:`InputError` naming the line and
    column. Duplicate dates are rejected; rows are sorted by date.
    """
    target_columns = list(target_columns)
    units = dict(units or {})
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyDataError(f"{path}: file is empty") from None
        header = [h.strip() for h in header]
        if date_column not in header:
            raise ColumnNotFoundError(f"{path}: no date column {date_column!r}")
        for name in target_columns:
            if name not in header:
                raise ColumnNotFoundError(f"{path}: no target column {name!r}")
        if exog_columns is None:
            exog_columns = [h for h in header
                            if h != date_column and h not in target_columns]
        else:
            exog_columns = list(exog_columns)
            for name in exog_columns:
                if name not in header:
                    raise ColumnNotFoundError(f"{path}: no column {name!r}")
        overlap = set(target_columns) & set(exog_columns)
        if overlap:
            raise ContractError(f"columns {sorted(overlap)} listed as both "
                                "target and exogenous")

        date_idx = header.index(date_column)
        used = target_columns + exog_columns
        used_idx = [header.index(name) for name in used]

        dates: list[np.datetime64] = []
        rows: list[list[float]] = []
        dropped = 0
        for lineno, raw in enumerate(reader, start=2):
            if not raw or all(not cell.strip() for cell in raw):
                continue
            if len(raw) < len(header):
                raise InputError(f"{path}: line {lineno}: expected "
                                 f"{len(header)} fields, got {len(raw)}")
            token = raw[date_idx].strip()
            if _is_missing(token):
                dropped += 1
                continue
            try:
                date = np.datetime64(token, "D")
            except ValueError:
                raise InputError(f"{path}: line {lineno}: column "
                                 f"{date_column!r}: bad date {token!r}") from None
            cells = [raw[i].strip() for i in used_idx]
            if any(_is_missing(c) for c in cells):
                dropped += 1
                continue
            values = []
            for name, cell in zip(used, cells):
                try:
                    values.append(float(cell))
                except ValueError:
                    raise InputError(f"{path}: line {lineno}: column {name!r}: "
                                     f"bad number {cell!r}") from None
            dates.append(date)
            rows.append(values)

    if not rows:
        raise EmptyDataError(f"{path}: no complete rows after dropping missing")

    date_arr = np.array(dates, dtype="datetime64[D]")
    order = np.argsort(date_arr, kind="stable")
    date_arr = date_arr[order]
    dup = np.flatnonzero(date_arr[1:] == date_arr[:-1])
    if dup.size:
        raise InputError(f"{path}: duplicate date {date_arr[dup[0]]}")
    data = np.asarray(rows, dtype=float)[order]

    k = len(target_columns)
    cols = tuple(Column(name, units.get(name, ""), "target") for name in target_columns) \
        + tuple(Column(name, units.get(name, ""), "exog") for name in exog_columns)
    return TimeSeriesFrame(
        dates=date_arr, targets=data[:, :k], exog=data[:, k:],
        columns=cols, resolution="daily", dropped_rows=dropped,
    )


def write_csv(frame: TimeSeriesFrame, path) -> None:
    """Write a frame back out in the same CSV convention ``load_csv`` reads.

    Floats use shortest round-trip formatting, so load_csv(write_csv(f))
    reproduces the values exactly. Monthly frames serialize their
    first-of-month dates; resolution is not encoded in the file.
    """
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["Date", *frame.target_names, *frame.exog_names])
        both = np.hstack([frame.targets, frame.exog])
        for i in range(frame.n):
            writer.writerow([str(frame.dates[i])] + [repr(float(v)) for v in both[i]])


def filter_season(frame: TimeSeriesFrame, season) -> TimeSeriesFrame:
    """Restrict a daily frame to one seasonal window.

    ``season`` is a :class:`SeasonFilter` or one of ``"all"``, ``"growing"``,
    ``"dormant"``. Monthly frames are rejected: the windows are day-resolved.
    """
    if isinstance(season, str):
        season = SeasonFilter(season)
    if season.mode == "all":
        return frame
    if frame.resolution != "daily":
        raise UnsupportedResolutionError(
            "seasonal filtering is defined for daily frames only")
    mask = season.contains(frame.dates)
    if not mask.any():
        raise EmptyDataError(f"no rows fall in the {season.mode} season")
    return replace(
        frame, dates=frame.dates[mask], targets=frame.targets[mask],
        exog=frame.exog[mask], complete=frame.complete[mask],
    )


def aggregate_monthly(frame: TimeSeriesFrame, sum_columns=()) -> TimeSeriesFrame:
    """Aggregate a daily frame to monthly resolution.

    Columns named in ``sum_columns`` (accumulation variables such as rainfall)
    are summed over the month; every other column is averaged. Output rows are
    dated the first of the month, and ``coverage`` records the fraction of
    calendar days with data. Months with no retained days simply do not appear.
    """
    if frame.resolution != "daily":
        raise UnsupportedResolutionError("frame is already monthly")
    names = frame.target_names + frame.exog_names
    sum_columns = tuple(sum_columns)
    for name in sum_columns:
        if name not in names:
            raise ColumnNotFoundError(f"sum column {name!r} not in frame")
    take_sum = np.array([name in sum_columns for name in names])

    months = frame.dates.astype("datetime64[M]")
    uniq, inverse = np.unique(months, return_inverse=True)
    both = np.hstack([frame.targets, frame.exog])
    out = np.empty((len(uniq), both.shape[1]))
    coverage = np.empty(len(uniq))
    for g, month in enumerate(uniq):
        rows = both[inverse == g]
        sums = rows.sum(axis=0)
        out[g] = np.where(take_sum, sums, sums / len(rows))
        span = (month + 1).astype("datetime64[D]") - month.astype("datetime64[D]")
        days = int(span / np.timedelta64(1, "D"))
        coverage[g] = len(rows) / days
    return TimeSeriesFrame(
        dates=uniq.astype("datetime64[D]"), targets=out[:, : frame.k],
        exog=out[:, frame.k:], columns=frame.columns, resolution="monthly",
        dropped_rows=frame.dropped_rows, coverage=coverage,
    )


def drop_columns(frame: TimeSeriesFrame, names) -> TimeSeriesFrame:
    """Remove exogenous columns by name (used by ablation studies).

    Target columns cannot be dropped; asking raises InvalidOperationError.
    """
    names = list(names)
    if not names:
        return frame
    for name in names:
        if name in frame.target_names:
            raise InvalidOperationError(f"{name!r} is a target column")
        if name not in frame.exog_names:
            raise ColumnNotFoundError(f"no column named {name!r}")
    keep = [i for i, name in enumerate(frame.exog_names) if name not in names]
    cols = frame.columns[: frame.k] + tuple(frame.columns[frame.k + i] for i in keep)
    return replace(frame, exog=frame.exog[:, keep], columns=cols)
