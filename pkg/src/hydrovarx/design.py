"""Lagged design matrices for VARX fitting.

Regressor columns are laid out lag-major: all target lags at lag 1, ...,
all target lags at lag p, then all exogenous columns at lag 1, ..., lag s.
Labels follow the same convention used in reported coefficient tables:
``Y1L1`` is target 1 at lag 1, ``Rainfall2`` is the Rainfall column at lag 2.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import ContractError, InsufficientDataError, NonFiniteError
from .frame import TimeSeriesFrame


@dataclass(frozen=True)
class LagSpec:
    """Lag orders and row-alignment mode.

    ``calendar`` mode treats lags as true calendar offsets (days for daily
    frames, months for monthly): a row is usable only if every lagged date is
    actually present, so data gaps shrink the design instead of silently
    misaligning it. ``positional`` mode lags over adjacent retained rows.
    """

    p: int = 4
    s: int = 2
    mode: str = "calendar"  # "calendar" | "positional"

    def __post_init__(self) -> None:
        if self.p < 1:
            raise ContractError("p must be >= 1")
        if self.s < 0:
            raise ContractError("s must be >= 0")
        if self.mode not in ("calendar", "positional"):
            raise ContractError(f"unknown lag mode {self.mode!r}")


@dataclass(frozen=True)
class DesignMatrix:
    """Response block Y (n_eff x k) and regressor block Z (n_eff x q)."""

    Y: np.ndarray
    Z: np.ndarray
    row_dates: np.ndarray
    col_labels: tuple[str, ...]
    target_names: tuple[str, ...]
    exog_names: tuple[str, ...]
    p: int
    s: int
    mode: str

    def __post_init__(self) -> None:
        Y = np.asarray(self.Y, dtype=float)
        if Y.ndim == 1:
            Y = Y.reshape(-1, 1)
        Z = np.asarray(self.Z, dtype=float)
        dates = np.asarray(self.row_dates, dtype="datetime64[D]")
        if Y.shape[0] != Z.shape[0] or Y.shape[0] != len(dates):
            raise ContractError("Y, Z and row_dates must agree on row count")
        if Z.shape[1] != len(self.col_labels):
            raise ContractError("col_labels must match Z width")
        if len(set(self.col_labels)) != len(self.col_labels):
            raise ContractError("regressor labels collide; rename columns")
        if not (np.all(np.isfinite(Y)) and np.all(np.isfinite(Z))):
            raise NonFiniteError("design contains non-finite values")
        for name, arr in (("Y", Y), ("Z", Z), ("row_dates", dates)):
            arr = np.ascontiguousarray(arr)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n_eff(self) -> int:
        return self.Y.shape[0]

    @property
    def k(self) -> int:
        return self.Y.shape[1]

    @property
    def q(self) -> int:
        return self.Z.shape[1]

    def take(self, rows) -> "DesignMatrix":
        """Row-subset view (used by split-aware fitting)."""
        return DesignMatrix(
            Y=self.Y[rows], Z=self.Z[rows], row_dates=self.row_dates[rows],
            col_labels=self.col_labels, target_names=self.target_names,
            exog_names=self.exog_names, p=self.p, s=self.s, mode=self.mode,
        )


def regressor_labels(target_names, exog_names, p: int, s: int) -> tuple[str, ...]:
    """Lag-major regressor labels: Y blocks by lag, then exogenous by lag."""
    labels = [f"Y{i + 1}L{lag}" for lag in range(1, p + 1)
              for i in range(len(target_names))]
    labels += [f"{name}{lag}" for lag in range(1, s + 1) for name in exog_names]
    return tuple(labels)


def _lag_indices(dates: np.ndarray, lag: int, resolution: str):
    """Positions of each date's lag-`lag` predecessor, with a validity mask."""
    if resolution == "daily":
        wanted = dates - np.timedelta64(lag, "D")
        pool = dates
    else:
        pool = dates.astype("datetime64[M]")
        wanted = pool - lag
    idx = np.searchsorted(pool, wanted)
    idx_c = np.minimum(idx, len(pool) - 1)
    valid = pool[idx_c] == wanted
    return idx_c, valid


def build_design(frame: TimeSeriesFrame, spec: LagSpec) -> DesignMatrix:
    """Build the lagged regression system for one frame.

    Raises InsufficientDataError when fewer than max(p, s) + 1 rows exist or
    (calendar mode) when gaps leave no row with a complete lag history.
    """
    p, s = spec.p, spec.s
    min_rows = max(p, s) + 1
    if frame.n < min_rows:
        raise InsufficientDataError(
            f"need at least {min_rows} rows for p={p}, s={s}; have {frame.n}")

    if spec.mode == "positional":
        r0 = max(p, s)
        n_eff = frame.n - r0
        y_blocks = [frame.targets[r0 - lag: frame.n - lag] for lag in range(1, p + 1)]
        x_blocks = [frame.exog[r0 - lag: frame.n - lag] for lag in range(1, s + 1)]
        usable = slice(r0, frame.n)
    else:
        y_idx, y_ok, x_idx, x_ok = [], [], [], []
        for lag in range(1, p + 1):
            idx, ok = _lag_indices(frame.dates, lag, frame.resolution)
            y_idx.append(idx)
            y_ok.append(ok)
        for lag in range(1, s + 1):
            idx, ok = _lag_indices(frame.dates, lag, frame.resolution)
            x_idx.append(idx)
            x_ok.append(ok)
        usable = np.logical_and.reduce(y_ok + x_ok) if (y_ok or x_ok) \
            else np.ones(frame.n, dtype=bool)
        n_eff = int(usable.sum())
        if n_eff == 0:
            raise InsufficientDataError(
                f"no row has a complete {spec.mode} lag history for "
                f"p={p}, s={s} (gaps too frequent)")
        y_blocks = [frame.targets[idx[usable]] for idx in y_idx]
        x_blocks = [frame.exog[idx[usable]] for idx in x_idx]

    Z = np.hstack(y_blocks + x_blocks) if (y_blocks or x_blocks) \
        else np.empty((n_eff, 0))
    return DesignMatrix(
        Y=frame.targets[usable], Z=Z, row_dates=frame.dates[usable],
        col_labels=regressor_labels(frame.target_names, frame.exog_names, p, s),
        target_names=frame.target_names, exog_names=frame.exog_names,
        p=p, s=s, mode=spec.mode,
    )


@dataclass(frozen=True)
class ScalingInfo:
    """Centering/scaling statistics used to standardize a design.

    Z columns are centered and scaled by the sample standard deviation
    (ddof=1) of the statistic rows; constant columns are flagged and left at
    scale 1. Y is centered only. ``stat_rows`` records the contiguous row
    range the statistics came from, so leakage audits can recompute them.
    """

    z_mean: np.ndarray
    z_sd: np.ndarray
    y_mean: np.ndarray
    constant: np.ndarray
    enabled: bool = True
    stat_rows: tuple[int, int] | None = None

    def __post_init__(self) -> None:
        for name in ("z_mean", "z_sd", "y_mean", "constant"):
            arr = np.ascontiguousarray(np.asarray(getattr(self, name)))
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def identity(cls, q: int, k: int) -> "ScalingInfo":
        """No-op scaling (used when standardization is disabled)."""
        return cls(z_mean=np.zeros(q), z_sd=np.ones(q), y_mean=np.zeros(k),
                   constant=np.zeros(q, dtype=bool), enabled=False)


def standardize(design: DesignMatrix, stat_rows: slice | None = None):
    """Standardize a design; returns (scaled design, ScalingInfo).

    ``stat_rows`` restricts the rows the statistics are computed on (pass the
    training slice to keep validation/test rows out of the scaling). The
    transform itself is applied to every row.
    """
    rows = stat_rows if stat_rows is not None else slice(0, design.n_eff)
    start, stop, step = rows.indices(design.n_eff)
    if step != 1:
        raise ContractError("stat_rows must be a contiguous slice")
    n_stat = stop - start
    if n_stat < 2:
        raise InsufficientDataError(
            f"need >= 2 statistic rows to standardize; have {n_stat}")
    Zs = design.Z[start:stop]
    mu = Zs.mean(axis=0)
    sd = Zs.std(axis=0, ddof=1)
    constant = sd <= 1e-12 * np.maximum(1.0, np.abs(mu))
    sd_used = np.where(constant, 1.0, sd)
    y_mean = design.Y[start:stop].mean(axis=0)

    scaled = DesignMatrix(
        Y=design.Y - y_mean, Z=(design.Z - mu) / sd_used,
        row_dates=design.row_dates, col_labels=design.col_labels,
        target_names=design.target_names, exog_names=design.exog_names,
        p=design.p, s=design.s, mode=design.mode,
    )
    info = ScalingInfo(z_mean=mu, z_sd=sd_used, y_mean=y_mean,
                       constant=constant, enabled=True, stat_rows=(start, stop))
    return scaled, info


def destandardize_coeffs(coeffs: np.ndarray, info: ScalingInfo,
                         intercept=0.0, equation: int = 0):
    """Map coefficients fit on the scaled system back to original units.

    For one equation with scaled coefficients b and scaled intercept a:
    raw_b = b / sd_z and raw_intercept = mean_y + a - sum_j raw_b_j * mean_z_j.
    Accepts a (q,) vector (``equation`` picks the target whose mean applies)
    or a (k, q) matrix with a (k,) intercept vector. The fitted residuals are
    identical under both parameterizations.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.ndim == 1:
        raw = coeffs / info.z_sd
        raw_int = float(info.y_mean[equation] + intercept - raw @ info.z_mean)
        return raw, raw_int
    raw = coeffs / info.z_sd
    intercept = np.broadcast_to(np.asarray(intercept, dtype=float), (coeffs.shape[0],))
    raw_int = info.y_mean + intercept - raw @ info.z_mean
    return raw, raw_int


def write_design_csv(design: DesignMatrix, path) -> None:
    """Dump the design (dates, responses, labeled regressors) for inspection."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["date", *design.target_names, *design.col_labels])
        for i in range(design.n_eff):
            row = [str(design.row_dates[i])]
            row += [repr(float(v)) for v in design.Y[i]]
            row += [repr(float(v)) for v in design.Z[i]]
            writer.writerow(row)


def lookahead_violations(design: DesignMatrix, frame: TimeSeriesFrame) -> int:
    """Recompute every regressor cell from the frame and count violations.

    A violation is a design cell whose source row is not strictly earlier
    than the design row, or whose value does not match the frame exactly.
    Returns 0 for a clean design; used by leakage audits.
    """
    date_pos = {d: i for i, d in enumerate(frame.dates)}
    k, m = frame.k, frame.m
    bad = 0
    for r in range(design.n_eff):
        d = design.row_dates[r]
        t = date_pos[d]
        for lag in range(1, design.p + 1):
            if design.mode == "calendar":
                if frame.resolution == "daily":
                    src_date = d - np.timedelta64(lag, "D")
                else:
                    src_date = (d.astype("datetime64[M]") - lag).astype("datetime64[D]")
                src = date_pos.get(src_date)
            else:
                src = t - lag if t - lag >= 0 else None
            cells = design.Z[r, (lag - 1) * k: lag * k]
            if src is None or frame.dates[src] >= d:
                bad += k
            else:
                bad += int(np.sum(frame.targets[src] != cells))
        for lag in range(1, design.s + 1):
            if design.mode == "calendar":
                if frame.resolution == "daily":
                    src_date = d - np.timedelta64(lag, "D")
                else:
                    src_date = (d.astype("datetime64[M]") - lag).astype("datetime64[D]")
                src = date_pos.get(src_date)
            else:
                src = t - lag if t - lag >= 0 else None
            off = design.p * k + (lag - 1) * m
            cells = design.Z[r, off: off + m]
            if src is None or frame.dates[src] >= d:
                bad += m
            else:
                bad += int(np.sum(frame.exog[src] != cells))
    return bad
