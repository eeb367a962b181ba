"""Shared builders for the test suite."""

import numpy as np

from hydrovarx import Column, TimeSeriesFrame


def daily_dates(n, start="2001-01-01"):
    return np.datetime64(start, "D") + np.arange(n)


def make_frame(targets, exog=None, start="2001-01-01",
               target_names=None, exog_names=None):
    """Build a daily TimeSeriesFrame from plain arrays with default names."""
    targets = np.asarray(targets, dtype=float)
    if targets.ndim == 1:
        targets = targets[:, None]
    n, k = targets.shape
    if exog is None:
        exog = np.zeros((n, 0))
    exog = np.asarray(exog, dtype=float)
    if exog.ndim == 1:
        exog = exog[:, None]
    m = exog.shape[1]
    tnames = list(target_names or (f"Y{i + 1}" for i in range(k)))
    enames = list(exog_names or (f"x{j + 1}" for j in range(m)))
    cols = tuple(Column(nm, role="target") for nm in tnames) \
        + tuple(Column(nm, role="exog") for nm in enames)
    return TimeSeriesFrame(daily_dates(n, start), targets, exog, cols)
