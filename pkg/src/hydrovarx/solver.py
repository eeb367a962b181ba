"""Elastic-net VARX estimation by cyclic coordinate descent.

The objective is the penalized residual sum of squares, exactly as stated
(RSS is not divided by the number of rows):

    min over (nu, B):  sum_t || y_t - nu - B z_t ||^2
                       + lambda * ( alpha * ||B||_1 + (1 - alpha) * ||B||_2^2 )

where z_t stacks the lagged targets and lagged exogenous drivers. The
intercept nu is never penalized. With standardization enabled (the default)
the penalty acts on the standardized coefficients, which keeps lambda
comparable across columns with different physical units.

The problem separates by target equation, so each row of B is solved
independently. Coordinate updates use the covariance form: with G = Zc'Zc and
c = Zc'y precomputed, each update costs O(q) and a full sweep O(q^2). The
coordinate-wise minimizer is the soft-threshold rule

    b_j <- S(z_j' r_(-j), lambda * alpha / 2) / (||z_j||^2 + lambda * (1 - alpha))

with S(u, t) = sign(u) * max(|u| - t, 0). Sweeps visit coordinates in fixed
order, so fitting is deterministic bit-for-bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .design import DesignMatrix, ScalingInfo, destandardize_coeffs, standardize
from .errors import (
    CompatibilityError,
    ContractError,
    DegenerateFitError,
    NumericalError,
)

#: back-transformed coefficients below this magnitude are reported as zero
SNAP_TOL = 1e-12


@dataclass(frozen=True)
class Penalty:
    """Elastic-net penalty: lam scales it, alpha mixes L1 vs squared L2."""

    lam: float
    alpha: float = 0.5

    def __post_init__(self) -> None:
        if not (math.isfinite(self.lam) and self.lam >= 0):
            raise ContractError(f"lambda must be finite and >= 0, got {self.lam}")
        if not (0.0 <= self.alpha <= 1.0):
            raise ContractError(f"alpha must lie in [0, 1], got {self.alpha}")

    def value(self, coeffs: np.ndarray) -> float:
        """Penalty term for a coefficient array (any shape)."""
        b = np.asarray(coeffs, dtype=float).ravel()
        return float(self.lam * (self.alpha * np.abs(b).sum()
                                 + (1.0 - self.alpha) * (b @ b)))


@dataclass(frozen=True)
class FittedModel:
    """A fitted sparse VARX model in original units.

    ``coeffs`` is the (k x q) coefficient matrix over the design's lag-major
    regressor columns; ``phi`` and ``beta`` expose it as per-lag matrices.
    ``scaled_coeffs``/``scaled_intercept`` are the same solution on the
    standardized scale the solver actually minimized on (identical to the raw
    values when standardization was disabled).
    """

    nu: np.ndarray
    coeffs: np.ndarray
    scaled_intercept: np.ndarray
    scaled_coeffs: np.ndarray
    lam: float
    alpha: float
    sigma2: float
    support: tuple[str, ...]
    col_labels: tuple[str, ...]
    target_names: tuple[str, ...]
    exog_names: tuple[str, ...]
    p: int
    s: int
    lag_mode: str
    scaling: ScalingInfo
    n_rows: int
    converged: bool
    n_iter: tuple[int, ...]
    objective_history: tuple[tuple[float, ...], ...]

    def __post_init__(self) -> None:
        for name in ("nu", "coeffs", "scaled_intercept", "scaled_coeffs"):
            arr = np.ascontiguousarray(np.asarray(getattr(self, name), dtype=float))
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def k(self) -> int:
        return self.coeffs.shape[0]

    @property
    def m(self) -> int:
        return len(self.exog_names)

    @property
    def phi(self) -> np.ndarray:
        """Autoregressive matrices, shape (p, k, k): phi[l-1] applies to lag l."""
        k = self.k
        return np.stack([self.coeffs[:, i * k:(i + 1) * k] for i in range(self.p)]) \
            if self.p else np.empty((0, k, k))

    @property
    def beta(self) -> np.ndarray:
        """Exogenous matrices, shape (s, k, m): beta[j-1] applies to lag j."""
        k, m = self.k, self.m
        off = self.p * k
        return np.stack([self.coeffs[:, off + j * m: off + (j + 1) * m]
                         for j in range(self.s)]) \
            if self.s and m else np.empty((self.s, k, m))

    # -- serialization ---------------------------------------------------------

    def to_dict(self) -> dict:
        sc = self.scaling
        return {
            "version": 1,
            "p": self.p,
            "s": self.s,
            "lag_mode": self.lag_mode,
            "alpha": self.alpha,
            "lambda": self.lam,
            "nu": self.nu.tolist(),
            "phi": self.phi.tolist(),
            "beta": self.beta.tolist(),
            "support": list(self.support),
            "sigma2": self.sigma2,
            "scaling": {
                "enabled": bool(sc.enabled),
                "z_mean": sc.z_mean.tolist(),
                "z_sd": sc.z_sd.tolist(),
                "y_mean": sc.y_mean.tolist(),
                "constant": sc.constant.astype(int).tolist(),
                "stat_rows": list(sc.stat_rows) if sc.stat_rows else None,
            },
            "scaled_intercept": self.scaled_intercept.tolist(),
            "scaled_coeffs": self.scaled_coeffs.tolist(),
            "col_labels": list(self.col_labels),
            "target_names": list(self.target_names),
            "exog_names": list(self.exog_names),
            "n_rows": self.n_rows,
            "converged": self.converged,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FittedModel":
        if d.get("version") != 1:
            raise CompatibilityError(f"unsupported model version {d.get('version')!r}")
        p, s = int(d["p"]), int(d["s"])
        k = len(d["nu"])
        phi = np.asarray(d["phi"], dtype=float).reshape(p, k, k)
        m = len(d["exog_names"])
        beta = np.asarray(d["beta"], dtype=float).reshape(s, k, m)
        blocks = [phi[i] for i in range(p)] + [beta[j] for j in range(s)]
        coeffs = np.hstack(blocks) if blocks else np.empty((k, 0))
        sc = d["scaling"]
        scaling = ScalingInfo(
            z_mean=np.asarray(sc["z_mean"], dtype=float),
            z_sd=np.asarray(sc["z_sd"], dtype=float),
            y_mean=np.asarray(sc["y_mean"], dtype=float),
            constant=np.asarray(sc["constant"], dtype=bool),
            enabled=bool(sc["enabled"]),
            stat_rows=tuple(sc["stat_rows"]) if sc.get("stat_rows") else None,
        )
        return cls(
            nu=np.asarray(d["nu"], dtype=float),
            coeffs=coeffs,
            scaled_intercept=np.asarray(d["scaled_intercept"], dtype=float),
            scaled_coeffs=np.asarray(d["scaled_coeffs"], dtype=float),
            lam=float(d["lambda"]), alpha=float(d["alpha"]),
            sigma2=float(d["sigma2"]), support=tuple(d["support"]),
            col_labels=tuple(d["col_labels"]),
            target_names=tuple(d["target_names"]),
            exog_names=tuple(d["exog_names"]),
            p=p, s=s, lag_mode=str(d.get("lag_mode", "calendar")),
            scaling=scaling, n_rows=int(d["n_rows"]),
            converged=bool(d["converged"]), n_iter=(), objective_history=(),
        )


def _soft(u: float, thr: float) -> float:
    if u > thr:
        return u - thr
    if u < -thr:
        return u + thr
    return 0.0


def _cd_solve(G, c, yty, diag, penalty, b, tol, max_iter):
    """Coordinate descent for one equation on centered data.

    Returns (b, history, sweeps, converged). ``history`` holds the objective
    after every sweep and is non-increasing by construction of the updates.
    """
    q = len(c)
    thr = penalty.lam * penalty.alpha / 2.0
    den = diag + penalty.lam * (1.0 - penalty.alpha)
    rho = c - G @ b
    history: list[float] = []
    sweeps = 0
    converged = False

    def sweep(idx) -> float:
        nonlocal rho
        delta = 0.0
        for j in idx:
            old = b[j]
            u = rho[j] + diag[j] * old
            new = _soft(u, thr) / den[j] if den[j] > 0 else 0.0
            if new != old:
                rho -= G[:, j] * (new - old)
                b[j] = new
                step = abs(new - old)
                if step > delta:
                    delta = step
        return delta

    def record() -> None:
        rss = yty - b @ c - b @ rho
        history.append(rss + penalty.value(b))

    all_idx = range(q)
    while sweeps < max_iter:
        delta = sweep(all_idx)
        sweeps += 1
        record()
        if delta < tol:
            converged = True
            break
        # iterate the active set until stable, then re-check all coordinates
        active = np.flatnonzero(b)
        while sweeps < max_iter and len(active) < q:
            delta = sweep(active)
            sweeps += 1
            record()
            if delta < tol:
                break
    return b, history, sweeps, converged


def fit(design: DesignMatrix, penalty: Penalty, *, standardize_design: bool = True,
        tol: float = 1e-7, max_iter: int = 10000, warm_start=None) -> FittedModel:
    """Fit the penalized VARX system on the rows of ``design``.

    ``design`` is in original units. With ``standardize_design`` (default) the
    regressors are centered/scaled by their sample statistics over these rows
    before solving, and the solution is mapped back, so reported coefficients
    are always in original units. The intercept is solved exactly (never
    penalized). ``warm_start`` accepts the ``scaled_coeffs`` of a previous fit
    on the same design to speed up paths over a lambda grid.

    Convergence: a sweep whose largest coefficient change is below ``tol``.
    """
    if design.n_eff < 2:
        raise DegenerateFitError(f"cannot fit on {design.n_eff} rows")
    if standardize_design:
        solved, info = standardize(design)
    else:
        solved, info = design, ScalingInfo.identity(design.q, design.k)

    # center over the fitted rows; makes the unpenalized intercept exact
    z_bar = solved.Z.mean(axis=0)
    y_bar = solved.Y.mean(axis=0)
    Zc = solved.Z - z_bar
    G = Zc.T @ Zc
    diag = np.ascontiguousarray(np.diag(G))

    k, q = design.k, design.q
    scaled_b = np.zeros((k, q))
    scaled_a = np.zeros(k)
    n_iter = []
    histories = []
    converged_all = True
    for i in range(k):
        yc = solved.Y[:, i] - y_bar[i]
        b0 = np.array(warm_start[i], dtype=float) if warm_start is not None \
            else np.zeros(q)
        b, hist, sweeps, ok = _cd_solve(G, Zc.T @ yc, float(yc @ yc), diag,
                                        penalty, b0, tol, max_iter)
        scaled_b[i] = b
        scaled_a[i] = y_bar[i] - z_bar @ b
        n_iter.append(sweeps)
        histories.append(tuple(hist))
        converged_all &= ok

    raw_b, raw_nu = destandardize_coeffs(scaled_b, info, intercept=scaled_a)
    raw_b = np.where(np.abs(raw_b) < SNAP_TOL, 0.0, raw_b)
    nonzero = np.any(raw_b != 0.0, axis=0)
    support = tuple(lbl for lbl, nz in zip(design.col_labels, nonzero) if nz)

    resid = design.Y - (raw_nu + design.Z @ raw_b.T)
    rss = float(np.sum(resid * resid))
    dof = max(1, design.n_eff - len(support) - k)
    sigma2 = rss / dof

    return FittedModel(
        nu=raw_nu, coeffs=raw_b, scaled_intercept=scaled_a, scaled_coeffs=scaled_b,
        lam=penalty.lam, alpha=penalty.alpha, sigma2=sigma2, support=support,
        col_labels=design.col_labels, target_names=design.target_names,
        exog_names=design.exog_names, p=design.p, s=design.s,
        lag_mode=design.mode, scaling=info, n_rows=design.n_eff,
        converged=converged_all, n_iter=tuple(n_iter),
        objective_history=tuple(histories),
    )


def objective(design: DesignMatrix, model: FittedModel, penalty: Penalty) -> float:
    """Penalized RSS of ``model``'s original-unit coefficients on ``design``."""
    pred = predict_rows(model, design)
    resid = design.Y - pred
    return float(np.sum(resid * resid)) + penalty.value(model.coeffs)


def predict_rows(model: FittedModel, design: DesignMatrix) -> np.ndarray:
    """One-step predictions for every design row (original units)."""
    if design.col_labels != model.col_labels:
        raise CompatibilityError(
            "design regressors do not match the model: "
            f"{design.col_labels[:3]}... vs {model.col_labels[:3]}...")
    return model.nu + design.Z @ model.coeffs.T


def predict_one_step(model: FittedModel, lags_y, lags_x=None) -> np.ndarray:
    """One-step-ahead forecast from explicit lag values.

    ``lags_y`` has shape (p, k) with lag 1 first; ``lags_x`` has shape (s, m).
    Returns the (k,) prediction. No recursion: every lag must be observed.
    """
    lags_y = np.asarray(lags_y, dtype=float).reshape(model.p, model.k)
    if model.s and model.m:
        if lags_x is None:
            raise ContractError(f"model needs {model.s} exogenous lag rows")
        lags_x = np.asarray(lags_x, dtype=float).reshape(model.s, model.m)
    z = np.concatenate([lags_y.ravel()] +
                       ([lags_x.ravel()] if model.s and model.m else []))
    if not np.all(np.isfinite(z)):
        raise NumericalError("lag values must be finite")
    return model.nu + model.coeffs @ z


def lambda_max(design: DesignMatrix, alpha: float, *,
               standardize_design: bool = True) -> float:
    """Smallest lambda at which every coefficient is exactly zero.

    From the coordinate-wise stationarity condition at b = 0: coordinate j
    stays at zero iff |z_j'(y - ybar)| <= lambda * alpha / 2, hence
    lambda_max = 2 * max_ij |z_j'(y_i - ybar_i)| / alpha.
    """
    if alpha <= 0:
        raise ContractError("lambda_max is defined for alpha > 0")
    solved = standardize(design)[0] if standardize_design else design
    Zc = solved.Z - solved.Z.mean(axis=0)
    Yc = solved.Y - solved.Y.mean(axis=0)
    return float(2.0 * np.abs(Zc.T @ Yc).max() / alpha)
