"""Vector autoregression for component scores, fit in both time directions.

The forward model drives point forecasts; the backward (time-reversed)
model lets bootstrap pseudo-series be built backward from the observed
end of the sample so that replicates stay anchored to the most recent
days.  Backward innovations are obtained from resampled forward
innovations through the two-sided lag-operator transfer implemented in
:func:`backward_innovation_transfer`.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import DataError, NumericalError
from .gridcurves import _freeze

#: companion spectral radius at or above which the fit is unusable for bootstrapping
STATIONARITY_LIMIT = 0.999

#: moving-average expansion is truncated once a coefficient norm drops below this
PSI_TOLERANCE = 1e-10

#: hard cap on the number of moving-average terms
PSI_MAX_TERMS = 200

#: ridge added to the innovation covariance before taking its log-determinant
LOGDET_RIDGE = 1e-12

DEFAULT_MAX_ORDER = 10


@dataclass(frozen=True)
class VarModel:
    """Least-squares VAR(p) without intercept, plus its time-reversed twin.

    ``coeffs`` and ``backward_coeffs`` have shape (p, K, K); lag ``xi``
    multiplies the score vector ``xi`` steps away.  ``residuals`` holds
    the n - p forward residuals, ``sigma`` their covariance with divisor
    n - p.  ``psi`` is the truncated moving-average expansion of the
    forward model (None when the fit is not stationary enough to expand).
    """

    order: int
    coeffs: np.ndarray
    residuals: np.ndarray
    backward_coeffs: np.ndarray
    backward_residuals: np.ndarray
    sigma: np.ndarray
    nobs: int
    spectral_radius: float
    psi: Optional[np.ndarray]

    @property
    def dim(self) -> int:
        return self.coeffs.shape[1]

    @property
    def is_stationary(self) -> bool:
        return self.spectral_radius < STATIONARITY_LIMIT

    @property
    def psi_truncation(self) -> Optional[int]:
        return None if self.psi is None else self.psi.shape[0] - 1

    @property
    def centered_residuals(self) -> np.ndarray:
        """Forward residuals minus their column means (the resampling pool)."""
        return self.residuals - self.residuals.mean(axis=0)


def companion_spectral_radius(coeffs: np.ndarray) -> float:
    """Largest eigenvalue modulus of the companion matrix of ``coeffs``."""
    coeffs = np.asarray(coeffs, dtype=float)
    p, K, _ = coeffs.shape
    comp = np.zeros((p * K, p * K))
    comp[:K] = coeffs.transpose(1, 0, 2).reshape(K, p * K)
    if p > 1:
        comp[K:, :-K] = np.eye((p - 1) * K)
    return float(np.abs(np.linalg.eigvals(comp)).max())


def _solve_ls(design: np.ndarray, target: np.ndarray) -> np.ndarray:
    """Least squares via SVD with an explicit singularity check."""
    u, s, vt = np.linalg.svd(design, full_matrices=False)
    if s[0] <= 0.0 or s[-1] <= 1e-12 * s[0]:
        cond = math.inf if s[-1] == 0.0 else s[0] / s[-1]
        raise NumericalError(f"singular regression design (condition number {cond:.3e})")
    return vt.T @ ((u.T @ target) / s[:, None])


def _ma_expansion(coeffs: np.ndarray) -> np.ndarray:
    """Moving-average coefficients of the VAR, truncated once they vanish."""
    p, K, _ = coeffs.shape
    psi = [np.eye(K)]
    for j in range(1, PSI_MAX_TERMS + 1):
        acc = np.zeros((K, K))
        for xi in range(1, min(j, p) + 1):
            acc += coeffs[xi - 1] @ psi[j - xi]
        psi.append(acc)
        if np.linalg.norm(acc, "fro") < PSI_TOLERANCE:
            return np.array(psi)
    return np.array([])  # sentinel: did not converge


def fit_var(scores: np.ndarray, order: int, compute_psi: bool = True) -> VarModel:
    """Fit a VAR(``order``) to the score matrix by multivariate least squares.

    ``scores`` has one row per day.  Requires ``n - order > K * order``
    so the no-intercept design has more rows than columns.
    ``compute_psi=False`` skips the moving-average expansion, which only
    matters for bootstrap resampling.
    """
    scores = np.asarray(scores, dtype=float)
    if scores.ndim != 2:
        raise DataError(f"scores must be 2-d, got shape {scores.shape}")
    n, K = scores.shape
    p = int(order)
    if p < 1:
        raise DataError(f"order must be >= 1, got {order}")
    if n - p <= K * p:
        raise DataError(
            f"not enough observations to identify VAR({p}) in {K} dims: n={n}"
        )

    # forward: y_t on (y_{t-1}, ..., y_{t-p})
    rows = n - p
    fwd_design = np.hstack([scores[p - xi : n - xi] for xi in range(1, p + 1)])
    fwd_target = scores[p:]
    fwd_coef = _solve_ls(fwd_design, fwd_target)  # (K*p, K)
    fwd_resid = fwd_target - fwd_design @ fwd_coef
    sigma = (fwd_resid.T @ fwd_resid) / rows

    # backward: y_t on (y_{t+1}, ..., y_{t+p})
    bwd_design = np.hstack([scores[xi : n - p + xi] for xi in range(1, p + 1)])
    bwd_target = scores[: n - p]
    bwd_coef = _solve_ls(bwd_design, bwd_target)
    bwd_resid = bwd_target - bwd_design @ bwd_coef

    coeffs = fwd_coef.reshape(p, K, K).transpose(0, 2, 1)
    backward = bwd_coef.reshape(p, K, K).transpose(0, 2, 1)
    radius = companion_spectral_radius(coeffs)
    psi = None
    if not compute_psi:
        pass
    elif radius < STATIONARITY_LIMIT:
        expansion = _ma_expansion(coeffs)
        if expansion.size:
            psi = _freeze(expansion)
        else:
            warnings.warn(
                f"moving-average expansion did not converge within {PSI_MAX_TERMS} terms"
            )
    else:
        warnings.warn(
            f"fitted VAR({p}) has companion spectral radius {radius:.4f}; "
            "unusable for bootstrap resampling"
        )
    return VarModel(
        order=p,
        coeffs=_freeze(coeffs),
        residuals=_freeze(fwd_resid),
        backward_coeffs=_freeze(backward),
        backward_residuals=_freeze(bwd_resid),
        sigma=_freeze(sigma),
        nobs=n,
        spectral_radius=radius,
        psi=psi,
    )


def aicc(model: VarModel, n: Optional[int] = None) -> float:
    """Small-sample corrected information criterion of a fitted VAR."""
    if n is None:
        n = model.nobs
    K = model.dim
    p = model.order
    denom = n - K * (p + 1) - 1
    if denom <= 0:
        raise NumericalError(f"criterion undefined: n={n}, K={K}, p={p}")
    sign, logdet = np.linalg.slogdet(model.sigma + LOGDET_RIDGE * np.eye(K))
    if sign <= 0:
        raise NumericalError("innovation covariance is not positive definite")
    return float(n * logdet + n * (n * K + p * K * K) / denom)


def select_order(scores: np.ndarray, max_order: int = DEFAULT_MAX_ORDER) -> int:
    """Lag order minimizing :func:`aicc` over 1..max_order (ties to the smallest)."""
    scores = np.asarray(scores, dtype=float)
    n, K = scores.shape
    best_order = None
    best_value = math.inf
    for p in range(1, max_order + 1):
        if n - p <= K * p or n - K * (p + 1) - 1 <= 0:
            continue
        try:
            value = aicc(fit_var(scores, p, compute_psi=False), n)
        except NumericalError:
            continue
        if value < best_value - 1e-12:
            best_value = value
            best_order = p
    if best_order is None:
        raise NumericalError(
            f"no identifiable lag order in 1..{max_order} for n={n}, K={K}"
        )
    return best_order


def forecast_scores(model: VarModel, history: np.ndarray, horizon: int = 1) -> np.ndarray:
    """Iterated conditional-mean forecasts, shape (horizon, K)."""
    history = np.asarray(history, dtype=float)
    if history.ndim != 2 or history.shape[1] != model.dim:
        raise DataError(
            f"history must be (>=p, {model.dim}), got shape {history.shape}"
        )
    p = model.order
    if history.shape[0] < p:
        raise DataError(f"history has {history.shape[0]} rows, need at least p={p}")
    if horizon < 1:
        raise DataError(f"horizon must be >= 1, got {horizon}")
    lags = list(history[-p:][::-1])  # lags[0] = most recent
    out = np.empty((horizon, model.dim))
    for h in range(horizon):
        step = np.zeros(model.dim)
        for xi in range(1, p + 1):
            step += model.coeffs[xi - 1] @ lags[xi - 1]
        out[h] = step
        lags = [step] + lags[: p - 1]
    return out


def backward_innovation_transfer(
    model: VarModel,
    innovations: np.ndarray,
    rng: np.random.Generator,
    pool: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Convert resampled forward innovations into backward-model innovations.

    Filters the innovation sequence through the forward model's
    moving-average expansion and then applies the backward lag polynomial
    in the reversed time direction.  Boundary terms that would need
    innovations outside the given sequence are drawn from ``pool``
    (default: the model's centered forward residuals); padding with zeros
    would shrink the variance of the first and last few outputs.
    """
    if not model.is_stationary:
        raise NumericalError(
            f"spectral radius {model.spectral_radius:.4f} >= {STATIONARITY_LIMIT}; "
            "backward transfer undefined"
        )
    if model.psi is None:
        raise NumericalError("moving-average expansion unavailable")
    innovations = np.asarray(innovations, dtype=float)
    if innovations.ndim != 2 or innovations.shape[1] != model.dim:
        raise DataError(
            f"innovations must be (T, {model.dim}), got shape {innovations.shape}"
        )
    if pool is None:
        pool = model.centered_residuals
    pool = np.asarray(pool, dtype=float)
    M = model.psi.shape[0] - 1
    p = model.order
    pre = pool[rng.integers(0, pool.shape[0], size=M)] if M else np.zeros((0, model.dim))
    post = pool[rng.integers(0, pool.shape[0], size=p)]
    extended = np.vstack([pre, innovations, post])
    return _transfer_padded(model, extended[None])[0]


def _transfer_padded(model: VarModel, extended: np.ndarray) -> np.ndarray:
    """Vectorized transfer on pre-padded innovations, shape (B, M+T+p, K)."""
    psi = model.psi
    M = psi.shape[0] - 1
    p = model.order
    B, total, K = extended.shape
    T = total - M - p
    zeta = np.zeros((B, T + p, K))
    for j in range(M + 1):
        zeta += extended[:, M - j : M - j + T + p] @ psi[j].T
    eta = zeta[:, :T].copy()
    for xi in range(1, p + 1):
        eta -= zeta[:, xi : xi + T] @ model.backward_coeffs[xi - 1].T
    return eta
