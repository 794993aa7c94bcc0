"""Sieve bootstrap prediction for the next day's curve.

Each replicate resamples centered score innovations, converts them to
backward-model innovations, and rebuilds an artificial score history
backward from the observed final days, so every pseudo-series shares the
sample's most recent state.  Pseudo-curves add whole resampled residual
curves on top of the reconstructed score part.  A one-step functional
autoregression refit to each pseudo-series yields a forecast whose error
against that replicate's simulated future curve is the bootstrap proxy
for the real forecast error; pointwise quantiles of these errors give
prediction intervals and studentized sup-norm quantiles give a uniform
band.

Replicate ``b`` always draws from its own counter-split random stream,
so results do not depend on evaluation order or worker count.
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ConfigError, DataError, NumericalError
from .fpca import FpcaModel, select_num_components
from .gridcurves import FunctionalTimeSeries, _freeze
from .varmodel import VarModel, forecast_scores, _transfer_padded

SIGMA_FLOOR = 1e-12
FORECAST_SCHEMA_VERSION = 1
CENTER_CHOICES = ("far1", "ts")


@dataclass(frozen=True)
class BootstrapConfig:
    """Knobs of the bootstrap: replicate count, master seed, coverage levels.

    ``center`` picks the curve the pointwise intervals are anchored to:
    the functional-autoregression forecast refit per replicate ("far1",
    matching the error proxies) or the component-score forecast ("ts").
    """

    num_replicates: int = 400
    seed: int = 0
    alpha_levels: tuple = (0.2, 0.05)
    center: str = "far1"

    def __post_init__(self):
        if self.num_replicates < 1:
            raise ConfigError(f"num_replicates must be >= 1, got {self.num_replicates}")
        alphas = tuple(float(a) for a in self.alpha_levels)
        if not alphas or any(not 0.0 < a < 1.0 for a in alphas):
            raise ConfigError(f"alpha levels must lie in (0, 1), got {self.alpha_levels}")
        object.__setattr__(self, "alpha_levels", alphas)
        if self.center not in CENTER_CHOICES:
            raise ConfigError(f"center must be one of {CENTER_CHOICES}, got {self.center!r}")


def replicate_rng(seed: int, index: int) -> np.random.Generator:
    """Independent stream for one replicate, split off the master seed."""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(index,)))


def derive_seed(master: int, *path: int) -> int:
    """Stable 64-bit child seed for a nested task (e.g. one backtest day)."""
    ss = np.random.SeedSequence(entropy=master, spawn_key=tuple(int(p) for p in path))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def empirical_quantile(values: np.ndarray, q, axis: int = 0):
    """Empirical quantile pinned to linear interpolation of order statistics.

    With n sorted values v and h = (n - 1) q, returns
    ``v[floor(h)] + (h - floor(h)) * (v[floor(h) + 1] - v[floor(h)])``,
    evaluated exactly in that form so results are reproducible against a
    sort-based reference.
    """
    q = float(q)
    if not 0.0 <= q <= 1.0:
        raise ConfigError(f"quantile level must lie in [0, 1], got {q}")
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise DataError("cannot take a quantile of an empty array")
    if axis != 0:
        v = np.moveaxis(v, axis, 0)
    v = np.sort(v, axis=0)
    n = v.shape[0]
    h = (n - 1) * q
    f = math.floor(h)
    if f >= n - 1:
        return v[n - 1].copy() if v.ndim > 1 else float(v[n - 1])
    out = v[f] + (h - f) * (v[f + 1] - v[f])
    return out if v.ndim > 1 else float(out)


@dataclass(frozen=True)
class Far1Model:
    """One-step functional autoregression: next = mean + transfer @ (last - mean)."""

    mean: np.ndarray
    transfer: np.ndarray
    num_components: int
    degenerate: bool = False


def _regularized_transfer(cov0: np.ndarray, cov1: np.ndarray, w: float, n: int):
    """Lagged covariance composed with the rank-truncated covariance inverse."""
    evals, evecs = np.linalg.eigh(w * cov0)
    evals = evals[::-1].copy()
    evecs = evecs[:, ::-1]
    evals[evals < 0.0] = 0.0
    if evals[0] <= 0.0:
        return np.zeros_like(cov0), 0, True
    J = select_num_components(evals, n)
    keep = evals[:J] > 1e-12 * evals[0]
    vecs = evecs[:, :J][:, keep]
    inv = (vecs / evals[:J][keep]) @ vecs.T
    return (w * cov1) @ inv, J, False


def far1_fit(fts: FunctionalTimeSeries) -> Far1Model:
    """Fit the one-step functional autoregression used as the resampled predictor.

    The lag-one cross-covariance is composed with the inverse of the
    covariance restricted to its leading eigenspace; the rank is chosen
    by the same eigenvalue-ratio rule as the main decomposition.
    """
    X = fts.values
    n, d = X.shape
    if n < 2:
        raise DataError(f"need at least 2 days, got {n}")
    mean = X.mean(axis=0)
    c = X - mean
    cov0 = (c.T @ c) / n
    cov1 = (c[1:].T @ c[:-1]) / n
    transfer, J, degenerate = _regularized_transfer(cov0, cov1, fts.grid.quad_weight, n)
    if degenerate:
        warnings.warn("curves carry no variance; autoregression transfer set to zero")
    return Far1Model(mean=_freeze(mean), transfer=_freeze(transfer),
                     num_components=J, degenerate=degenerate)


def far1_forecast(model: Far1Model, last_curve: np.ndarray) -> np.ndarray:
    last_curve = np.asarray(last_curve, dtype=float)
    if last_curve.shape != model.mean.shape:
        raise DataError(
            f"curve has shape {last_curve.shape}, expected {model.mean.shape}"
        )
    return model.mean + model.transfer @ (last_curve - model.mean)


def ts_point_forecast(fpca: FpcaModel, var: VarModel) -> np.ndarray:
    """Next-day curve implied by the one-step score forecast."""
    _check_pair(fpca, var)
    K = fpca.num_components
    step = forecast_scores(var, fpca.scores[:, :K], horizon=1)[0]
    return fpca.mean + fpca.eigenfunctions[:, :K] @ step


def _check_pair(fpca: FpcaModel, var: VarModel) -> None:
    if var.dim != fpca.num_components:
        raise DataError(
            f"score model dimension {var.dim} != retained components {fpca.num_components}"
        )
    if fpca.scores.shape[0] == 0:
        raise DataError("fitted scores unavailable (model loaded without training data?)")
    if var.nobs != fpca.scores.shape[0]:
        raise DataError(
            f"score model fit on {var.nobs} days but decomposition has {fpca.scores.shape[0]}"
        )


@dataclass(frozen=True)
class SieveReplicates:
    """Compact payload of every bootstrap replicate.

    Pseudo-curves are reconstructed on demand as
    ``mean + scores @ eigenfunctions.T + resid_pool[resid_idx]``; storing
    scores and pool indices instead of full curve stacks keeps the
    payload small and lets intraday-updating code project arbitrary
    column blocks cheaply.
    """

    series_scores: np.ndarray      # (B, n, K) pseudo score paths
    series_resid_idx: np.ndarray   # (B, n) rows into resid_pool
    future_scores: np.ndarray      # (B, K) next-day score draws
    future_resid_idx: np.ndarray   # (B,) rows into resid_pool
    ts_scores: np.ndarray          # (K,) the conditional-mean score forecast
    mean: np.ndarray               # (d,)
    eigenfunctions: np.ndarray     # (d, K)
    resid_pool: np.ndarray         # (n, d) centered residual curves
    eps_pool: np.ndarray           # (n - p, K) centered score innovations
    seed: int

    @property
    def num_replicates(self) -> int:
        return self.series_scores.shape[0]

    @property
    def series_length(self) -> int:
        return self.series_scores.shape[1]


def _pools(fpca: FpcaModel, var: VarModel):
    resid_pool = fpca.residuals - fpca.residuals.mean(axis=0)
    return var.centered_residuals, resid_pool


def _replicate_draws(rng, T, M, p, n, n_eps, n_resid):
    """Index draws for one replicate, in the order the contract fixes."""
    core = rng.integers(0, n_eps, size=T)
    pre = rng.integers(0, n_eps, size=M)
    post = rng.integers(0, n_eps, size=p)
    fut_eps = int(rng.integers(0, n_eps))
    series_resid = rng.integers(0, n_resid, size=n)
    fut_resid = int(rng.integers(0, n_resid))
    return np.concatenate([pre, core, post]), fut_eps, series_resid, fut_resid


def _assemble_replicates(fpca, var, seed, indices) -> SieveReplicates:
    """Build the pseudo score paths for the given replicate indices."""
    _check_pair(fpca, var)
    if not var.is_stationary:
        raise NumericalError(
            f"companion spectral radius {var.spectral_radius:.4f} too close to 1; "
            "bootstrap resampling rejected"
        )
    if var.psi is None:
        raise NumericalError("moving-average expansion unavailable")
    eps_pool, resid_pool = _pools(fpca, var)
    K = fpca.num_components
    n = fpca.scores.shape[0]
    p = var.order
    T = n - p
    M = var.psi.shape[0] - 1
    B = len(indices)

    ext_idx = np.empty((B, M + T + p), dtype=np.int64)
    fut_eps_idx = np.empty(B, dtype=np.int64)
    series_resid_idx = np.empty((B, n), dtype=np.int64)
    fut_resid_idx = np.empty(B, dtype=np.int64)
    for row, b in enumerate(indices):
        rng = replicate_rng(seed, b)
        ext_idx[row], fut_eps_idx[row], series_resid_idx[row], fut_resid_idx[row] = (
            _replicate_draws(rng, T, M, p, n, eps_pool.shape[0], resid_pool.shape[0])
        )

    eta = _transfer_padded(var, eps_pool[ext_idx])  # (B, T, K)
    series_scores = np.empty((B, n, K))
    series_scores[:, T:] = fpca.scores[T:, :K]
    back = var.backward_coeffs
    for t in range(T - 1, -1, -1):
        acc = eta[:, t].copy()
        for xi in range(1, p + 1):
            acc += series_scores[:, t + xi] @ back[xi - 1].T
        series_scores[:, t] = acc

    ts1 = forecast_scores(var, fpca.scores[:, :K], horizon=1)[0]
    future_scores = ts1 + eps_pool[fut_eps_idx]
    return SieveReplicates(
        series_scores=_freeze(series_scores),
        series_resid_idx=series_resid_idx,
        future_scores=_freeze(future_scores),
        future_resid_idx=fut_resid_idx,
        ts_scores=_freeze(ts1),
        mean=fpca.mean,
        eigenfunctions=_freeze(fpca.eigenfunctions[:, :K]),
        resid_pool=_freeze(resid_pool),
        eps_pool=_freeze(eps_pool),
        seed=seed,
    )


def draw_replicates(fpca: FpcaModel, var: VarModel, cfg: BootstrapConfig) -> SieveReplicates:
    """Draw every replicate's pseudo score path and residual assignments."""
    if cfg.num_replicates < 50:
        warnings.warn(
            f"only {cfg.num_replicates} replicates; quantiles will be unstable"
        )
    return _assemble_replicates(fpca, var, cfg.seed, range(cfg.num_replicates))


def pseudo_curves(reps: SieveReplicates, index: int) -> np.ndarray:
    """Full pseudo-series of one replicate, shape (n, d)."""
    return (
        reps.mean
        + reps.series_scores[index] @ reps.eigenfunctions.T
        + reps.resid_pool[reps.series_resid_idx[index]]
    )


def future_curve(reps: SieveReplicates, index: int) -> np.ndarray:
    """Simulated next-day curve of one replicate."""
    return (
        reps.mean
        + reps.future_scores[index] @ reps.eigenfunctions.T
        + reps.resid_pool[reps.future_resid_idx[index]]
    )


def future_curves(reps: SieveReplicates) -> np.ndarray:
    """All simulated next-day curves, shape (B, d)."""
    return (
        reps.mean
        + reps.future_scores @ reps.eigenfunctions.T
        + reps.resid_pool[reps.future_resid_idx]
    )


def project_replicate_block(
    reps: SieveReplicates,
    cols: np.ndarray,
    basis: np.ndarray,
    weight: float,
    center: np.ndarray,
) -> np.ndarray:
    """Scores of every pseudo-curve block on an external basis, shape (B, n, R).

    Equivalent to reconstructing ``curves[:, :, cols]``, subtracting
    ``center`` and taking weighted inner products with ``basis`` columns,
    but without materializing the curves.
    """
    bw = weight * basis  # (len(cols), R)
    base = (reps.mean[cols] - center) @ bw
    score_map = reps.eigenfunctions[cols].T @ bw  # (K, R)
    pool_proj = reps.resid_pool[:, cols] @ bw  # (n_pool, R)
    return base + reps.series_scores @ score_map + pool_proj[reps.series_resid_idx]


def generate_pseudo_series(
    fpca: FpcaModel,
    var: VarModel,
    cfg: BootstrapConfig,
    replicate_index: int,
    grid=None,
):
    """One replicate's pseudo-series and simulated future curve.

    Bit-identical to the corresponding rows of :func:`draw_replicates`
    because the draws come from the same per-replicate stream in the same
    order.
    """
    if replicate_index < 0:
        raise ConfigError(f"replicate_index must be >= 0, got {replicate_index}")
    reps = _assemble_replicates(fpca, var, cfg.seed, [replicate_index])
    if grid is None:
        from .gridcurves import IntradayGrid

        grid = IntradayGrid.regular(fpca.grid_size + 1)
    return FunctionalTimeSeries(pseudo_curves(reps, 0), grid), future_curve(reps, 0)


@dataclass(frozen=True)
class SieveForecast:
    """Point forecast, pointwise intervals, and uniform bands for one day.

    ``pointwise`` and ``band`` map each miscoverage level alpha to a
    (lower, upper) pair of curves; ``band_radius`` holds the studentized
    sup-norm quantile behind each band.
    """

    point: np.ndarray
    center: str
    error_sd: np.ndarray
    pointwise: dict
    band_radius: dict
    band: dict
    replicates_future: np.ndarray
    replicates_pred: np.ndarray
    replicates: SieveReplicates
    alpha_levels: tuple
    num_replicates: int
    seed: int
    degenerate: bool


def _far1_predictions_batch(curves: np.ndarray, w: float) -> np.ndarray:
    """Refit the one-step autoregression on each pseudo-series and forecast."""
    B, n, d = curves.shape
    means = curves.mean(axis=1)
    c = curves - means[:, None, :]
    cov0 = np.matmul(c.transpose(0, 2, 1), c) / n
    cov1 = np.matmul(c[:, 1:].transpose(0, 2, 1), c[:, :-1]) / n
    preds = np.empty((B, d))
    for b in range(B):
        transfer, _, _ = _regularized_transfer(cov0[b], cov1[b], w, n)
        preds[b] = means[b] + transfer @ c[b, -1]
    return preds


def sieve_prediction(
    fts: FunctionalTimeSeries,
    fpca: FpcaModel,
    var: VarModel,
    cfg: BootstrapConfig,
    n_workers: int = 1,
) -> SieveForecast:
    """Bootstrap the next day's forecast distribution.

    ``n_workers`` splits replicates across threads; each replicate's
    stream is fixed by its index, so the result is identical for any
    worker count.
    """
    if n_workers < 1:
        raise ConfigError(f"n_workers must be >= 1, got {n_workers}")
    if fts.n != fpca.scores.shape[0] or fts.values.shape[1] != fpca.grid_size:
        raise DataError("curve series does not match the fitted decomposition")
    w = fts.grid.quad_weight
    reps = draw_replicates(fpca, var, cfg)
    B = reps.num_replicates

    futures = future_curves(reps)

    def predict_chunk(lo: int, hi: int) -> np.ndarray:
        curves = (
            reps.mean
            + reps.series_scores[lo:hi] @ reps.eigenfunctions.T
            + reps.resid_pool[reps.series_resid_idx[lo:hi]]
        )
        return _far1_predictions_batch(curves, w)

    if n_workers == 1:
        preds = predict_chunk(0, B)
    else:
        step = -(-B // n_workers)
        bounds = [(lo, min(lo + step, B)) for lo in range(0, B, step)]
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            parts = list(pool.map(lambda ab: predict_chunk(*ab), bounds))
        preds = np.vstack(parts)

    errors = futures - preds
    sigma = errors.std(axis=0)
    degenerate = bool((sigma <= 0.0).any())
    if degenerate:
        warnings.warn("bootstrap error spread vanished at some grid points")
    sigma_eff = np.where(sigma <= 0.0, SIGMA_FLOOR, sigma)

    if cfg.center == "ts":
        center_curve = ts_point_forecast(fpca, var)
    else:
        center_curve = far1_forecast(far1_fit(fts), fts.values[-1])

    shifted = center_curve + errors
    sup_stats = (np.abs(errors) / sigma_eff).max(axis=1)
    pointwise = {}
    band = {}
    band_radius = {}
    for alpha in cfg.alpha_levels:
        lo = empirical_quantile(shifted, alpha / 2.0, axis=0)
        hi = empirical_quantile(shifted, 1.0 - alpha / 2.0, axis=0)
        pointwise[alpha] = (_freeze(lo), _freeze(hi))
        q = float(empirical_quantile(sup_stats, 1.0 - alpha))
        band_radius[alpha] = q
        band[alpha] = (_freeze(center_curve - q * sigma), _freeze(center_curve + q * sigma))
    return SieveForecast(
        point=_freeze(center_curve),
        center=cfg.center,
        error_sd=_freeze(sigma),
        pointwise=pointwise,
        band_radius=band_radius,
        band=band,
        replicates_future=_freeze(futures),
        replicates_pred=_freeze(preds),
        replicates=reps,
        alpha_levels=cfg.alpha_levels,
        num_replicates=B,
        seed=cfg.seed,
        degenerate=degenerate,
    )


# ---------------------------------------------------------------------------
# exports
# ---------------------------------------------------------------------------


def _coverage_pct(alpha: float) -> int:
    return round(100.0 * (1.0 - alpha))


def forecast_to_json(forecast: SieveForecast) -> str:
    doc = {
        "schema_version": FORECAST_SCHEMA_VERSION,
        "kind": "sieve_forecast",
        "num_replicates": forecast.num_replicates,
        "seed": forecast.seed,
        "center": forecast.center,
        "degenerate": forecast.degenerate,
        "alpha_levels": list(forecast.alpha_levels),
        "point": forecast.point.tolist(),
        "error_sd": forecast.error_sd.tolist(),
        "pointwise": {
            str(a): {"lower": lo.tolist(), "upper": hi.tolist()}
            for a, (lo, hi) in forecast.pointwise.items()
        },
        "band_radius": {str(a): q for a, q in forecast.band_radius.items()},
        "band": {
            str(a): {"lower": lo.tolist(), "upper": hi.tolist()}
            for a, (lo, hi) in forecast.band.items()
        },
    }
    return json.dumps(doc, indent=2)


def write_forecast_csv(path: str, forecast: SieveForecast) -> None:
    """Plot-ready table: one row per curve grid point, one column block per level."""
    alphas = sorted(forecast.alpha_levels, key=lambda a: 1.0 - a)
    header = ["grid_index", "point"]
    for a in alphas:
        pct = _coverage_pct(a)
        header += [f"lo{pct}", f"hi{pct}"]
    for a in alphas:
        pct = _coverage_pct(a)
        header += [f"band_lo{pct}", f"band_hi{pct}"]
    d = forecast.point.shape[0]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for j in range(d):
            row = [j + 2, repr(float(forecast.point[j]))]
            for a in alphas:
                lo, hi = forecast.pointwise[a]
                row += [repr(float(lo[j])), repr(float(hi[j]))]
            for a in alphas:
                lo, hi = forecast.band[a]
                row += [repr(float(lo[j])), repr(float(hi[j]))]
            writer.writerow(row)
