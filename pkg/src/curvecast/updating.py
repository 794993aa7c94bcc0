"""Intraday dynamic updating of the next-day forecast.

Once part of the new day has been observed, the remaining curve can be
re-forecast.  Two estimators are provided:

* penalized least squares ('PLS'): re-estimate the day's component scores
  from the observed block, shrinking toward the day-ahead score forecast;
  zero shrinkage is plain least squares ('OLS'), infinite shrinkage
  reproduces the day-ahead forecast.
* function-on-function linear regression ('FLR'): run separate component
  analyses on the observed-side and remaining-side blocks of the training
  days, regress late scores on early scores, and push the observed block
  through the fitted linkage.

Shrinkage strength is tuned per updating period on a held-out validation
slice, by squared forecast error for point updates or by mean interval
score for interval updates.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigError, DataError, NumericalError
from .fpca import FpcaModel, fit_fpca, select_num_components, weighted_pca
from .gridcurves import FunctionalTimeSeries, _freeze
from .sieve import (
    BootstrapConfig,
    SieveReplicates,
    derive_seed,
    draw_replicates,
    empirical_quantile,
    project_replicate_block,
)
from .varmodel import fit_var, forecast_scores, select_order

#: default shrinkage grid: exact least squares plus decade steps
DEFAULT_LAMBDA_GRID = (0.0,) + tuple(10.0**j for j in range(-2, 9))

#: ridge floor applied when the early-score Gram matrix is numerically singular
LINK_RIDGE = 1e-8

SCHEDULE_SCHEMA_VERSION = 1


def updating_columns(tau: int, m: int) -> np.ndarray:
    """Curve-array columns still to be forecast when the day is observed through u_m."""
    if not 2 <= m < tau:
        raise ConfigError(f"updating period must satisfy 2 <= m < tau, got m={m}")
    return np.arange(m - 1, tau - 1)


def observed_columns(tau: int, m: int) -> np.ndarray:
    """Curve-array columns already observed at updating period ``m``."""
    if not 2 <= m < tau:
        raise ConfigError(f"updating period must satisfy 2 <= m < tau, got m={m}")
    return np.arange(0, m - 1)


@dataclass(frozen=True)
class UpdateContext:
    """Everything an intraday update needs about the partially observed day.

    ``observed`` holds the day's curve values on grid indices 2..m;
    ``eigenbasis_obs`` the retained component functions restricted to
    those points; ``ts_scores`` the day-ahead score forecast that acts as
    the shrinkage target.
    """

    m: int
    observed: np.ndarray
    eigenbasis_obs: np.ndarray
    ts_scores: np.ndarray
    updating_cols: np.ndarray

    def __post_init__(self):
        obs = np.asarray(self.observed, dtype=float)
        if obs.ndim != 1 or obs.size != self.m - 1:
            raise DataError(
                f"observed block must have m-1={self.m - 1} values, got shape {obs.shape}"
            )
        if not np.isfinite(obs).all():
            raise DataError("observed block contains non-finite values")
        object.__setattr__(self, "observed", _freeze(obs))


def build_update_context(fpca, var, observed: Sequence[float]) -> UpdateContext:
    """Assemble an :class:`UpdateContext` from fitted models and observed values."""
    observed = np.asarray(observed, dtype=float)
    d = fpca.grid_size
    if observed.ndim != 1 or not 1 <= observed.size <= d - 1:
        raise DataError(
            f"observed block must hold 1..{d - 1} values, got shape {observed.shape}"
        )
    m = observed.size + 1
    K = fpca.num_components
    ts1 = forecast_scores(var, fpca.scores[:, :K], horizon=1)[0]
    return UpdateContext(
        m=m,
        observed=observed,
        eigenbasis_obs=_freeze(fpca.eigenfunctions[: m - 1, :K]),
        ts_scores=_freeze(ts1),
        updating_cols=np.arange(m - 1, d),
    )


# ---------------------------------------------------------------------------
# penalized least squares
# ---------------------------------------------------------------------------


def pls_coefficients(ctx: UpdateContext, lam: float, fpca: FpcaModel) -> np.ndarray:
    """Score estimate from the observed block, shrunk toward the forecast scores.

    Solves ``(F'F + lam I) beta = F' x_centered + lam ts_scores`` where F
    is the component basis on the observed points.  ``lam = 0`` requires
    F to have full column rank.
    """
    if lam < 0:
        raise ConfigError(f"shrinkage must be >= 0, got {lam}")
    F = ctx.eigenbasis_obs
    K = F.shape[1]
    xc = ctx.observed - fpca.mean[: ctx.m - 1]
    if lam == 0.0:
        s = np.linalg.svd(F, compute_uv=False)
        if F.shape[0] < K or s[-1] <= 1e-12 * s[0]:
            raise NumericalError(
                f"least squares rank-deficient at m={ctx.m} with {K} components"
            )
    gram = F.T @ F + lam * np.eye(K)
    rhs = F.T @ xc + lam * ctx.ts_scores
    return np.linalg.solve(gram, rhs)


def pls_update(ctx: UpdateContext, lam: float, fpca: FpcaModel) -> np.ndarray:
    """Updated forecast of the not-yet-observed part of the day."""
    beta = pls_coefficients(ctx, lam, fpca)
    cols = ctx.updating_cols
    K = beta.size
    return fpca.mean[cols] + fpca.eigenfunctions[cols, :K] @ beta


def ols_update(ctx: UpdateContext, fpca: FpcaModel) -> np.ndarray:
    """Unshrunk least-squares update (requires a full-rank observed basis)."""
    return pls_update(ctx, 0.0, fpca)


def shrinkage_objective(
    ctx: UpdateContext, fpca: FpcaModel, lam: float, coeffs: np.ndarray
) -> float:
    """The criterion minimized by :func:`pls_coefficients` (unweighted sums)."""
    coeffs = np.asarray(coeffs, dtype=float)
    F = ctx.eigenbasis_obs
    xc = ctx.observed - fpca.mean[: ctx.m - 1]
    fit = xc - F @ coeffs
    dev = coeffs - ctx.ts_scores
    return float(fit @ fit + lam * (dev @ dev))


def _lam_for_alpha(lam, alpha: float) -> float:
    if isinstance(lam, dict):
        if alpha not in lam:
            raise ConfigError(f"no shrinkage value supplied for alpha={alpha}")
        return float(lam[alpha])
    return float(lam)


def pls_interval_update(
    ctx: UpdateContext,
    lam,
    fpca: FpcaModel,
    reps: SieveReplicates,
    alpha_levels: Sequence[float] = (0.2, 0.05),
) -> dict:
    """Prediction intervals for the rest of the day from bootstrap score draws.

    Each replicate's forecast-score draw is shrunk against the actually
    observed block exactly as the point update is, rebuilt on the
    updating grid, and perturbed by that replicate's resampled residual
    curve; intervals are empirical quantiles across replicates.  ``lam``
    may be a scalar or a per-alpha mapping.
    """
    cols = ctx.updating_cols
    F = ctx.eigenbasis_obs
    K = F.shape[1]
    if reps.future_scores.shape[1] != K:
        raise DataError("replicates were drawn from a different component model")
    xc = ctx.observed - fpca.mean[: ctx.m - 1]
    late_resid = reps.resid_pool[reps.future_resid_idx][:, cols]
    basis_late = fpca.eigenfunctions[cols, :K]
    out = {}
    for alpha in alpha_levels:
        la = _lam_for_alpha(lam, alpha)
        if la == 0.0:
            s = np.linalg.svd(F, compute_uv=False)
            if F.shape[0] < K or s[-1] <= 1e-12 * s[0]:
                raise NumericalError(
                    f"least squares rank-deficient at m={ctx.m} with {K} components"
                )
        gram = F.T @ F + la * np.eye(K)
        base = np.linalg.solve(gram, F.T @ xc)
        shrink = la * np.linalg.solve(gram, reps.future_scores.T).T  # (B, K)
        betas = base + shrink
        curves = fpca.mean[cols] + betas @ basis_late.T + late_resid
        lo = empirical_quantile(curves, alpha / 2.0, axis=0)
        hi = empirical_quantile(curves, 1.0 - alpha / 2.0, axis=0)
        out[alpha] = (_freeze(lo), _freeze(hi))
    return out


# ---------------------------------------------------------------------------
# function-on-function linear regression
# ---------------------------------------------------------------------------


def block_weight(npoints: int) -> float:
    """Rectangle-rule weight of a sub-block (weight 1 for a single point)."""
    return 1.0 / (npoints - 1) if npoints >= 2 else 1.0


def link_scores(theta: np.ndarray, vartheta: np.ndarray):
    """Least-squares linkage of late scores on early scores.

    Returns ``(link, ridged)``; a numerically singular Gram matrix gets a
    ridge floor proportional to its trace and the flag is set.
    """
    theta = np.asarray(theta, dtype=float)
    vartheta = np.asarray(vartheta, dtype=float)
    if theta.ndim != 2 or vartheta.ndim != 2 or theta.shape[0] != vartheta.shape[0]:
        raise DataError(
            f"score matrices must share rows, got {theta.shape} and {vartheta.shape}"
        )
    gram = theta.T @ theta
    evals = np.linalg.eigvalsh(gram)
    ridged = evals[-1] <= 0.0 or evals[0] <= 1e-12 * evals[-1]
    if ridged:
        trace = float(np.trace(gram))
        if trace <= 0.0:
            warnings.warn("early scores are identically zero; linkage set to zero")
            return np.zeros((theta.shape[1], vartheta.shape[1])), True
        gram = gram + LINK_RIDGE * trace * np.eye(theta.shape[1])
        warnings.warn("early-score Gram matrix is singular; ridge floor applied")
    return np.linalg.solve(gram, theta.T @ vartheta), ridged


@dataclass(frozen=True)
class FlrModel:
    """Block decompositions and the fitted early-to-late score linkage."""

    split: int
    early_mean: np.ndarray
    late_mean: np.ndarray
    early_basis: np.ndarray   # (m - 1, R)
    late_basis: np.ndarray    # (tau - m, S)
    early_weight: float
    late_weight: float
    early_eigenvalues: np.ndarray
    late_eigenvalues: np.ndarray
    early_scores: np.ndarray  # (n, R)
    late_scores: np.ndarray   # (n, S)
    link: np.ndarray          # (R, S)
    ridged: bool

    @property
    def num_early(self) -> int:
        return self.early_basis.shape[1]

    @property
    def num_late(self) -> int:
        return self.late_basis.shape[1]


def flr_fit(
    fts: FunctionalTimeSeries,
    m: int,
    num_early: Optional[int] = None,
    num_late: Optional[int] = None,
) -> FlrModel:
    """Fit block component analyses and the early-to-late score regression."""
    d = fts.grid.curve_size
    tau = fts.grid.tau
    ecols = observed_columns(tau, m)
    lcols = updating_columns(tau, m)
    w_e = block_weight(ecols.size)
    w_l = block_weight(lcols.size)
    e_mean, e_phi, e_vals, e_scores, e_degen = weighted_pca(fts.values[:, ecols], w_e)
    l_mean, l_phi, l_vals, l_scores, l_degen = weighted_pca(fts.values[:, lcols], w_l)
    n = fts.n
    if num_early is None:
        num_early = 1 if e_degen else select_num_components(e_vals, n)
    if num_late is None:
        num_late = 1 if l_degen else select_num_components(l_vals, n)
    if not 1 <= num_early <= e_vals.size or not 1 <= num_late <= l_vals.size:
        raise DataError(
            f"block ranks ({num_early}, {num_late}) outside the available "
            f"({e_vals.size}, {l_vals.size})"
        )
    theta = e_scores[:, :num_early]
    vartheta = l_scores[:, :num_late]
    link, ridged = link_scores(theta, vartheta)
    return FlrModel(
        split=m,
        early_mean=_freeze(e_mean),
        late_mean=_freeze(l_mean),
        early_basis=_freeze(e_phi[:, :num_early]),
        late_basis=_freeze(l_phi[:, :num_late]),
        early_weight=w_e,
        late_weight=w_l,
        early_eigenvalues=_freeze(e_vals),
        late_eigenvalues=_freeze(l_vals),
        early_scores=_freeze(theta),
        late_scores=_freeze(vartheta),
        link=_freeze(link),
        ridged=ridged,
    )


def _early_projection(model: FlrModel, observed: np.ndarray) -> np.ndarray:
    observed = np.asarray(observed, dtype=float)
    ne = model.early_basis.shape[0]
    if observed.shape != (ne,):
        raise DataError(f"observed block has shape {observed.shape}, expected ({ne},)")
    return model.early_weight * ((observed - model.early_mean) @ model.early_basis)


def flr_update(model: FlrModel, observed: Sequence[float]) -> np.ndarray:
    """Forecast of the remaining block implied by the observed block."""
    theta_new = _early_projection(model, observed)
    return model.late_mean + (theta_new @ model.link) @ model.late_basis.T


def flr_interval_update(
    model: FlrModel,
    observed: Sequence[float],
    reps: SieveReplicates,
    alpha_levels: Sequence[float] = (0.2, 0.05),
) -> dict:
    """Prediction intervals for the remaining block via bootstrap linkages.

    Each replicate's pseudo-series is projected on the fitted block bases
    and its own linkage re-estimated; the observed block is pushed
    through every bootstrap linkage and the replicate's resampled
    residual curve (restricted to the remaining block) is added before
    taking empirical quantiles.
    """
    tau = reps.mean.shape[0] + 1
    ecols = observed_columns(tau, model.split)
    lcols = updating_columns(tau, model.split)
    theta_star = project_replicate_block(
        reps, ecols, model.early_basis, model.early_weight, model.early_mean
    )  # (B, n, R)
    vartheta_star = project_replicate_block(
        reps, lcols, model.late_basis, model.late_weight, model.late_mean
    )  # (B, n, S)
    gram = np.einsum("bnr,bns->brs", theta_star, theta_star)
    cross = np.einsum("bnr,bns->brs", theta_star, vartheta_star)
    R = gram.shape[1]
    evals = np.linalg.eigvalsh(gram)
    bad = (evals[:, -1] <= 0.0) | (evals[:, 0] <= 1e-12 * evals[:, -1])
    if bad.any():
        trace = np.einsum("bii->b", gram)
        gram = gram + (bad * LINK_RIDGE * np.maximum(trace, 1.0))[:, None, None] * np.eye(R)
    links = np.linalg.solve(gram, cross)  # (B, R, S)
    theta_obs = _early_projection(model, observed)
    preds = np.einsum("r,brs,ls->bl", theta_obs, links, model.late_basis)
    curves = model.late_mean + preds + reps.resid_pool[reps.future_resid_idx][:, lcols]
    out = {}
    for alpha in alpha_levels:
        lo = empirical_quantile(curves, alpha / 2.0, axis=0)
        hi = empirical_quantile(curves, 1.0 - alpha / 2.0, axis=0)
        out[alpha] = (_freeze(lo), _freeze(hi))
    return out


# ---------------------------------------------------------------------------
# shrinkage tuning
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TuningCase:
    """One validation day at one updating period."""

    ctx: UpdateContext
    actual_late: np.ndarray
    fpca: FpcaModel
    reps: Optional[SieveReplicates] = None


@dataclass(frozen=True)
class LambdaSchedule:
    """Tuned shrinkage per updating period.

    ``point`` maps m to the squared-error-optimal value; ``interval``
    maps each alpha level to such a mapping tuned by mean interval score.
    """

    point: Optional[dict] = None
    interval: Optional[dict] = None
    lambda_grid: tuple = DEFAULT_LAMBDA_GRID

    def point_lambda(self, m: int) -> float:
        if self.point is None or m not in self.point:
            raise ConfigError(f"no point-tuned shrinkage for updating period m={m}")
        return self.point[m]

    def interval_lambda(self, alpha: float, m: int) -> float:
        if self.interval is None or alpha not in self.interval or m not in self.interval[alpha]:
            raise ConfigError(
                f"no interval-tuned shrinkage for alpha={alpha}, m={m}"
            )
        return self.interval[alpha][m]


def schedule_to_json(schedule: LambdaSchedule) -> str:
    doc = {
        "schema_version": SCHEDULE_SCHEMA_VERSION,
        "kind": "lambda_schedule",
        "lambda_grid": list(schedule.lambda_grid),
        "point": None
        if schedule.point is None
        else {str(m): v for m, v in sorted(schedule.point.items())},
        "interval": None
        if schedule.interval is None
        else {
            repr(a): {str(m): v for m, v in sorted(per_m.items())}
            for a, per_m in schedule.interval.items()
        },
    }
    return json.dumps(doc, indent=2)


def schedule_from_json(text: str) -> LambdaSchedule:
    doc = json.loads(text)
    if doc.get("kind") != "lambda_schedule":
        raise DataError("JSON document is not a lambda_schedule")
    if doc.get("schema_version") != SCHEDULE_SCHEMA_VERSION:
        raise DataError(
            f"unsupported lambda_schedule schema_version {doc.get('schema_version')}"
        )
    point = doc.get("point")
    interval = doc.get("interval")
    return LambdaSchedule(
        point=None if point is None else {int(m): float(v) for m, v in point.items()},
        interval=None
        if interval is None
        else {
            float(a): {int(m): float(v) for m, v in per_m.items()}
            for a, per_m in interval.items()
        },
        lambda_grid=tuple(doc.get("lambda_grid", DEFAULT_LAMBDA_GRID)),
    )


def _interval_score_mean(lo, hi, actual, alpha) -> float:
    from .evalharness import interval_score

    return float(np.mean(interval_score(lo, hi, actual, alpha)))


def select_lambda_from_cases(
    cases: Sequence[TuningCase],
    lambda_grid: Sequence[float] = DEFAULT_LAMBDA_GRID,
    objective: str = "msfe",
    alpha_levels: Sequence[float] = (0.2, 0.05),
):
    """Grid-search the shrinkage for one updating period over prepared cases.

    Returns a float for the squared-error objective, or a dict mapping
    each alpha level to its own value for the interval-score objective.
    Infeasible grid entries (rank-deficient exact least squares) are
    skipped; ties resolve to the smallest value.
    """
    if not cases:
        raise ConfigError("no tuning cases supplied")
    grid = sorted(set(float(v) for v in lambda_grid))
    if any(v < 0 for v in grid):
        raise ConfigError("shrinkage grid must be non-negative")
    if objective == "msfe":
        totals = np.full(len(grid), np.inf)
        for i, lam in enumerate(grid):
            try:
                errs = [
                    np.mean((pls_update(c.ctx, lam, c.fpca) - c.actual_late) ** 2)
                    for c in cases
                ]
            except NumericalError:
                continue
            totals[i] = float(np.mean(errs))
        if not np.isfinite(totals).any():
            raise NumericalError("no feasible shrinkage value on the grid")
        return grid[int(np.argmin(totals))]
    if objective == "interval_score":
        out = {}
        for alpha in alpha_levels:
            totals = np.full(len(grid), np.inf)
            for i, lam in enumerate(grid):
                try:
                    scores = []
                    for c in cases:
                        if c.reps is None:
                            raise ConfigError(
                                "interval-score tuning needs bootstrap replicates per case"
                            )
                        lo, hi = pls_interval_update(
                            c.ctx, lam, c.fpca, c.reps, alpha_levels=(alpha,)
                        )[alpha]
                        scores.append(
                            _interval_score_mean(lo, hi, c.actual_late, alpha)
                        )
                except NumericalError:
                    continue
                totals[i] = float(np.mean(scores))
            if not np.isfinite(totals).any():
                raise NumericalError("no feasible shrinkage value on the grid")
            out[alpha] = grid[int(np.argmin(totals))]
        return out
    raise ConfigError(f"unknown tuning objective {objective!r}")


def tune_lambda(
    fts: FunctionalTimeSeries,
    train_size: int = 150,
    validation_size: int = 50,
    objective: str = "msfe",
    lambda_grid: Sequence[float] = DEFAULT_LAMBDA_GRID,
    periods: Optional[Sequence[int]] = None,
    num_components: Optional[int] = None,
    max_order: int = 10,
    bootstrap: Optional[BootstrapConfig] = None,
) -> LambdaSchedule:
    """Tune the shrinkage schedule on an expanding-window validation slice.

    Days ``train_size .. train_size + validation_size - 1`` are forecast
    one at a time with models refit on all prior days; the grid value
    minimizing the chosen objective, averaged over validation days, is
    kept per updating period.
    """
    if objective not in ("msfe", "interval_score"):
        raise ConfigError(f"unknown tuning objective {objective!r}")
    if train_size < 3 or validation_size < 1:
        raise ConfigError(
            f"bad tuning split: train_size={train_size}, validation_size={validation_size}"
        )
    if train_size + validation_size > fts.n:
        raise ConfigError(
            f"tuning split needs {train_size + validation_size} days, have {fts.n}"
        )
    tau = fts.grid.tau
    if periods is None:
        periods = range(2, tau)
    periods = sorted(set(int(m) for m in periods))
    for m in periods:
        if not 2 <= m < tau:
            raise ConfigError(f"updating period m={m} outside 2..{tau - 1}")
    need_reps = objective == "interval_score"
    if need_reps and bootstrap is None:
        bootstrap = BootstrapConfig()

    cases_by_m = {m: [] for m in periods}
    for v in range(train_size, train_size + validation_size):
        prefix = fts.window(0, v)
        actual = fts.values[v]
        model = fit_fpca(prefix, num_components)
        K = model.num_components
        order = select_order(model.scores[:, :K], max_order)
        var = fit_var(model.scores[:, :K], order)
        reps = None
        if need_reps:
            day_cfg = replace(bootstrap, seed=derive_seed(bootstrap.seed, 1, v))
            reps = draw_replicates(model, var, day_cfg)
        for m in periods:
            ctx = build_update_context(model, var, actual[: m - 1])
            cases_by_m[m].append(
                TuningCase(ctx=ctx, actual_late=actual[m - 1 :], fpca=model, reps=reps)
            )

    alphas = bootstrap.alpha_levels if bootstrap is not None else (0.2, 0.05)
    point = None
    interval = None
    if objective == "msfe":
        point = {
            m: select_lambda_from_cases(cases_by_m[m], lambda_grid, "msfe")
            for m in periods
        }
    else:
        interval = {a: {} for a in alphas}
        for m in periods:
            per_alpha = select_lambda_from_cases(
                cases_by_m[m], lambda_grid, "interval_score", alphas
            )
            for a in alphas:
                interval[a][m] = per_alpha[a]
    return LambdaSchedule(point=point, interval=interval, lambda_grid=tuple(sorted(set(float(v) for v in lambda_grid))))
