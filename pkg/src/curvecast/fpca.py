"""Functional principal component analysis on the discrete curve grid.

The covariance of the centered curves is eigendecomposed under the
rectangle-rule inner product, giving component functions orthonormal in
that metric and component scores whose sample variances (divisor ``n``)
equal the eigenvalues.  The number of retained components is picked by an
eigenvalue-ratio rule unless fixed explicitly.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import DataError
from .gridcurves import FunctionalTimeSeries, _freeze

#: relative threshold below which trailing eigenvalues are treated as zero
EIGENVALUE_CLIP = 1e-12

FPCA_SCHEMA_VERSION = 1


@dataclass(frozen=True)
class FpcaModel:
    """Fitted functional PCA.

    Attributes
    ----------
    mean : (d,) array
        Pointwise average curve, d = tau - 1.
    eigenfunctions : (d, K_full) array
        Component functions, orthonormal under the weighted inner product.
    eigenvalues : (K_full,) array
        Non-increasing, non-negative component variances.
    scores : (n, K_full) array
        Component scores of the training curves.
    residuals : (n, d) array
        Training curves minus the rank-``num_components`` reconstruction.
    num_components : int
        Retained rank used for forecasting and residuals.
    quad_weight : float
        Rectangle-rule weight of the fitting grid.
    degenerate : bool
        True when the curves carried no variance at all.
    """

    mean: np.ndarray
    eigenfunctions: np.ndarray
    eigenvalues: np.ndarray
    scores: np.ndarray
    residuals: np.ndarray
    num_components: int
    quad_weight: float
    nobs: int
    degenerate: bool = False

    @property
    def full_rank(self) -> int:
        return self.eigenfunctions.shape[1]

    @property
    def grid_size(self) -> int:
        return self.mean.shape[0]


def select_num_components(eigenvalues: Sequence[float], n: int) -> int:
    """Pick the retained rank by the eigenvalue-ratio rule.

    Over candidate ranks ``k = 1..k_max`` the objective is the ratio of
    successive eigenvalues when the k-th eigenvalue is still a
    non-negligible share of the first one, and 1 otherwise; the rank with
    the smallest objective wins, ties going to the smallest rank.
    ``k_max`` counts the eigenvalues at least as large as the average
    total variance per training curve.  A ratio whose numerator falls
    past the end of the spectrum counts as the non-informative value 1.
    """
    ev = np.asarray(eigenvalues, dtype=float)
    if ev.ndim != 1 or ev.size == 0:
        raise DataError("eigenvalues must be a non-empty 1-d sequence")
    if n < 2:
        raise DataError(f"need sample size n >= 2, got {n}")
    if (np.diff(ev) > 1e-9 * max(abs(ev[0]), 1.0)).any():
        raise DataError("eigenvalues must be non-increasing")
    if ev[0] <= 0.0:
        warnings.warn("all eigenvalues are zero; defaulting to a single component")
        return 1
    threshold = ev.sum() / n
    k_max = max(1, int((ev >= threshold).sum()))
    upsilon = 1.0 / math.log(max(ev[0], n))
    objective = []
    for k in range(1, k_max + 1):
        if ev[k - 1] / ev[0] < upsilon:
            objective.append(1.0)
        elif k < ev.size:
            objective.append(ev[k] / ev[k - 1])
        else:
            objective.append(1.0)
    return int(np.argmin(objective)) + 1


def select_num_components_by_variance(
    eigenvalues: Sequence[float], threshold: float = 0.85
) -> int:
    """Smallest rank whose cumulative variance share reaches ``threshold``."""
    ev = np.asarray(eigenvalues, dtype=float)
    if not 0.0 < threshold <= 1.0:
        raise DataError(f"threshold must lie in (0, 1], got {threshold}")
    total = ev.sum()
    if total <= 0.0:
        return 1
    share = np.cumsum(ev) / total
    return int(np.searchsorted(share, threshold - 1e-12) + 1)


def _fix_signs(phi: np.ndarray, w: float) -> np.ndarray:
    """Deterministic sign: weighted integral positive, else first big coordinate."""
    phi = phi.copy()
    for k in range(phi.shape[1]):
        col = phi[:, k]
        integral = w * col.sum()
        scale = np.abs(col).max()
        if abs(integral) > 1e-10 * max(scale, 1.0):
            if integral < 0:
                phi[:, k] = -col
        else:
            big = np.nonzero(np.abs(col) > 1e-10 * max(scale, 1.0))[0]
            if big.size and col[big[0]] < 0:
                phi[:, k] = -col
    return phi


def weighted_pca(values: np.ndarray, weight: float):
    """Eigendecompose the covariance of ``values`` under a rectangle-rule weight.

    Returns ``(mean, eigenfunctions, eigenvalues, scores, degenerate)``.
    The covariance uses divisor ``n``; trailing eigenvalues below
    ``EIGENVALUE_CLIP`` times the largest are dropped along with their
    eigenfunctions, capping the rank at ``min(n - 1, grid size)``.
    """
    X = np.asarray(values, dtype=float)
    n, d = X.shape
    if n < 2:
        raise DataError(f"need at least 2 days to fit, got {n}")
    mean = X.mean(axis=0)
    centered = X - mean
    cov = (centered.T @ centered) / n
    evals, evecs = np.linalg.eigh(weight * cov)
    order = np.argsort(evals)[::-1]
    evals = evals[order]
    evecs = evecs[:, order]
    evals = np.where(evals < 0.0, 0.0, evals)

    degenerate = bool(evals[0] <= 0.0)
    if degenerate:
        rank = 1
        warnings.warn("curves carry no variance; functional PCA is degenerate")
    else:
        cap = min(n - 1, d)
        positive = int((evals > EIGENVALUE_CLIP * evals[0]).sum())
        rank = max(1, min(cap, positive))
    evals = evals[:rank]
    evecs = evecs[:, :rank]

    phi = _fix_signs(evecs / math.sqrt(weight), weight)
    scores = centered @ (weight * phi)
    return mean, phi, evals, scores, degenerate


def fit_fpca(
    fts: FunctionalTimeSeries, num_components: Optional[int] = None
) -> FpcaModel:
    """Fit functional PCA to a curve time series.

    ``num_components`` fixes the retained rank; when omitted it is chosen
    by :func:`select_num_components`.
    """
    n = fts.n
    w = fts.grid.quad_weight
    mean, phi, evals, scores, degenerate = weighted_pca(fts.values, w)
    rank = evals.size
    centered = fts.values - mean

    if num_components is None:
        K = 1 if degenerate else select_num_components(evals, n)
    else:
        K = int(num_components)
        if not 1 <= K <= rank:
            raise DataError(
                f"num_components={K} outside the available rank 1..{rank}"
            )
    residuals = centered - scores[:, :K] @ phi[:, :K].T
    return FpcaModel(
        mean=_freeze(mean),
        eigenfunctions=_freeze(phi),
        eigenvalues=_freeze(evals),
        scores=_freeze(scores),
        residuals=_freeze(residuals),
        num_components=K,
        quad_weight=w,
        nobs=n,
        degenerate=degenerate,
    )


def project_scores(model: FpcaModel, curve: np.ndarray) -> np.ndarray:
    """Scores of one curve on the retained components."""
    curve = np.asarray(curve, dtype=float)
    if curve.shape != (model.grid_size,):
        raise DataError(f"curve has shape {curve.shape}, expected ({model.grid_size},)")
    K = model.num_components
    return model.quad_weight * ((curve - model.mean) @ model.eigenfunctions[:, :K])


def reconstruct(model: FpcaModel, scores: np.ndarray) -> np.ndarray:
    """Curve implied by a score vector (any length up to the full rank)."""
    scores = np.asarray(scores, dtype=float)
    if scores.ndim != 1 or not 1 <= scores.size <= model.full_rank:
        raise DataError(
            f"scores must be 1-d with 1..{model.full_rank} entries, got shape {scores.shape}"
        )
    return model.mean + model.eigenfunctions[:, : scores.size] @ scores


def model_to_json(model: FpcaModel) -> str:
    doc = {
        "schema_version": FPCA_SCHEMA_VERSION,
        "kind": "fpca_model",
        "quad_weight": model.quad_weight,
        "num_components": model.num_components,
        "nobs": model.nobs,
        "degenerate": model.degenerate,
        "mean": model.mean.tolist(),
        "eigenvalues": model.eigenvalues.tolist(),
        "eigenfunctions": model.eigenfunctions.tolist(),
    }
    return json.dumps(doc, indent=2)


def model_from_json(text: str) -> FpcaModel:
    doc = json.loads(text)
    if doc.get("kind") != "fpca_model":
        raise DataError("JSON document is not an fpca_model")
    if doc.get("schema_version") != FPCA_SCHEMA_VERSION:
        raise DataError(f"unsupported fpca_model schema_version {doc.get('schema_version')}")
    phi = np.asarray(doc["eigenfunctions"], dtype=float)
    d, rank = phi.shape
    return FpcaModel(
        mean=_freeze(np.asarray(doc["mean"], dtype=float)),
        eigenfunctions=_freeze(phi),
        eigenvalues=_freeze(np.asarray(doc["eigenvalues"], dtype=float)),
        scores=_freeze(np.zeros((0, rank))),
        residuals=_freeze(np.zeros((0, d))),
        num_components=int(doc["num_components"]),
        quad_weight=float(doc["quad_weight"]),
        nobs=int(doc["nobs"]),
        degenerate=bool(doc["degenerate"]),
    )
