"""Shared fixtures: one small synthetic dataset fitted once per session."""

import math
import warnings

import numpy as np
import pytest

from curvecast import (
    BootstrapConfig,
    SynthSpec,
    draw_replicates,
    fit_fpca,
    fit_var,
    generate,
    select_order,
)


def sort_quantile_oracle(values, q):
    """Reference type-7 quantile: sort, then linear interpolation."""
    v = sorted(float(x) for x in values)
    n = len(v)
    h = (n - 1) * q
    f = math.floor(h)
    if f >= n - 1:
        return v[n - 1]
    return v[f] + (h - f) * (v[f + 1] - v[f])


@pytest.fixture(scope="session")
def small_fts():
    spec = SynthSpec(
        n=60, tau=12, num_factors=2, noise_sd=0.2, mean_scale=0.5, seed=3
    )
    fts, truth = generate(spec)
    return fts, truth


@pytest.fixture(scope="session")
def small_fit(small_fts):
    fts, _ = small_fts
    model = fit_fpca(fts)
    scores = model.scores[:, : model.num_components]
    var = fit_var(scores, select_order(scores, 4))
    return fts, model, var


@pytest.fixture(scope="session")
def small_reps(small_fit):
    _, model, var = small_fit
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return draw_replicates(model, var, BootstrapConfig(num_replicates=60, seed=5))


@pytest.fixture()
def rng():
    return np.random.default_rng(0)
