import warnings

import numpy as np
import pytest
from numpy.random import default_rng

from curvecast import (
    CurvecastError,
    DataError,
    NumericalError,
    VarModel,
    aicc,
    backward_innovation_transfer,
    companion_spectral_radius,
    fit_var,
    forecast_scores,
    select_order,
)


def simulate_var(coeffs, n, seed, burn=300, scale=1.0):
    coeffs = np.asarray(coeffs, dtype=float)
    p, K, _ = coeffs.shape
    r = default_rng(seed)
    eps = r.normal(0.0, scale, size=(n + burn, K))
    x = np.zeros((n + burn, K))
    for t in range(p, n + burn):
        acc = eps[t].copy()
        for lag in range(p):
            acc += coeffs[lag] @ x[t - lag - 1]
        x[t] = acc
    return x[burn:]


@pytest.fixture(scope="module")
def ar1_fit():
    A = np.array([[0.5, 0.2], [0.0, 0.4]])
    x = simulate_var(A[None], 500, seed=3)
    return A, x, fit_var(x, 1)


class TestFit:
    def test_coefficient_recovery(self, ar1_fit):
        A, _, m = ar1_fit
        assert np.linalg.norm(m.coeffs[0] - A) < 0.15

    def test_residuals_and_sigma_divisor(self, ar1_fit):
        _, x, m = ar1_fit
        n = x.shape[0]
        assert m.nobs == n
        assert m.residuals.shape == (n - 1, 2)
        manual = m.residuals.T @ m.residuals / (n - 1)
        assert np.array_equal(m.sigma, manual)

    def test_backward_equals_reversed_forward(self, ar1_fit):
        _, x, m = ar1_fit
        reversed_fit = fit_var(x[::-1].copy(), 1)
        assert np.allclose(m.backward_coeffs, reversed_fit.coeffs, atol=1e-12)
        assert np.allclose(
            m.backward_residuals, reversed_fit.residuals[::-1], atol=1e-12
        )

    def test_psi_powers_for_order_one(self, ar1_fit):
        _, _, m = ar1_fit
        assert np.array_equal(m.psi[0], np.eye(2))
        assert np.allclose(m.psi[1], m.coeffs[0], atol=1e-15)
        assert np.allclose(m.psi[2], m.coeffs[0] @ m.coeffs[0], atol=1e-15)

    def test_order_validation(self):
        with pytest.raises(DataError):
            fit_var(np.zeros((5, 2)), 0)
        with pytest.raises(DataError):
            fit_var(default_rng(0).normal(size=(3, 2)), 3)

    def test_nonstationary_fit_warns_and_skips_psi(self):
        y = np.zeros((300, 1))
        eps = default_rng(5).normal(size=300) * 0.01
        for t in range(1, 300):
            y[t] = 1.2 * y[t - 1] + eps[t]
        with pytest.warns(UserWarning):
            m = fit_var(y, 1)
        assert m.spectral_radius > 1.0
        assert m.psi is None
        assert not m.is_stationary

    def test_compute_psi_false_is_silent(self):
        y = np.zeros((300, 1))
        eps = default_rng(5).normal(size=300) * 0.01
        for t in range(1, 300):
            y[t] = 1.2 * y[t - 1] + eps[t]
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            m = fit_var(y, 1, compute_psi=False)
        assert m.psi is None


class TestCompanion:
    def test_order_one_scalar(self):
        assert companion_spectral_radius(np.array([[[0.5]]])) == pytest.approx(0.5)

    def test_order_two_scalar_matches_root(self):
        rad = companion_spectral_radius(np.array([[[0.5]], [[0.25]]]))
        roots = np.roots([1.0, -0.5, -0.25])
        assert rad == pytest.approx(np.abs(roots).max(), abs=1e-12)


class TestForecast:
    def test_one_and_two_step(self, ar1_fit):
        _, x, m = ar1_fit
        fc = forecast_scores(m, x, horizon=2)
        assert np.allclose(fc[0], x[-1] @ m.coeffs[0].T, atol=1e-14)
        assert np.allclose(fc[1], fc[0] @ m.coeffs[0].T, atol=1e-14)

    def test_order_two_uses_both_lags(self):
        coeffs = np.array([[[0.3]], [[0.4]]])
        x = simulate_var(coeffs, 400, seed=11)
        m = fit_var(x, 2)
        fc = forecast_scores(m, x, horizon=1)
        manual = m.coeffs[0] @ x[-1] + m.coeffs[1] @ x[-2]
        assert np.allclose(fc[0], manual, atol=1e-14)


class TestCriterion:
    def test_matches_independent_formula(self, ar1_fit):
        _, x, m = ar1_fit
        for p in (1, 2, 3):
            mp = fit_var(x, p)
            n = mp.nobs
            K = 2
            ridge = np.linalg.det(mp.sigma + 1e-12 * np.eye(K))
            manual = n * np.log(ridge) + n * (n * K + p * K * K) / (
                n - K * (p + 1) - 1
            )
            assert aicc(mp) == pytest.approx(manual, abs=1e-9)

    def test_worked_value(self):
        m = VarModel(
            order=1,
            coeffs=np.zeros((1, 1, 1)),
            residuals=np.zeros((99, 1)),
            backward_coeffs=np.zeros((1, 1, 1)),
            backward_residuals=np.zeros((99, 1)),
            sigma=np.array([[1.0]]),
            nobs=100,
            spectral_radius=0.0,
            psi=None,
        )
        assert aicc(m, n=100) == pytest.approx(10100.0 / 97.0, abs=1e-9)

    def test_undefined_for_tiny_samples(self, ar1_fit):
        _, _, m = ar1_fit
        with pytest.raises(NumericalError):
            aicc(m, n=4)


class TestOrderSelection:
    def test_recovers_order_two(self):
        coeffs = np.array(
            [
                [[0.15, 0.1, 0.0], [0.0, 0.1, 0.05], [0.0, 0.0, 0.12]],
                [[0.5, 0.0, 0.0], [0.05, 0.55, 0.0], [0.0, 0.05, 0.6]],
            ]
        )
        x = simulate_var(coeffs, 1000, seed=1000)
        assert select_order(x, 6) == 2

    def test_white_noise_picks_smallest(self):
        wn = default_rng(7).normal(size=(400, 2))
        assert select_order(wn, 6) == 1

    def test_rejects_empty_candidate_range(self):
        with pytest.raises(CurvecastError):
            select_order(default_rng(0).normal(size=(100, 2)), 0)


class TestBackwardTransfer:
    def test_variance_preserved(self):
        x = simulate_var(np.array([[[0.5]]]), 20000, seed=11, burn=200)
        m = fit_var(x, 1)
        pool = m.centered_residuals
        r = default_rng(99)
        star = pool[r.integers(0, pool.shape[0], size=20000)]
        out = backward_innovation_transfer(m, star, r)
        assert out.shape == star.shape
        assert abs(out.var() / star.var() - 1.0) < 0.05

    def test_shape_validation(self, ar1_fit):
        _, _, m = ar1_fit
        with pytest.raises(DataError):
            backward_innovation_transfer(m, np.zeros((10, 3)), default_rng(0))

    def test_requires_stationary_model(self):
        y = np.zeros((300, 1))
        eps = default_rng(5).normal(size=300) * 0.01
        for t in range(1, 300):
            y[t] = 1.2 * y[t - 1] + eps[t]
        with pytest.warns(UserWarning):
            m = fit_var(y, 1)
        with pytest.raises(NumericalError):
            backward_innovation_transfer(m, np.zeros((10, 1)), default_rng(0))
