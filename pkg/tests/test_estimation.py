"""Least-squares machinery against longhand elimination and exact algebra."""

import numpy as np
import pytest

import arstep as a
from oracles import least_squares_by_elimination, substitution_coefficients

CUBIC = (0.9, -0.81, 0.91)


def _noiseless_series(levels, n, impulse=5.0):
    dgp = a.DgpSpec("noiseless", tuple(levels), False, 1, 1, sigma2=0.0)
    return a.generate(dgp, n, seed=0, impulse=impulse)


def test_lag_matrix_rows_are_reversed_windows():
    series = np.arange(1.0, 11.0)
    rows = a.lag_matrix(series, 3, 3, 9)
    assert rows.shape == (7, 3)
    np.testing.assert_array_equal(rows[0], [3.0, 2.0, 1.0])
    np.testing.assert_array_equal(rows[-1], [9.0, 8.0, 7.0])
    assert a.lag_matrix(series, 3, 5, 4).shape == (0, 3)
    with pytest.raises(ValueError):
        a.lag_matrix(series, 3, 2, 9)


def test_fit_one_step_recovers_noiseless_recursion():
    series = _noiseless_series(CUBIC, 300)
    fit = a.fit_one_step(series, 3)
    np.testing.assert_allclose(fit.coeffs, CUBIC, rtol=0, atol=1e-7)
    assert fit.method == a.PLUG_IN
    assert fit.h == 1
    assert fit.k == 3
    assert fit.sample_end == 300


def test_plug_in_multi_on_exact_coefficients():
    exact = a.FittedCoefficients(coeffs=CUBIC, k=3, h=1, method=a.PLUG_IN,
                                 sample_end=300)
    multi = a.plug_in_multi(exact, 3)
    np.testing.assert_allclose(multi.coeffs, (0.181, 0.819, 0.0),
                               rtol=0, atol=1e-12)
    assert multi.h == 3 and multi.method == a.PLUG_IN

    x2 = a.FittedCoefficients(coeffs=(1.5, -0.5), k=2, h=1,
                              method=a.PLUG_IN, sample_end=100)
    np.testing.assert_allclose(a.plug_in_multi(x2, 2).coeffs,
                               (1.75, -0.75), rtol=0, atol=1e-14)
    assert a.plug_in_multi(x2, 1) is x2


def test_plug_in_multi_requires_one_step_input():
    direct = a.FittedCoefficients(coeffs=(1.0,), k=1, h=2, method=a.DIRECT,
                                  sample_end=50)
    with pytest.raises(ValueError):
        a.plug_in_multi(direct, 2)


def test_plug_in_power_matches_companion_matrix_power():
    rng = np.random.default_rng(21)
    series = rng.normal(size=90).cumsum()
    one = a.fit_one_step(series, 4)
    coeffs = np.asarray(one.coeffs)
    for h in (2, 3, 5):
        multi = a.plug_in_multi(one, h)
        power = np.linalg.matrix_power(a.companion_matrix(coeffs), h - 1)
        np.testing.assert_allclose(multi.coeffs, power @ coeffs,
                                   rtol=1e-10, atol=1e-12)


def test_fit_direct_noiseless_cubic_three_step():
    series = _noiseless_series(CUBIC, 400)
    fit = a.fit_direct(series, 2, 3)
    np.testing.assert_allclose(fit.coeffs, (0.181, 0.819), rtol=0, atol=1e-6)
    assert fit.method == a.DIRECT and fit.h == 3


def test_fit_sample_size_preconditions():
    series = np.arange(10.0)
    with pytest.raises(a.SingularDesign):
        a.fit_one_step(series, 3, i=5)
    with pytest.raises(a.SingularDesign):
        a.fit_direct(series, 3, 2, i=6)


def test_fits_match_longhand_elimination():
    rng = np.random.default_rng(1234)
    for _ in range(50):
        n = int(rng.integers(40, 120))
        k = int(rng.integers(1, 5))
        h = int(rng.integers(1, 4))
        series = rng.normal(size=n).cumsum()
        one = a.fit_one_step(series, k)
        want = least_squares_by_elimination(
            a.lag_matrix(series, k, k, n - 1), series[k:n])
        np.testing.assert_allclose(one.coeffs, want, rtol=1e-9, atol=1e-9)
        direct = a.fit_direct(series, k, h)
        want = least_squares_by_elimination(
            a.lag_matrix(series, k, k, n - h), series[k + h - 1:n])
        np.testing.assert_allclose(direct.coeffs, want, rtol=1e-9, atol=1e-9)


def test_fit_raises_on_rank_deficient_design():
    with pytest.raises(a.SingularDesign):
        a.fit_one_step(np.zeros(40), 2)
    # a pure trend has rank-1 lag windows of order 2 once differenced
    series = _noiseless_series((1.5, -0.5), 120)
    with pytest.raises(a.SingularDesign):
        a.fit_one_step(series, 3)


def test_gram_accumulator_matches_batch_fit():
    rng = np.random.default_rng(55)
    series = rng.normal(size=80).cumsum()
    k = 3
    acc = a.GramAccumulator(k)
    rows = a.lag_matrix(series, k, k, 79)
    targets = series[k:]
    for row, target in zip(rows, targets):
        acc.add(row, target)
    assert acc.count == len(targets)
    incremental = acc.coefficients()
    batch = a.fit_one_step(series, k)
    np.testing.assert_allclose(incremental, batch.coeffs, rtol=1e-9)


def test_h1_direct_fit_is_the_one_step_fit():
    rng = np.random.default_rng(8)
    series = rng.normal(size=70).cumsum()
    one = a.fit_one_step(series, 3)
    dir1 = a.fit_direct(series, 3, 1)
    np.testing.assert_allclose(one.coeffs, dir1.coeffs, rtol=1e-13)
    assert a.residual_mse(series, one, 1, 5) == pytest.approx(
        a.residual_mse(series, dir1, 1, 5), rel=1e-13)


def test_residual_mse_window_and_divisor():
    rng = np.random.default_rng(3)
    series = rng.normal(size=60).cumsum()
    fit = a.fit_one_step(series, 2)
    coef = np.asarray(fit.coeffs)

    def longhand(K):
        total = 0.0
        # windows x_j(2) for j = K..n-h (1-based), targets x_{j+1}; note
        # the divisor is one less than the number of residuals.
        for j in range(K, 60):
            window = series[j - 2:j][::-1]
            total += (series[j] - coef @ window) ** 2
        return total / (60 - 1 - K)

    assert a.residual_mse(series, fit, 1, 3) == pytest.approx(
        longhand(3), rel=1e-12)
    assert a.residual_mse(series, fit, 1, 5) == pytest.approx(
        longhand(5), rel=1e-12)


def test_residual_mse_validations():
    series = np.arange(8.0)
    fit = a.fit_one_step(series, 2)
    with pytest.raises(a.WindowTooShort):
        a.residual_mse(series, fit, 1, 7)
    with pytest.raises(ValueError):
        a.residual_mse(series, fit, 2, 4)  # horizon mismatch
    with pytest.raises(ValueError):
        a.residual_mse(series, fit, 1, 1)  # cap below fitted order


def test_fitted_ma_weights_examples():
    rw = a.FittedCoefficients(coeffs=(1.0,), k=1, h=1, method=a.PLUG_IN,
                              sample_end=50)
    np.testing.assert_array_equal(a.fitted_ma_weights(rw, 5), np.ones(6))
    cubic = a.FittedCoefficients(coeffs=CUBIC, k=3, h=1, method=a.PLUG_IN,
                               sample_end=50)
    np.testing.assert_allclose(a.fitted_ma_weights(cubic, 2), (1.0, 0.9, 0.0),
                               rtol=0, atol=1e-12)
    flat = a.FittedCoefficients(coeffs=(0.0, 0.0), k=2, h=1,
                                method=a.PLUG_IN, sample_end=50)
    np.testing.assert_array_equal(a.fitted_ma_weights(flat, 3), (1, 0, 0, 0))
