"""Point forecasts from fitted coefficients and the series tail."""

from dataclasses import dataclass

import numpy as np

from .errors import InsufficientHistory


@dataclass(frozen=True)
class PredictorSpec:
    """A candidate predictor: working order, method, horizon."""

    k: int
    method: str
    h: int


@dataclass(frozen=True)
class Forecast:
    """A point forecast of x_{origin + horizon}."""

    value: float
    origin: int
    horizon: int
    spec: PredictorSpec


def predict(series, coeffs, origin=None):
    """Inner product of fitted coefficients with the regressor at origin.

    Forecasts x_{origin+h} as coeffs' x_origin(k) with x_origin(k) =
    (x_origin, ..., x_{origin-k+1})'.  The origin defaults to the series
    end; regressors are never padded with pre-sample zeros at prediction
    time (InsufficientHistory is raised instead).

    Parameters
    ----------
    series : array of float
    coeffs : FittedCoefficients
    origin : int, optional
        1-based index n of the forecast origin.

    Returns
    -------
    Forecast
    """
    series = np.asarray(series, dtype=float)
    n = series.size if origin is None else int(origin)
    if n > series.size:
        raise ValueError("origin %d exceeds series length %d" % (n, series.size))
    k = coeffs.k
    if n < k:
        raise InsufficientHistory(
            "origin %d has fewer than %d trailing observations" % (n, k))
    tail = series[n - k:n][::-1]
    value = float(np.dot(np.asarray(coeffs.coeffs, dtype=float), tail))
    return Forecast(value=value, origin=n, horizon=coeffs.h,
                    spec=PredictorSpec(k=k, method=coeffs.method, h=coeffs.h))
