"""Forecast accuracy metrics, reported in percent."""

import numpy as np

__all__ = ["smape", "nrmse"]


def _pair(y, y_hat):
    y = np.asarray(y, dtype=float)
    y_hat = np.asarray(y_hat, dtype=float)
    if y.shape != y_hat.shape or y.ndim != 1:
        raise ValueError(f"expected 1-D arrays of equal length, got {y.shape} and {y_hat.shape}")
    return y, y_hat


def smape(y, y_hat) -> float:
    """Symmetric mean absolute percentage error.

    ``(2/h) * sum |y_i - yhat_i| / (|y_i| + |yhat_i|) * 100``; a term with both
    magnitudes zero contributes 0.
    """
    y, y_hat = _pair(y, y_hat)
    denom = np.abs(y) + np.abs(y_hat)
    terms = np.divide(np.abs(y - y_hat), denom, out=np.zeros_like(denom), where=denom > 0)
    return float(2.0 / y.size * terms.sum() * 100.0)


def nrmse(y, y_hat) -> float:
    """Root mean square error normalized by the l1 mass of the truth.

    ``sqrt(h * sum (y_i - yhat_i)^2) / sum |y_i| * 100``.
    """
    y, y_hat = _pair(y, y_hat)
    denom = np.abs(y).sum()
    if denom == 0.0:
        raise ValueError("nrmse is undefined when the truth has zero l1 mass")
    return float(np.sqrt(y.size * np.sum((y - y_hat) ** 2)) / denom * 100.0)
