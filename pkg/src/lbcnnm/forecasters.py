"""Forecasting estimators: the learned convolutional model and the baselines.

All forecasters follow the scikit-learn protocol: construct with parameters,
``fit(y)`` on a 1-D history, ``predict()`` for the next ``horizon`` values.
The functional entry points below the estimators produce full
:class:`ForecastReport` records for the benchmark harness.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator

from ._validation import check_vector, round_nearest
from .augmentation import (
    avg_sample,
    cnnm_samples,
    cnnm_window_estimate,
    combine,
    exps_alphas,
    exps_samples,
    filter_by_fit,
    generation_matrix,
    line_samples,
    _drift_line,
    _smooth,
)
from .convolution import SamplingMask, TargetVector, TimeSeries
from .metrics import nrmse, smape
from .model_selection import estimate_model_size, spectral_frequency
from .solvers import AdmmConfig, lbcnnm_solve
from .transform import learn_pca, learn_pcp, learn_pcp_incomplete

__all__ = [
    "ForecastReport",
    "NaiveForecaster",
    "AverageForecaster",
    "DriftForecaster",
    "LsrForecaster",
    "ExpSForecaster",
    "CNNMForecaster",
    "LbCNNMForecaster",
    "BASELINES",
    "forecast_baseline",
    "forecast_lbcnnm",
    "forecast_multi_kernel",
    "forecast_missing",
]


@dataclass
class ForecastReport:
    """Per-series forecasting outcome plus solver and diagnostic metadata."""

    series_id: str
    method: str
    forecast: np.ndarray
    horizon: int
    smape: float | None = None
    nrmse: float | None = None
    chosen_m: int | None = None
    solver_iters: int = 0
    converged: bool = True
    flags: list = field(default_factory=list)
    diagnostics: dict | None = None

    def scored(self, truth) -> "ForecastReport":
        """Fill in the error metrics against the given truth; returns self."""
        truth = np.asarray(truth, dtype=float)
        self.smape = smape(truth, self.forecast)
        self.nrmse = nrmse(truth, self.forecast)
        return self

    def to_dict(self) -> dict:
        return {
            "series_id": self.series_id,
            "method": self.method,
            "forecast": [float(v) for v in self.forecast],
            "horizon": self.horizon,
            "smape": self.smape,
            "nrmse": self.nrmse,
            "chosen_m": self.chosen_m,
            "solver_iters": self.solver_iters,
            "converged": self.converged,
            "flags": list(self.flags),
            "diagnostics": self.diagnostics,
        }


class _HistoryForecaster(BaseEstimator):
    """Shared fit plumbing: store the validated history."""

    def fit(self, y, X=None):
        self.history_ = check_vector(y, "y")
        return self

    def _check_fitted(self):
        if not hasattr(self, "history_"):
            raise RuntimeError(f"this {type(self).__name__} instance is not fitted yet")


class NaiveForecaster(_HistoryForecaster):
    """Repeat the last observation."""

    def __init__(self, horizon: int = 1):
        self.horizon = horizon

    def predict(self) -> np.ndarray:
        self._check_fitted()
        return np.full(self.horizon, self.history_[-1])


class AverageForecaster(_HistoryForecaster):
    """Horizontal line through the mean of the last ``horizon`` observations."""

    def __init__(self, horizon: int = 1):
        self.horizon = horizon

    def predict(self) -> np.ndarray:
        self._check_fitted()
        y = self.history_
        window = y[-min(self.horizon, y.size):]
        return np.full(self.horizon, window.mean())


class DriftForecaster(_HistoryForecaster):
    """Line through the ``(l-h+1)``-th and last observations."""

    def __init__(self, horizon: int = 1):
        self.horizon = horizon

    def predict(self) -> np.ndarray:
        self._check_fitted()
        y = self.history_
        l = y.size
        j = max(1, l - self.horizon + 1)
        a1, a2 = _drift_line(y, j)
        t = np.arange(l + 1, l + self.horizon + 1)
        return a1 * t + a2


class LsrForecaster(_HistoryForecaster):
    """Least-squares line over the last ``horizon`` observations."""

    def __init__(self, horizon: int = 1):
        self.horizon = horizon

    def predict(self) -> np.ndarray:
        self._check_fitted()
        y = self.history_
        l = y.size
        window = max(3, min(self.horizon, l))
        if l < 3:
            return np.full(self.horizon, y[-1])
        t = np.arange(l - window + 1, l + 1, dtype=float)
        a1, a2 = np.polyfit(t, y[-window:], 1)
        future = np.arange(l + 1, l + self.horizon + 1)
        return a1 * future + a2


class ExpSForecaster(_HistoryForecaster):
    """Single exponential smoothing; flat continuation of the final level.

    When ``alpha`` is not given, the first entry of the frequency-selected
    parameter table is used.
    """

    def __init__(self, horizon: int = 1, alpha: float | None = None):
        self.horizon = horizon
        self.alpha = alpha

    def predict(self) -> np.ndarray:
        self._check_fitted()
        y = self.history_
        alpha = self.alpha
        if alpha is None:
            f_hat = spectral_frequency(y) if y.size >= 2 else 0.0
            alpha = exps_alphas(f_hat)[0]
        level = _smooth(y, alpha)[-1]
        return np.full(self.horizon, level)


class CNNMForecaster(_HistoryForecaster):
    """Convolutional nuclear-norm completion with the identity transform."""

    def __init__(
        self,
        horizon: int = 1,
        model_size: int | None = None,
        lam: float = 1000.0,
        cfg: AdmmConfig | None = None,
    ):
        self.horizon = horizon
        self.model_size = model_size
        self.lam = lam
        self.cfg = cfg

    def fit(self, y, X=None):
        super().fit(y)
        y, h = self.history_, self.horizon
        if y.size <= h:
            raise ValueError("history must be longer than the horizon")
        m = self.model_size or min(4 * h, y.size - 1)
        self.model_size_ = max(h + 1, min(m, y.size))
        return self

    def predict(self) -> np.ndarray:
        self._check_fitted()
        x, info = cnnm_window_estimate(
            self.history_, self.horizon, self.model_size_,
            lam=self.lam, cfg=self.cfg, return_info=True,
        )
        self.solve_info_ = info
        return x[self.model_size_ - self.horizon:]


class LbCNNMForecaster(_HistoryForecaster):
    """The full learned pipeline: size selection, augmentation, transform, solve.

    Parameters
    ----------
    horizon : int
        Number of future values to predict.
    learner : {"pcp", "pca"}
        Transform-learning algorithm.
    loss : {"l1", "l2"}
        Fit loss for the PCP learner.
    kernel_ratio : float
        Kernel size as a fraction of ``q = 2m``; 0.5 unless studying intervals.
    lam : float
        Fidelity weight of the completion program.
    model_size : int, optional
        Skip the size search and use this window length.
    augment : bool
        Build the combined training matrix; otherwise learn from the raw
        windows only.
    """

    def __init__(
        self,
        horizon: int = 1,
        learner: str = "pcp",
        loss: str = "l1",
        kernel_ratio: float = 0.5,
        lam: float = 1000.0,
        model_size: int | None = None,
        augment: bool = True,
        cfg: AdmmConfig | None = None,
    ):
        self.horizon = horizon
        self.learner = learner
        self.loss = loss
        self.kernel_ratio = kernel_ratio
        self.lam = lam
        self.model_size = model_size
        self.augment = augment
        self.cfg = cfg

    def fit(self, y, X=None):
        super().fit(y)
        y, h = self.history_, self.horizon
        if y.size <= h:
            raise ValueError("history must be longer than the horizon")
        if self.model_size is not None:
            self.model_size_ = self.model_size
            self.f_hat_ = spectral_frequency(y)
            self.search_ = None
        else:
            self.search_ = estimate_model_size(y, h, lam=self.lam, cfg=self.cfg)
            self.model_size_ = self.search_.chosen_m
            self.f_hat_ = self.search_.f_hat
        m = self.model_size_
        if m <= h or m > y.size:
            raise ValueError(f"model size {m} incompatible with l={y.size}, h={h}")
        self.training_ = self._build_training(y, h, m)
        Y = self.training_.columns
        if self.learner == "pca":
            self.transform_ = learn_pca(Y)
        elif self.learner == "pcp":
            self.transform_ = learn_pcp(Y, loss=self.loss, cfg=self.cfg)
        else:
            raise ValueError(f"unknown learner {self.learner!r}")
        return self

    def _build_training(self, y, h, m):
        G0 = generation_matrix(y, m)
        if not self.augment:
            return combine(G0, None, None, None, y.size, h, self.f_hat_)
        f_hat = self.f_hat_
        Gs = filter_by_fit(
            line_samples(y, h, m) + [avg_sample(y, h, m)], y, h, m, f_hat, mode="e_th"
        )
        Gc = cnnm_samples(y, h, m, f_hat, cfg=self.cfg)
        Ge = exps_samples(y, h, m, f_hat)
        return combine(G0, Gc, Gs, Ge, y.size, h, f_hat)

    def predict(self) -> np.ndarray:
        self._check_fitted()
        x, info = self._solve(self._kernel(), return_info=True)
        self.solve_info_ = info
        return x[self.model_size_ - self.horizon:]

    def _kernel(self) -> int:
        return max(1, min(round_nearest(self.kernel_ratio * 2 * self.model_size_), 2 * self.model_size_))

    def _solve(self, k, return_info=False):
        target = target_window(self.history_, self.horizon, self.model_size_)
        return lbcnnm_solve(
            target.values, target.mask, self.transform_, k, lam=self.lam,
            cfg=self.cfg, return_info=return_info,
        )

    def predict_interval(self, n_kernels: int = 10):
        """Entrywise min/max envelope over forecasts at multiple kernel sizes.

        Runs the solve for ``k = q/n, 2q/n, ..., q`` and returns
        ``(lower, upper, per_kernel)`` restricted to the horizon.
        """
        self._check_fitted()
        m, h, q = self.model_size_, self.horizon, 2 * self.model_size_
        per_kernel = {}
        for j in range(1, n_kernels + 1):
            k = max(1, min(round_nearest(j * q / n_kernels), q))
            x = self._solve(k)
            per_kernel[k] = x[m - h:]
        stack = np.vstack(list(per_kernel.values()))
        return stack.min(axis=0), stack.max(axis=0), per_kernel


def target_window(y: np.ndarray, h: int, m: int) -> TargetVector:
    """The length-``m`` completion target: last ``m - h`` observations
    followed by ``h`` unknowns, anchored at global position ``l + h - m + 1``."""
    values = np.zeros(m)
    values[: m - h] = y[-(m - h):]
    return TargetVector(
        values=values,
        mask=SamplingMask.observed_prefix(m, m - h),
        timeline_offset=y.size + h - m + 1,
    )


BASELINES = {
    "naive": NaiveForecaster,
    "average": AverageForecaster,
    "drift": DriftForecaster,
    "lsr": LsrForecaster,
    "exps": ExpSForecaster,
}


def _series_parts(series: TimeSeries):
    return series.values, series.horizon


def forecast_baseline(series: TimeSeries, method: str) -> ForecastReport:
    """Deterministic baseline forecast; falls back to naive on short history."""
    y, h = _series_parts(series)
    cls = BASELINES.get(method)
    if cls is None:
        raise ValueError(f"unknown baseline {method!r}")
    flags = []
    too_short = (method == "lsr" and y.size < 3) or (method == "drift" and y.size < 2)
    if too_short:
        cls, flags = NaiveForecaster, [f"degraded_to_naive: history too short for {method}"]
    forecast = cls(horizon=h).fit(y).predict()
    return ForecastReport(
        series_id=series.id, method=method, forecast=forecast, horizon=h, flags=flags
    )


def forecast_cnnm(series: TimeSeries, model_size: int | None = None,
                  cfg: AdmmConfig | None = None) -> ForecastReport:
    """Baseline convolutional completion without a learned transform."""
    y, h = _series_parts(series)
    est = CNNMForecaster(horizon=h, model_size=model_size, cfg=cfg).fit(y)
    forecast = est.predict()
    return ForecastReport(
        series_id=series.id, method="cnnm", forecast=forecast, horizon=h,
        chosen_m=est.model_size_, solver_iters=est.solve_info_.iterations,
        converged=est.solve_info_.converged,
    )


def forecast_lbcnnm(series: TimeSeries, cfg: AdmmConfig | None = None, **params) -> ForecastReport:
    """Full pipeline forecast; degrades to the naive baseline on any failure."""
    y, h = _series_parts(series)
    try:
        est = LbCNNMForecaster(horizon=h, cfg=cfg, **params).fit(y)
        forecast = est.predict()
        return ForecastReport(
            series_id=series.id, method="lbcnnm", forecast=forecast, horizon=h,
            chosen_m=est.model_size_, solver_iters=est.solve_info_.iterations,
            converged=est.solve_info_.converged,
        )
    except Exception as exc:  # degradation contract: never lose a series
        warnings.warn(f"lbcnnm failed on {series.id}: {exc}; using naive", RuntimeWarning)
        report = forecast_baseline(series, "naive")
        report.method = "lbcnnm"
        report.flags.append(f"degraded_to_naive: {exc}")
        return report


def forecast_multi_kernel(series: TimeSeries, cfg: AdmmConfig | None = None, **params):
    """Interval envelope from forecasts at kernel sizes ``0.1q .. q``.

    Returns ``(lower, upper, per_kernel, report)`` where the report carries the
    standard ``k = 0.5q`` forecast.
    """
    y, h = _series_parts(series)
    est = LbCNNMForecaster(horizon=h, cfg=cfg, **params).fit(y)
    lower, upper, per_kernel = est.predict_interval()
    report = ForecastReport(
        series_id=series.id, method="lbcnnm-multikernel",
        forecast=est.predict(), horizon=h, chosen_m=est.model_size_,
        solver_iters=est.solve_info_.iterations, converged=est.solve_info_.converged,
    )
    return lower, upper, per_kernel, report


def forecast_missing(
    series: TimeSeries,
    missing: np.ndarray,
    loss: str = "l1",
    lam: float = 1000.0,
    cfg: AdmmConfig | None = None,
) -> ForecastReport:
    """Forecast from a history with missing entries.

    Uses a fixed model size ``m = 5h``, learns the transform from the window
    matrix completed by compressive PCP, and excludes both the future and the
    masked positions inside the target window from the fidelity term.

    ``missing`` is a boolean array marking the unavailable history positions.
    """
    y, h = _series_parts(series)
    missing = np.asarray(missing, dtype=bool)
    if missing.shape != y.shape:
        raise ValueError("missing mask must match the history length")
    l = y.size
    m = min(5 * h, l - 1)
    if m <= h:
        raise ValueError("history too short for the missing-data mode")
    observed_hist = ~missing

    G0 = generation_matrix(y, m)
    window_obs = np.lib.stride_tricks.sliding_window_view(observed_hist, m).T.copy()
    model = learn_pcp_incomplete(np.where(window_obs, G0, 0.0), window_obs, loss=loss, cfg=cfg)

    target = np.zeros(m)
    target_obs = np.zeros(m, dtype=bool)
    hist_positions = np.arange(l - (m - h), l)  # 0-based history index per window slot
    target[: m - h] = np.where(observed_hist[hist_positions], y[hist_positions], 0.0)
    target_obs[: m - h] = observed_hist[hist_positions]
    if not target_obs.any():
        raise ValueError("every observation inside the target window is missing")
    x, info = lbcnnm_solve(
        target, SamplingMask.from_bool(target_obs), model,
        k=max(1, round_nearest(0.5 * 2 * m)), lam=lam, cfg=cfg, return_info=True,
    )
    return ForecastReport(
        series_id=series.id, method="lbcnnm-missing", forecast=x[m - h:], horizon=h,
        chosen_m=m, solver_iters=info.iterations, converged=info.converged,
    )
