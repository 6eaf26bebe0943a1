"""Pseudo-sample generation and training-matrix combination.

The training matrix for transform learning is assembled from up to four
blocks: sliding windows of the raw history (``G0``), straight-line forecasts
from drift and least-squares fits (``Gs``), circular shifts of a convolutional
baseline forecast (``Gc``), and exponential-smoothing curves (``Ge``). Every
pseudo-sample lives on the target window, timeline positions
``l + h - m + 1 .. l + h`` (1-based).
"""

import math
from dataclasses import dataclass

import numpy as np

from ._validation import check_vector, round_nearest
from .convolution import SamplingMask, circular_shift
from .solvers import AdmmConfig, lbcnnm_solve

__all__ = [
    "AugmentedDataMatrix",
    "PseudoSampleFilter",
    "generation_matrix",
    "window_size",
    "avg_sample",
    "line_samples",
    "fit_error",
    "pseudo_sample_filter",
    "filter_by_fit",
    "cnnm_window_estimate",
    "cnnm_samples",
    "exps_alphas",
    "exps_samples",
    "gini_threshold",
    "combine",
]


@dataclass(frozen=True)
class AugmentedDataMatrix:
    """Training columns with per-column source tags."""

    columns: np.ndarray
    sources: tuple
    n0: int
    ns: int
    nc: int
    ne: int

    def __post_init__(self):
        if self.columns.shape[1] != len(self.sources):
            raise ValueError("one source tag per column is required")
        if self.n0 + self.ns + self.nc + self.ne != self.columns.shape[1]:
            raise ValueError("block counts do not add up to the column count")


@dataclass(frozen=True)
class PseudoSampleFilter:
    """Fitting-error thresholds controlling which pseudo-samples survive."""

    e_th: float
    e_0: float
    e_max: float
    f_th: float


def generation_matrix(y, m: int) -> np.ndarray:
    """Sliding windows of the training sequence: column ``j`` is ``y[j : j+m]``."""
    y = check_vector(y)
    if m < 1 or m > y.size:
        raise ValueError(f"model size must satisfy 1 <= m <= l, got m={m}, l={y.size}")
    return np.lib.stride_tricks.sliding_window_view(y, m).T.copy()


def window_size(l: int, h: int) -> int:
    """Window length used by the drift/least-squares generators.

    ``(2.75 + 0.25 tanh(10 (l/h - 5.5))) h`` rounded, floored at 3 so the
    least-squares route has at least one window, and shrunk to ``l``.
    """
    ws = round_nearest((2.75 + 0.25 * math.tanh(10.0 * (l / h - 5.5))) * h, minimum=3)
    return min(ws, l)


def _window_positions(l: int, h: int, m: int) -> np.ndarray:
    """1-based global timeline positions covered by the target window."""
    return np.arange(l + h - m + 1, l + h + 1)


def avg_sample(y, h: int, m: int) -> np.ndarray:
    """Constant pseudo-sample at the mean of the last ``h`` observations."""
    y = check_vector(y)
    if y.size < h:
        raise ValueError("series shorter than the horizon")
    return np.full(m, y[-h:].mean())


def _line(alpha1: float, alpha2: float, l: int, h: int, m: int) -> np.ndarray:
    return alpha1 * _window_positions(l, h, m) + alpha2


def _drift_line(y, j: int) -> tuple[float, float]:
    """Slope/intercept through the ``j``-th (1-based) and last observations."""
    l = y.size
    if j == l:
        return 0.0, y[-1]
    a1 = (y[-1] - y[j - 1]) / (l - j)
    return a1, y[-1] - a1 * l


def line_samples(y, h: int, m: int) -> list[np.ndarray]:
    """Drift and least-squares line candidates on the target window, pre-filter.

    Drift draws the line between the last observation and each of the
    ``w_s - 1`` preceding ones in the window; the least-squares route fits the
    last ``j`` observations for every ``j`` in ``[3, w_s]``.
    """
    y = check_vector(y)
    l = y.size
    ws = window_size(l, h)
    out = []
    for j in range(l - ws + 1, l):
        a1, a2 = _drift_line(y, j)
        out.append(_line(a1, a2, l, h, m))
    for j in range(3, ws + 1):
        t = np.arange(l - j + 1, l + 1, dtype=float)
        a1, a2 = np.polyfit(t, y[-j:], 1)
        out.append(_line(a1, a2, l, h, m))
    return out


def fit_error(sample, y, h: int, m: int) -> float:
    """Normalized l1 error of a pseudo-sample against the last ``h`` observations.

    The sample is indexed on the target window; only the overlap of the
    window with positions ``l - h + 1 .. l`` enters the sum.
    """
    y = check_vector(y)
    l = y.size
    positions = np.arange(l - h + 1, l + 1)
    idx = positions - (l + h - m + 1)
    valid = (idx >= 0) & (idx < m)
    if not valid.any():
        return math.inf
    truth = y[positions[valid] - 1]
    approx = np.asarray(sample, dtype=float)[idx[valid]]
    denom = np.abs(truth).sum()
    if denom == 0.0:
        return math.inf
    return float(np.abs(approx - truth).sum() / denom)


def pseudo_sample_filter(y, h: int, m: int, f_hat: float) -> PseudoSampleFilter:
    """Thresholds for pseudo-sample selection at the given spectral frequency."""
    y = check_vector(y)
    l = y.size
    r = l / h
    f_th = 3.75 + 1.25 * math.tanh(r - 5) - 2.5 + 2.5 * math.tanh(16 - r)
    e_max = 0.325 + 0.025 * math.tanh(10 * (3 - r)) + 0.05 * math.tanh(f_th - f_hat)
    a1, a2 = _drift_line(y, l - h + 1)
    e_0 = max(
        fit_error(avg_sample(y, h, m), y, h, m),
        fit_error(_line(a1, a2, l, h, m), y, h, m),
    )
    return PseudoSampleFilter(e_th=min(2 * e_max - e_0, e_0), e_0=e_0, e_max=e_max, f_th=f_th)


def filter_by_fit(samples, y, h: int, m: int, f_hat: float, mode: str = "e_th"):
    """Keep the pseudo-samples whose fitting error does not exceed the threshold.

    Dropping is on strict inequality, so a sample sitting exactly on the
    threshold survives. When everything would be dropped, the single best
    sample is kept so that no block ever comes out empty.
    """
    thresholds = pseudo_sample_filter(y, h, m, f_hat)
    if mode == "e_th":
        cut = thresholds.e_th
    elif mode == "e_0":
        cut = thresholds.e_0
    else:
        raise ValueError(f"unknown threshold mode {mode!r}")
    errors = [fit_error(s, y, h, m) for s in samples]
    kept = [s for s, e in zip(samples, errors) if e <= cut]
    if not kept and samples:
        kept = [samples[int(np.argmin(errors))]]
    return kept


def cnnm_window_estimate(
    y,
    h: int,
    m: int,
    lam: float = 1000.0,
    cfg: AdmmConfig | None = None,
    return_info: bool = False,
):
    """Convolutional baseline estimate of the target window (identity transform).

    Runs the completion program with ``A = I_m`` and kernel ``0.5 m`` on the
    window whose first ``m - h`` entries are the last ``m - h`` observations.
    """
    y = check_vector(y)
    if m > y.size or m <= h:
        raise ValueError("need h < m <= l for a window estimate")
    target = np.zeros(m)
    target[: m - h] = y[-(m - h):]
    mask = SamplingMask.observed_prefix(m, m - h)
    k = max(1, round_nearest(0.5 * m))
    return lbcnnm_solve(target, mask, np.eye(m), k, lam=lam, cfg=cfg, return_info=return_info)


def cnnm_samples(y, h: int, m: int, f_hat: float, cfg: AdmmConfig | None = None):
    """All circular shifts of the baseline estimate, filtered at ``e_0``."""
    estimate = cnnm_window_estimate(y, h, m, cfg=cfg)
    shifts = [circular_shift(estimate, i) for i in range(m)]
    return filter_by_fit(shifts, y, h, m, f_hat, mode="e_0")


def exps_alphas(f_hat: float) -> tuple[float, ...]:
    """Smoothing parameters, selected by the spectral frequency of the series."""
    if f_hat > 10:
        return (0.05,)
    if f_hat > 5:
        return (0.05, 0.1)
    if f_hat > 2.5:
        return tuple(np.round(np.arange(0.5, 1.0 + 1e-9, 0.05), 10))
    if f_hat > 1.25:
        return tuple(np.round(np.arange(0.7, 1.0 + 1e-9, 0.05), 10))
    return (0.9, 0.95, 1.0)


def _smooth(y: np.ndarray, alpha: float) -> np.ndarray:
    s = np.empty_like(y)
    s[0] = y[0]
    for t in range(1, y.size):
        s[t] = alpha * y[t] + (1 - alpha) * s[t - 1]
    return s


def exps_samples(y, h: int, m: int, f_hat: float) -> list[np.ndarray]:
    """Exponential-smoothing pseudo-samples, one per selected parameter.

    Window positions inside the observed timeline carry the smoothed values at
    those positions; the ``h`` future positions carry the final smoothed level.
    """
    y = check_vector(y)
    l = y.size
    positions = _window_positions(l, h, m)
    out = []
    for alpha in exps_alphas(f_hat):
        s = _smooth(y, alpha)
        sample = np.where(positions <= l, s[np.minimum(positions, l) - 1], s[-1])
        out.append(sample)
    return out


def gini_threshold(l: int, h: int, f_hat: float) -> float:
    """Spectral-Gini cutoff above which the baseline block is discarded."""
    r = l / h
    f_th = 6.25 + 1.25 * math.tanh(r - 4) + 2.5 * math.tanh(r - 12)
    return (
        0.8
        + 0.05 * math.tanh(12 - r)
        + 0.1 * math.tanh(5 * (4 - r))
        + (0.1 + 0.1 * math.tanh(r - 12)) * math.tanh(f_th - f_hat)
    )


def _block(samples) -> np.ndarray | None:
    if samples is None:
        return None
    if isinstance(samples, np.ndarray) and samples.ndim == 2:
        return samples if samples.shape[1] else None
    if len(samples) == 0:
        return None
    return np.column_stack(samples)


def combine(G0, Gc, Gs, Ge, l: int, h: int, f_hat: float) -> AugmentedDataMatrix:
    """Concatenate the training blocks, dropping ``Gc`` for low-rank histories.

    When the spectral Gini of ``G0`` exceeds the threshold the history is
    already close to low-rank and the baseline shifts are left out; otherwise
    all four blocks are concatenated. Column order within blocks is preserved.
    """
    from .diagnostics import spectral_gini

    G0 = np.asarray(G0, dtype=float)
    blocks = [("g0", G0)]
    use_gc = spectral_gini(G0) <= gini_threshold(l, h, f_hat)
    gc = _block(Gc) if use_gc else None
    if gc is not None:
        blocks.append(("gc", gc))
    gs = _block(Gs)
    if gs is not None:
        blocks.append(("gs", gs))
    ge = _block(Ge)
    if ge is not None:
        blocks.append(("ge", ge))
    columns = np.concatenate([b for _, b in blocks], axis=1)
    sources = tuple(tag for tag, b in blocks for _ in range(b.shape[1]))
    counts = {tag: b.shape[1] for tag, b in blocks}
    return AugmentedDataMatrix(
        columns=columns,
        sources=sources,
        n0=counts.get("g0", 0),
        ns=counts.get("gs", 0),
        nc=counts.get("gc", 0),
        ne=counts.get("ge", 0),
    )
