"""Circular-convolution operators, DFT-derived orthogonal factors and projections.

All operators use the circulant boundary condition: the convolution matrix of a
length-``w`` signal with kernel size ``k`` is the ``w x k`` truncation of the
circulant matrix whose column ``j`` is the signal circularly shifted down by
``j`` positions (0-based).
"""

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from ._validation import as_bool_mask, check_matrix, check_vector

__all__ = [
    "TimeSeries",
    "SamplingMask",
    "TargetVector",
    "ConvOperator",
    "DftFactors",
    "conv_matrix",
    "conv_adjoint",
    "circular_shift",
    "dft_factors",
    "dft_rotation",
    "fourier_l1",
    "project_mask",
    "reconstruct_principal",
    "numerical_rank",
]


@dataclass(frozen=True)
class TimeSeries:
    """A finite real-valued series with an identifier and forecast horizon.

    ``shift`` records the constant added during ingestion so that reports can
    be mapped back to the original scale.
    """

    id: str
    values: np.ndarray
    horizon: int
    frequency_label: str | None = None
    shift: float = 0.0

    def __post_init__(self):
        values = check_vector(self.values, "values")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")

    @property
    def length(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class SamplingMask:
    """The set of observed entries of a length-``m`` target vector (0-based)."""

    indices: np.ndarray
    m: int

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=int)
        if idx.size == 0:
            raise ValueError("sampling mask is empty")
        if np.any(np.diff(idx) <= 0):
            raise ValueError("indices must be strictly increasing")
        if idx[0] < 0 or idx[-1] >= self.m:
            raise ValueError(f"indices out of range [0, {self.m})")
        idx.setflags(write=False)
        object.__setattr__(self, "indices", idx)

    @classmethod
    def from_bool(cls, mask) -> "SamplingMask":
        mask = np.asarray(mask, dtype=bool)
        return cls(np.flatnonzero(mask), mask.size)

    @classmethod
    def observed_prefix(cls, m: int, n_obs: int) -> "SamplingMask":
        """Standard forecasting mask: the first ``n_obs`` of ``m`` entries."""
        return cls(np.arange(n_obs), m)

    def to_bool(self) -> np.ndarray:
        out = np.zeros(self.m, dtype=bool)
        out[self.indices] = True
        return out

    @property
    def cardinality(self) -> int:
        return self.indices.size


@dataclass(frozen=True)
class TargetVector:
    """A partially observed window of the global timeline.

    ``timeline_offset`` is the 1-based global position of the window's first
    entry, equal to ``l + h - m + 1`` in the standard forecasting setup.
    """

    values: np.ndarray
    mask: SamplingMask
    timeline_offset: int

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.size != self.mask.m:
            raise ValueError("values length does not match mask dimension")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)


class ConvOperator:
    """Circular-convolution matrix operator for fixed signal/kernel sizes.

    Caches the index grids so that repeated applications (as in ADMM loops)
    cost a single fancy-indexing gather.
    """

    def __init__(self, signal_length: int, kernel_size: int):
        if not 1 <= kernel_size <= signal_length:
            raise ValueError(
                f"kernel size must satisfy 1 <= k <= w, got k={kernel_size}, w={signal_length}"
            )
        self.w = signal_length
        self.k = kernel_size
        i = np.arange(self.w)[:, None]
        j = np.arange(self.k)[None, :]
        self._gather = (i - j) % self.w      # matrix: C[i, j] = z[(i - j) % w]
        self._scatter = (i + j) % self.w     # adjoint: out[i] = sum_j Z[(i + j) % w, j]
        self._cols = np.arange(self.k)

    def matrix(self, z: np.ndarray) -> np.ndarray:
        """Convolution matrix of ``z``: column ``j`` is ``z`` shifted down by ``j``."""
        z = np.asarray(z, dtype=float)
        if z.shape != (self.w,):
            raise ValueError(f"expected signal of length {self.w}, got {z.shape}")
        return z[self._gather]

    def adjoint(self, Z: np.ndarray) -> np.ndarray:
        """Adjoint map; satisfies ``adjoint(matrix(z)) == k * z``."""
        Z = np.asarray(Z, dtype=float)
        if Z.shape != (self.w, self.k):
            raise ValueError(f"expected matrix of shape {(self.w, self.k)}, got {Z.shape}")
        return Z[self._scatter, self._cols].sum(axis=1)


def conv_matrix(z, k: int) -> np.ndarray:
    """Build the ``w x k`` circular convolution matrix of ``z``."""
    z = check_vector(z)
    return ConvOperator(z.size, k).matrix(z)


def conv_adjoint(Z) -> np.ndarray:
    """Adjoint of :func:`conv_matrix` at fixed kernel size ``Z.shape[1]``."""
    Z = check_matrix(Z)
    w, k = Z.shape
    if k > w:
        raise ValueError(f"kernel size {k} exceeds signal length {w}")
    return ConvOperator(w, k).adjoint(Z)


def circular_shift(z, s: int) -> np.ndarray:
    """Circularly shift ``z`` down by ``s`` positions (``s`` may be negative)."""
    return np.roll(np.asarray(z), s)


def _skinny_factors(M: np.ndarray, scale: float):
    """Left/right singular vectors of ``M`` restricted to its numerical rank."""
    U, s, Vt = np.linalg.svd(M, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        r = 0
    else:
        r = int(np.sum(s > max(M.shape) * s[0] * 1e-9))
    return U[:, :r], Vt[:r].T


@dataclass(frozen=True)
class DftFactors:
    """Orthogonal factors of the real and imaginary parts of the DFT matrix."""

    U_F: np.ndarray
    V_F: np.ndarray
    w: int
    split: int = field(default=0)  # number of columns coming from the real part

    def rotation(self) -> np.ndarray:
        """The orthogonal product ``V_F @ U_F.T`` used to build transforms."""
        return self.V_F @ self.U_F.T


@lru_cache(maxsize=32)
def dft_factors(w: int) -> DftFactors:
    """Factor the size-``w`` DFT matrix into orthogonal ``U_F`` and ``V_F``.

    Writes ``F = F1 + i F2`` and takes the skinny SVDs ``F1 = sqrt(w) U1 V1^T``
    and ``F2 = sqrt(w) U2 V2^T``; the factors are the horizontal concatenations
    ``[U1, U2]`` and ``[V1, V2]``, both ``w x w`` orthogonal. The projector
    ``U1 U1^T`` is the sum of a diagonal and an anti-diagonal matrix, so it at
    most doubles the support of any vector.
    """
    if w < 1:
        raise ValueError("w must be >= 1")
    F = np.fft.fft(np.eye(w))
    U1, V1 = _skinny_factors(F.real, np.sqrt(w))
    U2, V2 = _skinny_factors(F.imag, np.sqrt(w))
    if U1.shape[1] + U2.shape[1] != w:
        raise RuntimeError("rank split of the DFT factors is inconsistent")
    U_F = np.concatenate([U1, U2], axis=1)
    V_F = np.concatenate([V1, V2], axis=1)
    for M in (U_F, V_F):
        M.setflags(write=False)
    return DftFactors(U_F=U_F, V_F=V_F, w=w, split=U1.shape[1])


@lru_cache(maxsize=32)
def dft_rotation(w: int) -> np.ndarray:
    """Memoized ``V_F @ U_F.T`` for size ``w``."""
    R = dft_factors(w).rotation()
    R.setflags(write=False)
    return R


def fourier_l1(z) -> float:
    """Sum of complex magnitudes of the DFT of ``z``.

    Equals the nuclear norm of the full (``k = w``) convolution matrix of ``z``.
    """
    z = check_vector(z)
    return float(np.abs(np.fft.fft(z)).sum())


def project_mask(z, mask) -> np.ndarray:
    """Zero out the entries of ``z`` outside the sampling set; idempotent."""
    z = check_vector(z)
    keep = as_bool_mask(mask, z.size)
    return np.where(keep, z, 0.0)


def reconstruct_principal(A, z, r: int) -> np.ndarray:
    """Reconstruct ``z`` from the ``r`` largest-magnitude DFT coefficients of ``A z``.

    Returns ``A^T F^{-1}(P_[r](F(A z)))`` with the imaginary residue discarded.
    ``r = 0`` is allowed and yields the zero vector.
    """
    A = np.asarray(getattr(A, "A", A), dtype=float)
    q, m = A.shape
    z = check_vector(z)
    if z.size != m:
        raise ValueError(f"expected vector of length {m}, got {z.size}")
    if not 0 <= r <= q:
        raise ValueError(f"r must lie in [0, {q}]")
    spec = np.fft.fft(A @ z)
    if r < q:
        keep = np.argsort(-np.abs(spec), kind="stable")[:r]
        pruned = np.zeros_like(spec)
        pruned[keep] = spec[keep]
        spec = pruned
    return A.T @ np.fft.ifft(spec).real


def numerical_rank(Z) -> int:
    """Number of singular values above ``max(shape) * sigma_1 * 1e-9``."""
    Z = check_matrix(Z, allow_empty=True)
    if Z.size == 0:
        return 0
    s = np.linalg.svd(Z, compute_uv=False)
    if s[0] == 0.0:
        return 0
    return int(np.sum(s > max(Z.shape) * s[0] * 1e-9))
