"""Robust low-rankness measures and coherence diagnostics.

The spectrum summaries (binned entropy, Gini) quantify how close a matrix is
to low-rank without committing to a hard rank cutoff; the coherence quantities
characterize how well the singular subspaces of convolution matrices align
with (shifted, transformed) standard bases.
"""

from dataclasses import dataclass

import numpy as np

from ._validation import check_matrix, check_vector
from .convolution import conv_matrix, numerical_rank

__all__ = [
    "SpectrumSummary",
    "CoherenceReport",
    "spectral_entropy",
    "spectral_gini",
    "spectrum_summary",
    "coherence",
    "generalized_conv_coherence",
    "transform_coherences",
    "coherence_report",
]

N_ENTROPY_BINS = 5


@dataclass(frozen=True)
class SpectrumSummary:
    singular_values: np.ndarray
    entropy: float
    gini: float
    numerical_rank: int


@dataclass(frozen=True)
class CoherenceReport:
    mu1: float
    mu2: float
    conv_mu1: float
    conv_mu2: float
    mu_A: float
    mu_bar_A: float
    mu_tilde_A: float
    conv_rank: int


def spectral_entropy(Z, n_bins: int = N_ENTROPY_BINS) -> float:
    """Binned entropy of the full singular-value vector, normalized to [0, 1].

    All ``min(Z.shape)`` singular values (zeros included) are partitioned into
    ``n_bins`` equal-width bins over ``[0, sigma_max]``; values equal to
    ``sigma_max`` land in the top bin. Smaller means closer to low-rank.
    """
    Z = check_matrix(Z)
    s = np.linalg.svd(Z, compute_uv=False)
    if s[0] == 0.0:
        return 0.0
    counts, _ = np.histogram(s, bins=n_bins, range=(0.0, s[0]))
    p = counts / s.size
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum() / np.log2(n_bins))


def spectral_gini(Z) -> float:
    """Gini index of the singular-value vector; larger means closer to low-rank.

    Uses the sparsity-measure form on the ascending values ``s_(1..N)``:
    ``1 - 2 * sum_k (s_(k) / ||s||_1) * ((N - k + 1/2) / N)``.
    """
    Z = check_matrix(Z)
    s = np.sort(np.linalg.svd(Z, compute_uv=False))
    total = s.sum()
    if total == 0.0:
        raise ValueError("spectral Gini is undefined for the all-zero matrix")
    n = s.size
    k = np.arange(1, n + 1)
    return float(1.0 - 2.0 * np.sum((s / total) * ((n - k + 0.5) / n)))


def spectrum_summary(Z) -> SpectrumSummary:
    Z = check_matrix(Z)
    s = np.linalg.svd(Z, compute_uv=False)
    return SpectrumSummary(
        singular_values=s,
        entropy=spectral_entropy(Z),
        gini=spectral_gini(Z),
        numerical_rank=numerical_rank(Z),
    )


def _skinny_svd(Z):
    U, s, Vt = np.linalg.svd(Z, full_matrices=False)
    if s[0] == 0.0:
        raise ValueError("coherence is undefined for the zero matrix")
    r = int(np.sum(s > max(Z.shape) * s[0] * 1e-9))
    return U[:, :r], Vt[:r].T, r


def coherence(Z) -> tuple[float, float]:
    """Row/column coherences ``(mu1, mu2)`` of a matrix at its numerical rank.

    ``mu1 = (q/r) max_i ||U^T e_i||^2`` over rows and
    ``mu2 = (k/r) max_j ||V^T e_j||^2`` over columns, for ``Z`` of size
    ``q x k`` with skinny SVD ``U S V^T`` at numerical rank ``r``.
    """
    Z = check_matrix(Z)
    U, V, r = _skinny_svd(Z)
    q, k = Z.shape
    mu1 = q / r * float(np.max(np.sum(U * U, axis=1)))
    mu2 = k / r * float(np.max(np.sum(V * V, axis=1)))
    return mu1, mu2


def _transform_array(A) -> np.ndarray:
    A = np.asarray(getattr(A, "A", A), dtype=float)
    q, m = A.shape
    if np.max(np.abs(A.T @ A - np.eye(m))) > 1e-6:
        raise ValueError("transform must have orthonormal columns")
    return A


def generalized_conv_coherence(A, z, k: int) -> float:
    """First generalized convolution coherence of ``z`` under transform ``A``.

    With ``U`` spanning the column space of the convolution matrix of ``A z``
    at numerical rank ``r``, returns ``(q/r)`` times the largest squared norm
    of ``U^T T^j A e_i`` over all row shifts ``j`` in ``[0, k)`` and columns
    ``i`` of ``A``.
    """
    A = _transform_array(A)
    z = check_vector(z)
    if not np.any(z):
        raise ValueError("z must be nonzero")
    C = conv_matrix(A @ z, k)
    U, _, r = _skinny_svd(C)
    q = A.shape[0]
    best = 0.0
    for j in range(k):
        # U^T T^j A  ==  (T^{-j} U)^T A
        G = np.roll(U, -j, axis=0).T @ A
        best = max(best, float(np.max(np.sum(G * G, axis=0))))
    return q / r * best


def transform_coherences(A, h: int) -> tuple[float, float]:
    """Entrywise and last-``h``-column coherences of the transform matrix.

    ``mu_bar = q * max_ij |A_ij|^2`` measures entry disparity;
    ``mu_tilde = (q/h) * max_i || row i of the last h columns ||^2`` restricts
    to the columns hit by the unobserved future in the standard setup.
    """
    A = _transform_array(A)
    q, m = A.shape
    if not 1 <= h <= m:
        raise ValueError(f"h must lie in [1, {m}]")
    mu_bar = q * float(np.max(A * A))
    tail = A[:, m - h:]
    mu_tilde = q / h * float(np.max(np.sum(tail * tail, axis=1)))
    return mu_bar, mu_tilde


def coherence_report(A, z, k: int, h: int) -> CoherenceReport:
    """Assemble every coherence quantity for a transformed signal.

    ``mu1``/``mu2`` are the convolution coherences of the raw series; the
    ``conv_*`` entries are those of the transformed signal ``A z``.
    """
    A = _transform_array(A)
    z = check_vector(z)
    C = conv_matrix(A @ z, k)
    conv_mu1, conv_mu2 = coherence(C)
    mu1, mu2 = coherence(conv_matrix(z, min(k, z.size)))
    mu_bar, mu_tilde = transform_coherences(A, h)
    return CoherenceReport(
        mu1=mu1,
        mu2=mu2,
        conv_mu1=conv_mu1,
        conv_mu2=conv_mu2,
        mu_A=generalized_conv_coherence(A, z, k),
        mu_bar_A=mu_bar,
        mu_tilde_A=mu_tilde,
        conv_rank=numerical_rank(C),
    )
