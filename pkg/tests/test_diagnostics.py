import math

import numpy as np
import pytest

from lbcnnm.convolution import conv_matrix
from lbcnnm.diagnostics import (
    coherence,
    coherence_report,
    generalized_conv_coherence,
    spectral_entropy,
    spectral_gini,
    spectrum_summary,
    transform_coherences,
)

rng = np.random.default_rng(5)


def reference_entropy(sv, n_bins=5):
    """Independent transcription of the binned-entropy formula."""
    smax = max(sv)
    if smax == 0:
        return 0.0
    counts = [0] * n_bins
    for v in sv:
        b = min(int(v / smax * n_bins), n_bins - 1)
        counts[b] += 1
    h = 0.0
    for c in counts:
        if c:
            p = c / len(sv)
            h -= p * math.log2(p)
    return h / math.log2(n_bins)


def reference_gini(sv):
    s = sorted(sv)
    n = len(s)
    total = sum(s)
    return 1.0 - 2.0 * sum(
        (s[k - 1] / total) * ((n - k + 0.5) / n) for k in range(1, n + 1)
    )


class TestSpectralEntropy:
    def test_identity_zero(self):
        assert spectral_entropy(np.eye(5)) == 0.0

    def test_uniform_bins_one(self):
        # two singular values per bin at the bin centers: p_i = 1/5 each
        sv = [0.1, 0.15, 0.3, 0.35, 0.5, 0.55, 0.7, 0.75, 0.9, 1.0]
        Z = np.diag(sv)
        assert spectral_entropy(Z) == pytest.approx(1.0)

    def test_against_reference(self):
        sv = [1.0, 0.5, 0.1, 0.0, 0.0]
        assert spectral_entropy(np.diag(sv)) == pytest.approx(reference_entropy(sv), abs=1e-12)

    def test_random_against_reference(self):
        for _ in range(20):
            Z = rng.standard_normal((6, 9))
            sv = np.linalg.svd(Z, compute_uv=False)
            assert spectral_entropy(Z) == pytest.approx(reference_entropy(sv), abs=1e-12)

    def test_all_zero(self):
        assert spectral_entropy(np.zeros((3, 4))) == 0.0

    def test_scale_invariance(self):
        Z = rng.standard_normal((7, 5))
        assert spectral_entropy(7.3 * Z) == pytest.approx(spectral_entropy(Z), abs=1e-12)


class TestSpectralGini:
    def test_uniform_is_zero(self):
        # orthogonal matrices have a flat spectrum
        Q = np.linalg.qr(rng.standard_normal((6, 6)))[0]
        assert spectral_gini(Q) == pytest.approx(0.0, abs=1e-12)

    def test_rank_one_maximal(self):
        Z = np.outer(rng.standard_normal(5), rng.standard_normal(8))
        n = 5
        assert spectral_gini(Z) == pytest.approx(1.0 - 1.0 / n, abs=1e-9)

    def test_hand_value(self):
        assert spectral_gini(np.diag([3.0, 1.0])) == pytest.approx(0.25, abs=1e-12)

    def test_against_reference(self):
        for _ in range(20):
            Z = rng.standard_normal((5, 7))
            sv = np.linalg.svd(Z, compute_uv=False)
            assert spectral_gini(Z) == pytest.approx(reference_gini(list(sv)), abs=1e-12)

    def test_all_zero_raises(self):
        with pytest.raises(ValueError):
            spectral_gini(np.zeros((3, 3)))

    def test_scale_invariance(self):
        Z = rng.standard_normal((4, 9))
        assert spectral_gini(7.3 * Z) == pytest.approx(spectral_gini(Z), abs=1e-12)


class TestCoherence:
    def test_identity(self):
        mu1, mu2 = coherence(np.eye(6))
        assert mu1 == pytest.approx(1.0)
        assert mu2 == pytest.approx(1.0)

    def test_single_entry_maximal(self):
        Z = np.zeros((5, 7))
        Z[0, 0] = 2.0
        mu1, mu2 = coherence(Z)
        assert mu1 == pytest.approx(5.0)
        assert mu2 == pytest.approx(7.0)

    def test_bounds(self):
        for _ in range(10):
            Z = rng.standard_normal((8, 6)) @ rng.standard_normal((6, 12))
            q, k = Z.shape
            U, s, Vt = np.linalg.svd(Z, full_matrices=False)
            r = int(np.sum(s > max(Z.shape) * s[0] * 1e-9))
            mu1, mu2 = coherence(Z)
            assert 1 - 1e-9 <= mu1 <= q / r + 1e-9
            assert 1 - 1e-9 <= mu2 <= k / r + 1e-9

    def test_zero_raises(self):
        with pytest.raises(ValueError):
            coherence(np.zeros((4, 4)))


def random_transform(m, seed=0):
    return np.linalg.qr(np.random.default_rng(seed).standard_normal((2 * m, m)))[0]


class TestGeneralizedConvCoherence:
    def test_identity_transform_matches_mu1(self):
        z = rng.standard_normal(10) + 5
        k = 6
        mu1, _ = coherence(conv_matrix(z, k))
        assert generalized_conv_coherence(np.eye(10), z, k) == pytest.approx(mu1, abs=1e-9)

    def test_scale_invariant(self):
        A = random_transform(8, seed=1)
        z = rng.standard_normal(8)
        a = generalized_conv_coherence(A, z, 16)
        b = generalized_conv_coherence(A, 3.7 * z, 16)
        assert a == pytest.approx(b, rel=1e-9)

    def test_zero_vector_raises(self):
        with pytest.raises(ValueError):
            generalized_conv_coherence(random_transform(5), np.zeros(5), 5)

    def test_non_orthonormal_rejected(self):
        with pytest.raises(ValueError):
            generalized_conv_coherence(np.ones((10, 5)), np.ones(5), 5)


class TestTransformCoherences:
    def test_stacked_identity(self):
        m, h = 6, 2
        A = np.concatenate([np.eye(m), np.zeros((m, m))], axis=0)
        mu_bar, mu_tilde = transform_coherences(A, h)
        assert mu_bar == pytest.approx(2 * m)
        assert mu_tilde == pytest.approx(2 * m / h)

    def test_column_permutation_of_tail(self):
        m, h = 8, 3
        A = random_transform(m, seed=2)
        _, base = transform_coherences(A, h)
        perm = A.copy()
        perm[:, m - h:] = perm[:, m - h:][:, ::-1]
        _, permuted = transform_coherences(perm, h)
        assert base == pytest.approx(permuted, abs=1e-12)

    def test_h_out_of_range(self):
        with pytest.raises(ValueError):
            transform_coherences(random_transform(4), 5)


def test_spectrum_summary_fields():
    Z = np.diag([4.0, 2.0, 0.0])
    summary = spectrum_summary(Z)
    assert summary.numerical_rank == 2
    assert 0.0 <= summary.entropy <= 1.0
    assert 0.0 <= summary.gini <= 1.0
    assert summary.singular_values.tolist() == [4.0, 2.0, 0.0]


def test_coherence_report_assembles():
    m, h, k = 6, 2, 12
    A = random_transform(m, seed=3)
    z = rng.standard_normal(m) + 10
    report = coherence_report(A, z, k, h)
    assert report.conv_rank >= 1
    for value in (report.mu1, report.mu2, report.conv_mu1, report.conv_mu2,
                  report.mu_A, report.mu_bar_A, report.mu_tilde_A):
        assert np.isfinite(value) and value >= 0.0
