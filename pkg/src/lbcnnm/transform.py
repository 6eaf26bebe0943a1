"""Learning the orthonormal transform that makes series convolutionally low-rank.

Both learners produce a ``q x m`` matrix (``q = 2m``) of the form
``A = V_F U_F^T B`` where the DFT factors supply the rotation and ``B`` is an
orthonormal sparsifier of the training matrix: the left singular basis for the
PCA route, or the solution of an l1 Procrustes fit against the stacked
low-rank/sparse split for the PCP route.
"""

import hashlib
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from ._validation import check_matrix
from .convolution import dft_rotation
from .solvers import (
    AdmmConfig,
    cpcp,
    orthonormal_fit_l1,
    orthonormal_fit_l2,
    pcp,
    sign_fixed_svd,
)

__all__ = [
    "TransformModel",
    "learn_pca",
    "learn_pcp",
    "learn_pcp_incomplete",
    "save_transform",
    "load_transform",
    "ConvolutionalTransform",
]


@dataclass(frozen=True)
class TransformModel:
    """A learned orthonormal transform plus its provenance."""

    A: np.ndarray
    method: str
    m: int
    training_fingerprint: str

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float)
        q, m = A.shape
        if m != self.m or q != 2 * m:
            raise ValueError(f"expected a 2m x m transform with m={self.m}, got {A.shape}")
        if np.max(np.abs(A.T @ A - np.eye(m))) > 1e-8:
            raise ValueError("transform columns are not orthonormal within 1e-8")
        A.setflags(write=False)
        object.__setattr__(self, "A", A)

    @property
    def q(self) -> int:
        return 2 * self.m


def _fingerprint(Y: np.ndarray) -> str:
    digest = hashlib.sha256()
    digest.update(str(Y.shape).encode())
    digest.update(np.ascontiguousarray(Y).tobytes())
    return digest.hexdigest()


def learn_pca(Y) -> TransformModel:
    """Learn the transform from the left singular basis of ``Y``.

    ``B = [U_Y^T; 0]`` with the full ``m x m`` basis; no centering or column
    normalization is applied. For ``Y`` of exact rank ``r`` every training
    column is transformed to convolution rank at most ``2 r``.
    """
    Y = check_matrix(Y)
    m = Y.shape[0]
    U, _, _ = sign_fixed_svd(Y, full_matrices=True)
    B = np.concatenate([U.T, np.zeros((m, m))], axis=0)
    A = dft_rotation(2 * m) @ B
    return TransformModel(A=A, method="pca", m=m, training_fingerprint=_fingerprint(Y))


def learn_pcp(
    Y,
    loss: str = "l1",
    lam: float | None = None,
    cfg: AdmmConfig | None = None,
) -> TransformModel:
    """Learn the transform through a low-rank plus sparse split of ``Y``.

    Runs principal component pursuit, stacks ``E = [U_L^T L; S]``, and fits an
    orthonormal ``B`` with ``B Y`` close to ``E`` (l1 by default; ``loss="l2"``
    takes the one-shot closed form). Setting ``lam`` to ``+inf`` disables the
    sparse term entirely, which reduces the construction to :func:`learn_pca`.
    """
    Y = check_matrix(Y)
    if lam is not None and np.isinf(lam):
        return learn_pca(Y)
    split = pcp(Y, lam=lam, cfg=cfg)
    if not split.converged:
        import warnings

        warnings.warn("pcp did not converge; learning from the best iterate", RuntimeWarning)
    return _finish_pcp(Y, split, loss, cfg, _fingerprint(Y))


def learn_pcp_incomplete(
    Y,
    observed,
    loss: str = "l1",
    lam: float | None = None,
    cfg: AdmmConfig | None = None,
) -> TransformModel:
    """PCP-based learning from a partially observed training matrix.

    Replaces PCP by its compressive variant, substitutes the completion
    ``L + S`` for ``Y``, and proceeds exactly as :func:`learn_pcp`.
    """
    Y = np.asarray(Y, dtype=float)
    split = cpcp(Y, observed, lam=lam, cfg=cfg)
    completed = split.L + split.S
    return _finish_pcp(completed, split, loss, cfg, _fingerprint(np.nan_to_num(completed)))


def _finish_pcp(Y, split, loss, cfg, fingerprint) -> TransformModel:
    m = Y.shape[0]
    UL, _, _ = sign_fixed_svd(split.L, full_matrices=True)
    E = np.concatenate([UL.T @ split.L, split.S], axis=0)
    if loss == "l1":
        B = orthonormal_fit_l1(Y, E, cfg=cfg)
    elif loss == "l2":
        B = orthonormal_fit_l2(Y, E)
    else:
        raise ValueError(f"unknown loss {loss!r}; expected 'l1' or 'l2'")
    A = dft_rotation(2 * m) @ B
    return TransformModel(A=A, method="pcp", m=m, training_fingerprint=fingerprint)


_HEADER = "lbcnnm-transform-v1"


def save_transform(model: TransformModel, path) -> None:
    """Write a transform to a textual matrix file (row-major, headed)."""
    with open(path, "w", encoding="ascii") as fh:
        fh.write(
            f"{_HEADER} m={model.m} q={model.q} method={model.method} "
            f"fingerprint={model.training_fingerprint}\n"
        )
        np.savetxt(fh, model.A, fmt="%.18e")


def load_transform(path) -> TransformModel:
    """Read a transform written by :func:`save_transform`."""
    with open(path, encoding="ascii") as fh:
        header = fh.readline().split()
        if not header or header[0] != _HEADER:
            raise ValueError(f"{path} is not a transform file")
        fields = dict(item.split("=", 1) for item in header[1:])
        A = np.loadtxt(fh, ndmin=2)
    return TransformModel(
        A=A,
        method=fields["method"],
        m=int(fields["m"]),
        training_fingerprint=fields["fingerprint"],
    )


class ConvolutionalTransform(BaseEstimator, TransformerMixin):
    """Estimator wrapper around the transform learners.

    Samples are rows, as usual for scikit-learn: ``fit(X)`` learns from the
    ``n x m`` sample matrix (internally the learners consume its transpose)
    and ``transform(X)`` maps each row ``z`` to ``A z`` in ``R^{2m}``.

    Parameters
    ----------
    method : {"pcp", "pca"}
        Learning algorithm.
    loss : {"l1", "l2"}
        Fit loss for the PCP route.
    lam_pcp : float, optional
        Sparsity weight; ``None`` for the ``1/sqrt(max(m, n))`` default and
        ``+inf`` to fall back to PCA.
    """

    def __init__(self, method: str = "pcp", loss: str = "l1", lam_pcp: float | None = None):
        self.method = method
        self.loss = loss
        self.lam_pcp = lam_pcp

    def fit(self, X, y=None):
        X = check_matrix(X, "X")
        Y = X.T
        if self.method == "pca":
            self.model_ = learn_pca(Y)
        elif self.method == "pcp":
            self.model_ = learn_pcp(Y, loss=self.loss, lam=self.lam_pcp)
        else:
            raise ValueError(f"unknown method {self.method!r}; expected 'pca' or 'pcp'")
        return self

    def transform(self, X) -> np.ndarray:
        self._check_fitted()
        X = check_matrix(X, "X")
        return X @ self.model_.A.T

    def inverse_transform(self, Xt) -> np.ndarray:
        self._check_fitted()
        Xt = check_matrix(Xt, "Xt")
        return Xt @ self.model_.A

    def _check_fitted(self):
        if not hasattr(self, "model_"):
            raise RuntimeError("this ConvolutionalTransform instance is not fitted yet")
