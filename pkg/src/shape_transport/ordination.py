"""Tangent-space projection and covariance PCA."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import DegenerateShape

DROP_TOL = 1e-14


@dataclass
class PcaResult:
    """Principal components of a set of tangent vectors.

    ``scores`` is ``(n_obs, n_comp)`` and ``loadings`` is ``(n_comp, 2k)`` with
    orthonormal rows; ``scores == (vectors - mean) @ loadings.T``.
    """

    scores: NDArray[np.float64]
    loadings: NDArray[np.float64]
    eigenvalues: NDArray[np.float64]
    explained_ratio: NDArray[np.float64]
    mean: NDArray[np.float64]
    total_variance: float
    grand_mean: NDArray[np.float64] | None = None
    observation_labels: list = field(default_factory=list)

    @property
    def n_components(self) -> int:
        return len(self.eigenvalues)

    def cumulative_ratio(self, n: int) -> float:
        return float(np.sum(self.explained_ratio[:n]))


def tangent_project(configs, pole: ArrayLike) -> NDArray[np.float64]:
    """Orthogonally project ``vec(X_i - pole)`` onto the complement of ``vec(pole)``.

    Rows are flattened landmark-major, ``(x1, y1, x2, y2, ...)``.
    """
    p = np.asarray(pole, dtype=float).ravel()
    pp = p @ p
    if pp == 0:
        raise DegenerateShape("tangent pole has zero size")
    V = np.asarray(configs, dtype=float).reshape(len(configs), -1) - p
    return V - np.outer(V @ p, p) / pp


def pca(vectors: ArrayLike, labels=None, grand_mean=None) -> PcaResult:
    """Covariance PCA (``1/(n-1)`` normalisation).

    Components whose eigenvalue is below ``1e-14`` times the largest are
    dropped. Each loading is signed so that its largest-magnitude entry is
    positive.
    """
    V = np.asarray(vectors, dtype=float)
    if V.ndim != 2 or V.shape[0] < 2:
        raise ValueError("PCA needs at least two vectors")
    mean = V.mean(axis=0)
    D = V - mean
    cov = D.T @ D / (V.shape[0] - 1)
    evals, evecs = np.linalg.eigh(cov)
    order = np.argsort(evals)[::-1]
    evals, evecs = evals[order], evecs[:, order]
    total = float(np.trace(cov))
    top = evals[0] if evals.size else 0.0
    keep = evals > DROP_TOL * top if top > 0 else np.zeros(evals.shape, bool)
    evals, loadings = evals[keep], evecs[:, keep].T
    if loadings.size:
        pivot = np.argmax(np.abs(loadings), axis=1)
        signs = np.sign(loadings[np.arange(len(loadings)), pivot])
        loadings = loadings * signs[:, None]
    ratio = evals / evals.sum() if evals.size else evals
    return PcaResult(
        scores=D @ loadings.T,
        loadings=loadings,
        eigenvalues=evals,
        explained_ratio=ratio,
        mean=mean,
        total_variance=total,
        grand_mean=None if grand_mean is None else np.asarray(grand_mean, float),
        observation_labels=list(labels) if labels is not None else [],
    )
