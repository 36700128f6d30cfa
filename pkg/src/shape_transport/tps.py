"""Thin-plate splines in the plane.

The spline ``y = c + A x + W^T s(x)`` uses the kernel
``sigma(h) = ||h||^2 log ||h||`` (``sigma(0) = 0``) with no normalising
constant, so bending energies are ``trace(Y^T G11 Y)`` with ``G11`` the
bending-energy matrix of the source landmarks.

The coefficients are obtained by solving the bordered ``(k+3)`` system; the
matrices ``G11`` (k x k) and ``G21`` (3 x k) are assembled separately from
their closed form, which gives an independent route to ``W`` and
``[c^T; A^T]``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.spatial.distance import cdist, pdist

from .errors import DuplicateLandmarks, SingularSystem
from .shapes import center, pseudo_inverse

DUPLICATE_TOL = 1e-9
COND_LIMIT = 1e13


def kernel(r: ArrayLike) -> NDArray[np.float64]:
    """``r^2 log r`` applied elementwise to distances, with 0 at ``r = 0``."""
    r = np.asarray(r, dtype=float)
    out = np.zeros_like(r)
    pos = r > 0
    out[pos] = r[pos] ** 2 * np.log(r[pos])
    return out


def kernel_matrix(P: ArrayLike, X: ArrayLike) -> NDArray[np.float64]:
    """``S(P, X)`` with entries ``sigma(p_i - x_j)``."""
    return kernel(cdist(np.atleast_2d(P), np.atleast_2d(X)))


def border_matrix(X: ArrayLike) -> NDArray[np.float64]:
    """``[1_k, X]``, the affine part of the bordered system."""
    X = np.asarray(X, dtype=float)
    return np.hstack([np.ones((X.shape[0], 1)), X])


def bordered_system(X: ArrayLike) -> NDArray[np.float64]:
    X = np.asarray(X, dtype=float)
    k = X.shape[0]
    B = border_matrix(X)
    L = np.zeros((k + 3, k + 3))
    L[:k, :k] = kernel_matrix(X, X)
    L[:k, k:] = B
    L[k:, :k] = B.T
    return L


def _check_source(X: NDArray[np.float64]) -> None:
    if X.shape[0] > 1 and pdist(X).min() < DUPLICATE_TOL:
        raise DuplicateLandmarks("source landmarks closer than 1e-9 make the kernel singular")


def gamma_matrices(X: ArrayLike):
    """Closed-form ``(G11, G21)`` for source landmarks ``X``.

    ``G21 = (B^T S^-1 B)^-1 B^T S^-1`` and ``G11 = S^-1 - S^-1 B G21`` with
    ``B = [1, X]`` and ``S = S(X, X)``.
    """
    X = np.asarray(X, dtype=float)
    _check_source(X)
    S = kernel_matrix(X, X)
    B = border_matrix(X)
    try:
        S_inv_B = np.linalg.solve(S, B)
        S_inv = np.linalg.solve(S, np.eye(len(X)))
        G21 = np.linalg.solve(B.T @ S_inv_B, S_inv_B.T)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(f"TPS closed form is singular: {exc}") from exc
    G11 = S_inv - S_inv_B @ G21
    return G11, G21


@dataclass(frozen=True)
class TpsModel:
    """A fitted spline pair. ``target`` rows are reproduced at ``source`` rows."""

    source: NDArray[np.float64]
    target: NDArray[np.float64]
    c: NDArray[np.float64]
    A: NDArray[np.float64]
    W: NDArray[np.float64]
    gamma11: NDArray[np.float64]
    gamma21: NDArray[np.float64]
    bending_energy: float

    def __call__(self, points: ArrayLike) -> NDArray[np.float64]:
        return tps_eval(self, points)

    @property
    def is_affine(self) -> bool:
        return bool(np.abs(self.W).max() < 1e-10)


def tps_fit(source: ArrayLike, target: ArrayLike) -> TpsModel:
    """Interpolating thin-plate spline from ``source`` to ``target`` landmarks.

    Raises:
        DuplicateLandmarks: coincident source landmarks.
        SingularSystem: the bordered system cannot be solved reliably
            (e.g. collinear source landmarks).
    """
    X = np.asarray(source, dtype=float)
    Y = np.asarray(target, dtype=float)
    if X.shape != Y.shape or X.ndim != 2 or X.shape[1] != 2:
        raise ValueError(f"source {X.shape} and target {Y.shape} must both be (k, 2)")
    _check_source(X)
    k = X.shape[0]
    L = bordered_system(X)
    if np.linalg.cond(L) > COND_LIMIT:
        raise SingularSystem("TPS bordered system is ill-conditioned")
    rhs = np.vstack([Y, np.zeros((3, 2))])
    try:
        sol = np.linalg.solve(L, rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(str(exc)) from exc
    W, c, A = sol[:k], sol[k], sol[k + 1 :].T
    G11, G21 = gamma_matrices(X)
    energy = max(0.0, float(np.trace(Y.T @ G11 @ Y)))
    return TpsModel(X.copy(), Y.copy(), c, A, W, G11, G21, energy)


def tps_eval(model: TpsModel, points: ArrayLike) -> NDArray[np.float64]:
    P = np.atleast_2d(np.asarray(points, dtype=float))
    return model.c + P @ model.A.T + kernel_matrix(P, model.source) @ model.W


def grid_lines(bbox, resolution: int, samples: int | None = None) -> list[NDArray[np.float64]]:
    """Rectilinear grid over ``bbox = (xmin, ymin, xmax, ymax)``.

    Returns ``resolution`` horizontal then ``resolution`` vertical polylines,
    each sampled at ``samples`` points (default ``8 * (resolution - 1) + 1``).
    """
    if resolution < 2:
        raise ValueError("grid resolution must be at least 2")
    xmin, ymin, xmax, ymax = map(float, bbox)
    samples = samples or 8 * (resolution - 1) + 1
    xs, ys = np.linspace(xmin, xmax, resolution), np.linspace(ymin, ymax, resolution)
    xt, yt = np.linspace(xmin, xmax, samples), np.linspace(ymin, ymax, samples)
    lines = [np.column_stack([xt, np.full(samples, y)]) for y in ys]
    lines += [np.column_stack([np.full(samples, x), yt]) for x in xs]
    return lines


def tps_grid(model: TpsModel, bbox, resolution: int, samples: int | None = None):
    """Deform a rectilinear grid covering ``bbox`` through the spline."""
    return [tps_eval(model, line) for line in grid_lines(bbox, resolution, samples)]


def gamma3(model: TpsModel, destination: ArrayLike) -> NDArray[np.float64]:
    """Linear map sending displacements at the model source to the destination.

    ``G3 = Y X^+ (I - C S(X, X) G11) + C S(Y, X) G11`` with ``X`` the centred
    source and ``Y`` the centred destination. For a centred displacement
    ``V`` at ``X`` the spline-transported displacement at ``Y`` is ``G3 @ V``.
    """
    X = center(model.source)
    Y = center(destination)
    if Y.shape != X.shape:
        raise ValueError("destination must have the same landmark count as the source")
    k = X.shape[0]
    C = np.eye(k) - np.full((k, k), 1.0 / k)
    # G11 is translation invariant, so the model's matrix serves the centred source.
    G11 = model.gamma11
    return (
        Y @ pseudo_inverse(X) @ (np.eye(k) - C @ kernel_matrix(X, X) @ G11)
        + C @ kernel_matrix(Y, X) @ G11
    )


def bending_energy_of(source: ArrayLike, deformed: ArrayLike) -> float:
    """Minimised bending energy of the spline taking ``source`` to ``deformed``."""
    X = np.asarray(source, dtype=float)
    D = np.asarray(deformed, dtype=float) - X
    G11, _ = gamma_matrices(X)
    return max(0.0, float(np.trace(D.T @ G11 @ D)))


def bending_metric(source: ArrayLike, U: ArrayLike, V: ArrayLike, gamma11=None) -> float:
    """Sub-Riemannian bending metric ``trace(U^T G11 V)`` at ``source``."""
    G11 = gamma_matrices(source)[0] if gamma11 is None else gamma11
    return float(np.trace(np.asarray(U).T @ G11 @ np.asarray(V)))
