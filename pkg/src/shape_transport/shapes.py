"""Landmark configurations and Procrustes alignment in the plane.

A configuration is a ``(k, 2)`` float array whose rows are landmark positions.
Rotations act on the right, ``X @ Q``, with ``Q`` a 2x2 special orthogonal
matrix; reflections are never produced.

Alignments provided:

* :func:`opa_align` -- ordinary Procrustes, minimises ``||Y Q - X||``.
* :func:`mopa_align` -- modified Procrustes, minimises ``||X^+ Y Q - I||``,
  turning the linear part of a deformation into a pure strain.
* :func:`gpa`, :func:`mgpa`, :func:`hpa` -- their many-configuration versions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import (
    DegenerateShape,
    EmptyTrajectory,
    InvalidConfiguration,
    NoConvergence,
    SingularConfiguration,
    SingularMatrix,
)

PINV_TOL = 1e-10
GPA_TOL = 1e-10
GPA_MAX_ITER = 100


def as_configuration(X: ArrayLike) -> NDArray[np.float64]:
    """Validate and convert ``X`` to a ``(k, 2)`` float array with ``k >= 3``."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != 2:
        raise InvalidConfiguration(f"expected a (k, 2) array, got shape {X.shape}")
    if X.shape[0] < 3:
        raise InvalidConfiguration(f"need at least 3 landmarks, got {X.shape[0]}")
    if not np.all(np.isfinite(X)):
        raise InvalidConfiguration("configuration contains non-finite coordinates")
    return X


def rotation(theta: float) -> NDArray[np.float64]:
    """Rotation matrix acting on row vectors, ``x @ rotation(t)`` turns x by t."""
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, s], [-s, c]])


def center(X: ArrayLike) -> NDArray[np.float64]:
    """Remove the centroid, i.e. return ``C X`` with ``C = I - 11^T/k``."""
    X = np.asarray(X, dtype=float)
    return X - X.mean(axis=0)


def centroid_size(X: ArrayLike) -> float:
    return float(np.linalg.norm(center(X)))


def pre_shape(X: ArrayLike) -> NDArray[np.float64]:
    Xc = center(X)
    size = np.linalg.norm(Xc)
    if size == 0:
        raise DegenerateShape("cannot scale a point-mass configuration")
    return Xc / size


def pseudo_inverse(X: ArrayLike) -> NDArray[np.float64]:
    """Left pseudo-inverse ``(X^T X)^{-1} X^T`` of a ``(k, 2)`` configuration.

    Raises:
        SingularConfiguration: if the smallest singular value of ``X`` falls
            below ``1e-10`` times the largest (collinear landmarks).
    """
    X = np.asarray(X, dtype=float)
    s = np.linalg.svd(X, compute_uv=False)
    if s[0] == 0 or s[-1] < PINV_TOL * s[0]:
        raise SingularConfiguration(
            f"configuration is rank deficient (singular values {s})"
        )
    return np.linalg.solve(X.T @ X, X.T)


def polar_rotation(M: ArrayLike) -> NDArray[np.float64]:
    """Special orthogonal factor of the polar decomposition of ``M``.

    With ``M = U S V^T`` the factor is ``U D V^T`` where ``D = diag(1, det(U V^T))``
    flips the weakest singular direction if needed so that the result is a
    proper rotation.
    """
    M = np.asarray(M, dtype=float)
    U, s, Vt = np.linalg.svd(M)
    if s[0] == 0 or s[-1] <= 1e-14 * s[0]:
        raise SingularMatrix(f"matrix is numerically singular (singular values {s})")
    D = np.diag([1.0, np.sign(np.linalg.det(U @ Vt))])
    return U @ D @ Vt


def opa_align(moving: ArrayLike, target: ArrayLike):
    """Rotate ``moving`` onto ``target`` (both centred) by ordinary Procrustes.

    Returns:
        ``(moving @ Q, Q)`` where ``Q`` minimises ``||moving Q - target||``
        over SO(2). ``Q`` is the transpose of the rotational polar factor of
        ``target^T moving``.
    """
    Y = np.asarray(moving, dtype=float)
    X = np.asarray(target, dtype=float)
    Q = polar_rotation(X.T @ Y).T
    return Y @ Q, Q


def mopa_align(moving: ArrayLike, reference: ArrayLike):
    """Rotate ``moving`` so that its linear map from ``reference`` is a strain.

    The rotation maximises ``trace(X^+ Y Q)`` with ``X = reference`` and
    ``Y = moving``; afterwards ``X^+ (Y Q)`` is symmetric.
    """
    Y = np.asarray(moving, dtype=float)
    F = pseudo_inverse(reference) @ Y
    Q = polar_rotation(F).T
    return Y @ Q, Q


def size_and_shape_distance(a: ArrayLike, b: ArrayLike) -> float:
    A, B = center(a), center(b)
    aligned, _ = opa_align(B, A)
    return float(np.linalg.norm(aligned - A))


def procrustes_distance(a: ArrayLike, b: ArrayLike) -> float:
    """Geodesic Procrustes distance, in ``[0, pi/2]``.

    Uses the law of cosines on centroid sizes ``S1``, ``S2`` and the
    size-and-shape distance ``d``: ``arccos((S1^2 + S2^2 - d^2) / (2 S1 S2))``.
    """
    s1, s2 = centroid_size(a), centroid_size(b)
    tiny = np.finfo(float).tiny
    if s1 <= tiny or s2 <= tiny:
        raise DegenerateShape("Procrustes distance needs positive centroid sizes")
    d = size_and_shape_distance(a, b)
    cos_rho = (s1**2 + s2**2 - d**2) / (2 * s1 * s2)
    return float(np.arccos(np.clip(cos_rho, -1.0, 1.0)))


@dataclass
class GpaResult:
    """Output of :func:`gpa`.

    Attributes:
        aligned: aligned configurations, shape ``(N, k, 2)``.
        mean: the consensus (Grand Mean), shape ``(k, 2)``.
        rotations: ``(N, 2, 2)``; ``aligned[i] == start[i] @ rotations[i]`` where
            ``start`` are the centred (and, if requested, unit-size) inputs.
        residuals: sum of squared distances to the mean after each iteration.
    """

    aligned: NDArray[np.float64]
    mean: NDArray[np.float64]
    rotations: NDArray[np.float64]
    residuals: list[float] = field(default_factory=list)

    @property
    def iterations(self) -> int:
        return len(self.residuals)


def _stack(configs) -> NDArray[np.float64]:
    arr = np.asarray(configs, dtype=float)
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise InvalidConfiguration(f"expected (N, k, 2) configurations, got {arr.shape}")
    return arr


def gpa(
    configs,
    scale: bool = False,
    tol: float = GPA_TOL,
    max_iter: int = GPA_MAX_ITER,
) -> GpaResult:
    """Generalized Procrustes analysis (rotations only, no reflections).

    Configurations are centred and, when ``scale`` is true, brought to unit
    centroid size; the mean is then re-estimated until it moves by less than
    ``tol`` (Frobenius norm). With ``scale`` the mean is kept at unit size.

    Raises:
        NoConvergence: if ``max_iter`` iterations are not enough.
    """
    X = _stack(configs)
    if X.shape[0] < 2:
        raise InvalidConfiguration("GPA needs at least two configurations")
    X = X - X.mean(axis=1, keepdims=True)
    if scale:
        sizes = np.linalg.norm(X, axis=(1, 2))
        if np.any(sizes == 0):
            raise DegenerateShape("cannot scale a point-mass configuration")
        X = X / sizes[:, None, None]

    def align_all(mean):
        rots = np.array([polar_rotation(mean.T @ Xi).T for Xi in X])
        return np.einsum("nkd,nde->nke", X, rots), rots

    mean = X[0].copy()
    residuals: list[float] = []
    for _ in range(max_iter):
        aligned, rots = align_all(mean)
        new_mean = aligned.mean(axis=0)
        if scale:
            new_mean /= np.linalg.norm(new_mean)
        residuals.append(float(np.sum((aligned - new_mean) ** 2)))
        moved = np.linalg.norm(new_mean - mean)
        mean = new_mean
        if moved < tol:
            break
    else:
        raise NoConvergence(
            f"GPA did not converge in {max_iter} iterations (last move {moved:.3e})",
            residual=residuals[-1],
        )
    aligned, rots = align_all(mean)
    return GpaResult(aligned=aligned, mean=mean, rotations=rots, residuals=residuals)


def mgpa(configs, reference: ArrayLike) -> NDArray[np.float64]:
    """MOPA-align every configuration to a fixed reference.

    The reference never moves, so a single pass is already the fixed point.
    """
    ref = center(reference)
    X = _stack(configs)
    return np.array([mopa_align(center(Xi), ref)[0] for Xi in X])


@dataclass
class Trajectory:
    """Ordered configurations of one body; ``frames`` has shape ``(n, k, 2)``."""

    body_id: str
    frames: NDArray[np.float64]
    frame_labels: list[str] | None = None

    def __post_init__(self):
        frames = np.asarray(self.frames, dtype=float)
        if frames.ndim != 3 or frames.shape[0] == 0:
            raise EmptyTrajectory(f"trajectory {self.body_id!r} has no frames")
        if frames.shape[2] != 2 or frames.shape[1] < 3:
            raise InvalidConfiguration(
                f"trajectory {self.body_id!r}: frames must be (n, k>=3, 2), got {frames.shape}"
            )
        if frames.shape[0] < 2:
            raise EmptyTrajectory(f"trajectory {self.body_id!r} needs at least 2 frames")
        if not np.all(np.isfinite(frames)):
            raise InvalidConfiguration(f"trajectory {self.body_id!r} has non-finite values")
        self.frames = frames
        if self.frame_labels is None:
            self.frame_labels = [str(i) for i in range(frames.shape[0])]
        elif len(self.frame_labels) != frames.shape[0]:
            raise InvalidConfiguration(
                f"trajectory {self.body_id!r}: {len(self.frame_labels)} labels "
                f"for {frames.shape[0]} frames"
            )
        self.frame_labels = [str(label) for label in self.frame_labels]

    @property
    def n(self) -> int:
        return self.frames.shape[0]

    @property
    def k(self) -> int:
        return self.frames.shape[1]


@dataclass
class TrajectorySet:
    """Several trajectories on a common, homologous frame grid."""

    trajectories: list[Trajectory]

    def __post_init__(self):
        if not self.trajectories:
            raise EmptyTrajectory("a trajectory set needs at least one trajectory")
        k, n = self.trajectories[0].k, self.trajectories[0].n
        for traj in self.trajectories:
            if traj.k != k or traj.n != n:
                raise InvalidConfiguration(
                    f"trajectory {traj.body_id!r} is {traj.n}x{traj.k}, expected {n}x{k}"
                )

    @classmethod
    def from_array(cls, frames, body_ids: Sequence[str] | None = None, frame_labels=None):
        frames = np.asarray(frames, dtype=float)
        if body_ids is None:
            body_ids = [f"B{j}" for j in range(frames.shape[0])]
        return cls([Trajectory(b, f, frame_labels) for b, f in zip(body_ids, frames)])

    def __len__(self):
        return len(self.trajectories)

    def __iter__(self):
        return iter(self.trajectories)

    @property
    def k(self) -> int:
        return self.trajectories[0].k

    @property
    def n(self) -> int:
        return self.trajectories[0].n

    @property
    def body_ids(self) -> list[str]:
        return [t.body_id for t in self.trajectories]

    def as_array(self) -> NDArray[np.float64]:
        """All frames stacked as ``(s, n, k, 2)``."""
        return np.stack([t.frames for t in self.trajectories])


@dataclass
class HpaResult:
    aligned: TrajectorySet
    grand_mean: NDArray[np.float64]
    references: NDArray[np.float64]


def local_reference(frames: NDArray[np.float64], rule: str) -> NDArray[np.float64]:
    if rule in ("first_frame", "first"):
        return center(frames[0])
    if rule in ("local_mean", "mean"):
        return gpa(frames, scale=False).mean
    raise ValueError(f"unknown local reference rule {rule!r}")


def hpa(
    trajectories: TrajectorySet,
    local_ref_rule: str = "first_frame",
    inner: str = "mopa",
) -> HpaResult:
    """Hierarchical Procrustes analysis.

    1. Pick a local reference per trajectory (its first frame or its local
       GPA mean).
    2. GPA without scaling among the references gives the Grand Mean.
    3. Every frame is aligned to its own aligned reference, with MOPA
       (default) or OPA when ``inner="opa"``.
    """
    if inner not in ("mopa", "opa"):
        raise ValueError(f"inner alignment must be 'mopa' or 'opa', not {inner!r}")
    refs = np.array([local_reference(t.frames, local_ref_rule) for t in trajectories])
    if len(refs) == 1:
        aligned_refs, grand_mean = refs.copy(), refs[0].copy()
    else:
        result = gpa(refs, scale=False)
        aligned_refs, grand_mean = result.aligned, result.mean
    align = mopa_align if inner == "mopa" else opa_align
    out = []
    for traj, ref in zip(trajectories, aligned_refs):
        frames = np.array([align(center(f), ref)[0] for f in traj.frames])
        out.append(Trajectory(traj.body_id, frames, list(traj.frame_labels)))
    return HpaResult(TrajectorySet(out), grand_mean, aligned_refs)
