"""End-to-end trajectory analyses.

``classic``
    GPA (with scaling) over every frame, tangent projection at the consensus,
    PCA.
``lc``
    Hierarchical Procrustes with OPA inner loops, displacements from each
    local reference transported to the Grand Mean with the Levi-Civita
    connection of the size-and-shape space, then GPA + PCA.
``dt``
    Hierarchical Procrustes with MOPA inner loops, the thin-plate spline from
    each local reference to each frame applied to the Grand Mean, then
    GPA + PCA.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np
from numpy.typing import NDArray

from .ordination import PcaResult, pca, tangent_project
from .shapes import Trajectory, TrajectorySet, center, gpa, hpa
from .transport import (
    TransportReport,
    dt_size_and_shape,
    grid_deviation,
    lc_transport,
    padded_bbox,
    transport_quality,
)

METHODS = ("classic", "lc", "dt")


@dataclass(frozen=True)
class PipelineConfig:
    """Pipeline selection and options.

    ``scale_in_final_pca`` defaults to on for ``classic`` and off for the
    transport pipelines, where size change is part of the strain.
    """

    method: str = "dt"
    local_ref_rule: str = "first_frame"
    scale_in_final_pca: bool | None = None
    elastic_coefficients: tuple[float, float] = (1.0, 1.0)
    with_reports: bool = True

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.local_ref_rule not in ("first_frame", "local_mean", "first", "mean"):
            raise ValueError(f"unknown local reference rule {self.local_ref_rule!r}")
        if min(self.elastic_coefficients) <= 0:
            raise ValueError("elastic coefficients must be positive")

    @property
    def scale_final(self) -> bool:
        if self.scale_in_final_pca is None:
            return self.method == "classic"
        return self.scale_in_final_pca

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "local_ref_rule": self.local_ref_rule,
            "scale_in_final_pca": self.scale_final,
            "elastic_coefficients": list(self.elastic_coefficients),
        }


@dataclass
class PipelineOutput:
    pca: PcaResult
    centered_set: TrajectorySet
    transport_reports: list[TransportReport]
    grand_mean: NDArray[np.float64]
    config: PipelineConfig
    references: NDArray[np.float64] | None = None
    metadata: dict = field(default_factory=dict)

    def score_blocks(self) -> NDArray[np.float64]:
        """PC scores reshaped to ``(bodies, frames, components)``."""
        s, n = len(self.centered_set), self.centered_set.n
        return self.pca.scores.reshape(s, n, -1)


def _labels(trajectories: TrajectorySet) -> list[tuple[str, str]]:
    return [(t.body_id, lab) for t in trajectories for lab in t.frame_labels]


def _final_pca(trajectories: TrajectorySet, frames: NDArray[np.float64], scale: bool):
    s, n, k, _ = frames.shape
    result = gpa(frames.reshape(s * n, k, 2), scale=scale)
    vectors = tangent_project(result.aligned, result.mean)
    pcs = pca(vectors, labels=_labels(trajectories), grand_mean=result.mean)
    aligned = result.aligned.reshape(s, n, k, 2)
    out = TrajectorySet(
        [Trajectory(t.body_id, a, list(t.frame_labels)) for t, a in zip(trajectories, aligned)]
    )
    return pcs, out, result.mean


def run_classic(trajectories: TrajectorySet, config: PipelineConfig | None = None) -> PipelineOutput:
    config = config or PipelineConfig("classic")
    pcs, aligned, mean = _final_pca(trajectories, trajectories.as_array(), config.scale_final)
    return PipelineOutput(pcs, aligned, [], mean, config)


def _run_transport(trajectories: TrajectorySet, config: PipelineConfig, method: str):
    h = hpa(trajectories, config.local_ref_rule, inner="opa" if method == "lc" else "mopa")
    gm = h.grand_mean
    step = lc_transport if method == "lc" else dt_size_and_shape
    reports: list[TransportReport] = []
    transported = np.empty(h.aligned.as_array().shape)
    for j, (traj, ref) in enumerate(zip(h.aligned, h.references)):
        for i, frame in enumerate(traj.frames):
            if config.with_reports:
                rep = transport_quality(ref, frame, gm, method, config.elastic_coefficients)
                reports.append(rep)
                transported[j, i] = rep.transported
            else:
                transported[j, i] = step(ref, frame, gm)
    moved = TrajectorySet(
        [Trajectory(t.body_id, center_all(f), list(t.frame_labels)) for t, f in zip(trajectories, transported)]
    )
    pcs, _, _ = _final_pca(trajectories, moved.as_array(), config.scale_final)
    return PipelineOutput(pcs, moved, reports, gm, config, references=h.references)


def center_all(frames: NDArray[np.float64]) -> NDArray[np.float64]:
    return np.array([center(f) for f in frames])


def run_lc(trajectories: TrajectorySet, config: PipelineConfig | None = None) -> PipelineOutput:
    return _run_transport(trajectories, config or PipelineConfig("lc"), "lc")


def run_dt(trajectories: TrajectorySet, config: PipelineConfig | None = None) -> PipelineOutput:
    return _run_transport(trajectories, config or PipelineConfig("dt"), "dt")


def run_pipeline(trajectories: TrajectorySet, config: PipelineConfig) -> PipelineOutput:
    runner = {"classic": run_classic, "lc": run_lc, "dt": run_dt}[config.method]
    return runner(trajectories, config)


def sequence_rms(a: NDArray[np.float64], b: NDArray[np.float64]) -> float:
    """RMS over frames of the Euclidean distance between two score sequences."""
    return float(np.sqrt(np.mean(np.sum((a - b) ** 2, axis=-1))))


def between_body_dispersion(scores: NDArray[np.float64]) -> float:
    """Mean pairwise RMS between bodies' score sequences, ``scores`` is ``(s, n, c)``."""
    pairs = list(combinations(range(len(scores)), 2))
    if not pairs:
        return 0.0
    return float(np.mean([sequence_rms(scores[a], scores[b]) for a, b in pairs]))


def score_rms(scores: NDArray[np.float64]) -> float:
    scores = np.asarray(scores)
    if scores.size == 0:
        return 0.0
    return float(np.sqrt(np.mean(np.sum(scores**2, axis=-1))))


def align_signs(scores: NDArray[np.float64], reference: NDArray[np.float64]):
    """Flip score columns to maximise correlation with ``reference`` columns.

    ``reference`` is ``(n_obs, m)``: either ground-truth parameter sequences
    or another pipeline's scores. Each score column gets the sign of its
    strongest correlation with any reference column.

    Returns:
        ``(signed_scores, signs)``.
    """
    scores = np.asarray(scores, dtype=float)
    ref = np.asarray(reference, dtype=float).reshape(len(scores), -1)
    signs = np.ones(scores.shape[1])
    R = ref - ref.mean(axis=0)
    r_norm = np.linalg.norm(R, axis=0)
    r_norm[r_norm == 0] = np.inf
    for c in range(scores.shape[1]):
        col = scores[:, c] - scores[:, c].mean()
        corr = (col @ R) / (max(np.linalg.norm(col), 1e-300) * r_norm)
        if corr.size and corr[np.argmax(np.abs(corr))] < 0:
            signs[c] = -1.0
    return scores * signs, signs


def grid_deviation_to_truth(output: PipelineOutput, truth: NDArray[np.float64], resolution: int = 10):
    """Grid RMS deviation of every transported frame from ``truth[i]``.

    ``truth`` is ``(n, k, 2)``: the reference deformation of the Grand Mean
    per frame. Grids are drawn over the padded box of the Grand Mean.
    Returns an ``(s, n)`` array.
    """
    gm = center(output.grand_mean)
    bbox = padded_bbox(gm)
    return np.array(
        [
            [grid_deviation(gm, f, t, resolution, bbox) for f, t in zip(traj.frames, truth)]
            for traj in output.centered_set
        ]
    )
