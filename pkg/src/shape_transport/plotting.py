"""Deterministic SVG figures: PC-score plots and superimposed deformation grids.

Figures are drawn on a bare :class:`matplotlib.figure.Figure` with the SVG
canvas, a fixed hash salt and no date metadata, so identical inputs give
byte-identical files.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg", force=False)

import numpy as np
from matplotlib.backends.backend_svg import FigureCanvasSVG
from matplotlib.figure import Figure

from . import tps as _tps
from .ordination import PcaResult
from .shapes import center, opa_align
from .transport import padded_bbox

SVG_METADATA = {"Date": None, "Creator": None}
BODY_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f")


def _save(fig: Figure, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    FigureCanvasSVG(fig)
    with matplotlib.rc_context({"svg.hashsalt": "shape-transport", "svg.fonttype": "path"}):
        fig.savefig(path, format="svg", metadata=SVG_METADATA)
    return path


def _groups(result: PcaResult) -> list[tuple[str, np.ndarray]]:
    """Observation indices per body, in first-appearance order."""
    labels = result.observation_labels or [("all", str(i)) for i in range(len(result.scores))]
    order: dict[str, list[int]] = {}
    for i, lab in enumerate(labels):
        order.setdefault(str(lab[0]), []).append(i)
    return [(body, np.array(idx)) for body, idx in order.items()]


def write_pca_plot(result: PcaResult, path, title: str | None = None) -> Path:
    """PC1-PC2 scatter with one polyline per body in frame order.

    Axis labels carry the explained-variance percentages. A result with a
    single component is drawn as a 1-D strip (PC1 against frame index); an
    empty result gives an annotated blank panel.
    """
    fig = Figure(figsize=(5.5, 4.5))
    ax = fig.add_subplot(1, 1, 1)
    ratios = 100 * result.explained_ratio
    ncomp = result.n_components
    for c, (body, idx) in enumerate(_groups(result)):
        color = BODY_COLORS[c % len(BODY_COLORS)]
        if ncomp >= 2:
            xy = result.scores[idx][:, :2]
        elif ncomp == 1:
            xy = np.column_stack([result.scores[idx, 0], np.arange(len(idx))])
        else:
            continue
        ax.plot(xy[:, 0], xy[:, 1], "-", color=color, lw=1.0, label=body)
        ax.plot(xy[:, 0], xy[:, 1], "o", color=color, ms=3)
        ax.plot(xy[:1, 0], xy[:1, 1], "s", color=color, ms=5)
    if ncomp >= 2:
        ax.set_xlabel(f"PC1 ({ratios[0]:.2f}%)")
        ax.set_ylabel(f"PC2 ({ratios[1]:.2f}%)")
        ax.set_aspect("equal", adjustable="datalim")
    elif ncomp == 1:
        ax.set_xlabel(f"PC1 ({ratios[0]:.2f}%)")
        ax.set_ylabel("frame")
    else:
        ax.text(0.5, 0.5, "no variance", ha="center", va="center", transform=ax.transAxes)
    cum = float(np.sum(ratios[:2]))
    ax.set_title(title or f"PC scores, first two components {cum:.2f}%", fontsize=10)
    if ncomp:
        ax.legend(fontsize=7, frameon=False)
    ax.grid(True, lw=0.3, color="#dddddd")
    fig.tight_layout()
    return _save(fig, path)


def grid_pair(source_pair, transported_pair, resolution: int = 10, bbox=None, align: bool = True):
    """Deformation grids of two pairs sharing a source, over one bounding box.

    ``source_pair`` is ``(X, actual)`` and ``transported_pair`` is
    ``(X, transported)``; with ``align`` the transported configuration is
    OPA-aligned to the actual one first. Returns
    ``(real_lines, transported_lines, transported_config, max_deviation)``.
    """
    X, actual = center(source_pair[0]), center(source_pair[1])
    moved = center(transported_pair[1])
    if align:
        moved, _ = opa_align(moved, actual)
    bbox = padded_bbox(X) if bbox is None else bbox
    real = _tps.tps_grid(_tps.tps_fit(X, actual), bbox, resolution)
    trans = _tps.tps_grid(_tps.tps_fit(X, moved), bbox, resolution)
    dev = max(float(np.max(np.linalg.norm(a - b, axis=1))) for a, b in zip(real, trans))
    return real, trans, moved, dev


def write_grid_plot(
    source_pair, transported_pair, path, resolution: int = 10, title: str | None = None
) -> float:
    """Superimpose the real deformation grid (grey) and the transported one (green).

    Landmarks of the real deformed configuration are black, those of the
    transported one red. Returns the maximum pointwise polyline deviation.
    """
    real, trans, moved, dev = grid_pair(source_pair, transported_pair, resolution)
    actual = center(source_pair[1])
    fig = Figure(figsize=(5.0, 5.0))
    ax = fig.add_subplot(1, 1, 1)
    for line in real:
        ax.plot(line[:, 0], line[:, 1], "-", color="#9a9a9a", lw=1.2)
    for line in trans:
        ax.plot(line[:, 0], line[:, 1], "-", color="#2ca02c", lw=0.8)
    ax.plot(actual[:, 0], actual[:, 1], "o", color="black", ms=4)
    ax.plot(moved[:, 0], moved[:, 1], "o", color="#d62728", ms=3)
    ax.set_aspect("equal", adjustable="datalim")
    ax.set_axis_off()
    ax.set_title(title or f"max grid deviation {dev:.3g}", fontsize=10)
    fig.tight_layout()
    _save(fig, path)
    return dev

