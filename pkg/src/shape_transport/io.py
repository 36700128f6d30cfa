"""Reading and writing trajectory files, results and run manifests.

JSON is the canonical trajectory format::

    {"format_version": "1", "k": 8, "n": 20,
     "bodies": [{"id": "B0", "frames": [[[x, y], ...], ...], "frame_labels": [...]}, ...]}

Floats are written with Python's shortest round-trip representation, so a
write/read cycle reproduces every coordinate bit for bit. A CSV variant with
one row per landmark (``body_id, frame_index, landmark_index, x, y``) is
accepted on input.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .errors import ParseError, SchemaError, ValidationError
from .ordination import PcaResult
from .shapes import Trajectory, TrajectorySet

FORMAT_VERSION = "1"
CSV_COLUMNS = ("body_id", "frame_index", "landmark_index", "x", "y")


def _tool_version() -> str:
    from . import __version__

    return __version__


def trajectories_to_dict(trajectories: TrajectorySet, metadata: dict | None = None) -> dict:
    out = {
        "format_version": FORMAT_VERSION,
        "k": trajectories.k,
        "n": trajectories.n,
        "bodies": [
            {
                "id": t.body_id,
                "frames": t.frames.tolist(),
                "frame_labels": list(t.frame_labels),
            }
            for t in trajectories
        ],
    }
    if metadata:
        out["metadata"] = metadata
    return out


def canonical_json(obj: Any) -> str:
    """Deterministic JSON text: sorted keys, fixed separators, trailing newline."""
    return json.dumps(obj, sort_keys=True, indent=1, separators=(",", ": "), allow_nan=False) + "\n"


def content_digest(obj: Any) -> str:
    """SHA-256 of the compact canonical JSON of ``obj``."""
    text = json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def write_json(obj: Any, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(canonical_json(obj), encoding="utf-8")
    return path


def write_trajectories(trajectories: TrajectorySet, path, metadata: dict | None = None) -> Path:
    return write_json(trajectories_to_dict(trajectories, metadata), path)


def _schema_fail(msg: str, where: str) -> SchemaError:
    return SchemaError(f"{where}: {msg}")


def trajectories_from_dict(data: Any, source: str = "<data>") -> TrajectorySet:
    """Validate a parsed JSON document and build a :class:`TrajectorySet`.

    Raises:
        SchemaError: missing keys, wrong version, ragged or non-finite data.
    """
    if not isinstance(data, dict):
        raise _schema_fail("top level must be an object", source)
    version = data.get("format_version")
    if str(version) != FORMAT_VERSION:
        raise _schema_fail(f"unsupported format_version {version!r}", source)
    bodies = data.get("bodies")
    if not isinstance(bodies, list) or not bodies:
        raise _schema_fail("'bodies' must be a non-empty list", source)
    k, n = data.get("k"), data.get("n")
    seen: set[str] = set()
    trajectories = []
    for j, body in enumerate(bodies):
        where = f"{source}: bodies[{j}]"
        if not isinstance(body, dict) or "frames" not in body or "id" not in body:
            raise _schema_fail("each body needs 'id' and 'frames'", where)
        body_id = str(body["id"])
        if body_id in seen:
            raise _schema_fail(f"duplicate body id {body_id!r}", where)
        seen.add(body_id)
        try:
            frames = np.array(body["frames"], dtype=float)
        except (TypeError, ValueError) as exc:
            raise _schema_fail(f"frames are ragged or non-numeric ({exc})", where) from None
        if frames.ndim != 3 or frames.shape[2] != 2:
            raise _schema_fail(f"frames must be n x k x 2, got shape {frames.shape}", where)
        if not np.all(np.isfinite(frames)):
            raise _schema_fail("coordinates must be finite", where)
        if n is not None and frames.shape[0] != n:
            raise _schema_fail(f"{frames.shape[0]} frames, header says n={n}", where)
        if k is not None and frames.shape[1] != k:
            raise _schema_fail(f"{frames.shape[1]} landmarks, header says k={k}", where)
        labels = body.get("frame_labels")
        try:
            trajectories.append(Trajectory(body_id, frames, labels))
        except ValidationError as exc:
            raise _schema_fail(str(exc), where) from None
    try:
        return TrajectorySet(trajectories)
    except ValidationError as exc:
        raise _schema_fail(str(exc), source) from None


def _read_json(path: Path) -> TrajectorySet:
    text = path.read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return trajectories_from_dict(data, str(path))


def _read_csv(path: Path) -> TrajectorySet:
    cells: dict[str, dict[int, dict[int, tuple[float, float]]]] = {}
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != CSV_COLUMNS:
            raise ParseError(f"{path}: line 1: header must be {','.join(CSV_COLUMNS)}")
        for row in reader:
            line = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(CSV_COLUMNS):
                raise ParseError(f"{path}: line {line}: expected 5 fields, got {len(row)}")
            body_id = row[0].strip()
            try:
                f, lm = int(row[1]), int(row[2])
                x, y = float(row[3]), float(row[4])
            except ValueError as exc:
                raise ParseError(f"{path}: line {line}: {exc}") from None
            if not (math.isfinite(x) and math.isfinite(y)):
                raise SchemaError(f"{path}: line {line}: coordinates must be finite")
            frame = cells.setdefault(body_id, {}).setdefault(f, {})
            if lm in frame:
                raise SchemaError(f"{path}: line {line}: duplicate landmark {lm} in {body_id!r} frame {f}")
            frame[lm] = (x, y)
    if not cells:
        raise SchemaError(f"{path}: no data rows")
    trajectories = []
    for body_id, frames in cells.items():
        frame_ids = sorted(frames)
        if frame_ids != list(range(len(frame_ids))):
            raise SchemaError(f"{path}: body {body_id!r} frame indices are not 0..n-1")
        grid = []
        for f in frame_ids:
            lms = sorted(frames[f])
            if lms != list(range(len(lms))):
                raise SchemaError(f"{path}: body {body_id!r} frame {f} landmark indices are not 0..k-1")
            grid.append([frames[f][i] for i in lms])
        try:
            grid_arr = np.array(grid, dtype=float)
        except ValueError:
            raise SchemaError(f"{path}: body {body_id!r} has ragged landmark counts") from None
        try:
            trajectories.append(Trajectory(body_id, grid_arr))
        except ValidationError as exc:
            raise SchemaError(f"{path}: {exc}") from None
    try:
        return TrajectorySet(trajectories)
    except ValidationError as exc:
        raise SchemaError(f"{path}: {exc}") from None


def read_trajectories(path) -> TrajectorySet:
    """Read a JSON (canonical) or CSV trajectory file, chosen by extension.

    Raises:
        ParseError: the file is not well-formed JSON/CSV.
        SchemaError: the content does not describe a rectangular, finite grid.
    """
    path = Path(path)
    if not path.exists():
        raise ParseError(f"{path}: no such file")
    if path.suffix.lower() == ".csv":
        return _read_csv(path)
    return _read_json(path)


def read_metadata(path) -> dict:
    """The optional ``metadata`` block of a JSON trajectory file."""
    path = Path(path)
    if path.suffix.lower() == ".csv":
        return {}
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    meta = data.get("metadata", {}) if isinstance(data, dict) else {}
    return meta if isinstance(meta, dict) else {}


def write_trajectories_csv(trajectories: TrajectorySet, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for t in trajectories:
            for f, frame in enumerate(t.frames):
                for i, (x, y) in enumerate(frame):
                    writer.writerow([t.body_id, f, i, repr(float(x)), repr(float(y))])
    return path


def pca_to_dict(result: PcaResult) -> dict:
    return {
        "eigenvalues": result.eigenvalues.tolist(),
        "explained_ratio": result.explained_ratio.tolist(),
        "total_variance": result.total_variance,
        "loadings": result.loadings.tolist(),
        "scores": result.scores.tolist(),
        "mean": result.mean.tolist(),
        "grand_mean": None if result.grand_mean is None else result.grand_mean.tolist(),
        "observation_labels": [list(lab) for lab in result.observation_labels],
    }


@dataclass
class RunManifest:
    """Provenance record written next to every output."""

    command: str
    seed: int | None = None
    case_id: int | None = None
    input_path: str | None = None
    config: dict = field(default_factory=dict)
    input_digest: str | None = None
    outputs: list[str] = field(default_factory=list)
    tool_version: str = field(default_factory=_tool_version)

    def to_dict(self) -> dict:
        return asdict(self)

    def write(self, path) -> Path:
        return write_json(self.to_dict(), path)
