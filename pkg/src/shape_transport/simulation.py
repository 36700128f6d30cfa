"""Synthetic trajectory datasets with known deformation cycles.

Reference bodies are 8-landmark outlines, deformed along closed cycles
``t -> (eps(t), gamma(t))`` of either an area-preserving affine family or a
bending family, then randomly rotated frame by frame.

Randomness comes from :func:`substream`, which derives an independent
generator for every named purpose and index tuple from one integer seed, so
results do not depend on generation order.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from itertools import combinations

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import CardinalityMismatch, SingularParameter
from .shapes import Trajectory, TrajectorySet, center, procrustes_distance, rotation

DEFAULT_SEED = 20141
GAMMA_MIN = 1e-3
N_LANDMARKS = 8

_STREAMS = {"bodies": 0, "rotations": 1}


def substream(seed: int, name: str, *index: int) -> np.random.Generator:
    """Generator for ``(name, *index)``, independent of every other key."""
    key = (_STREAMS[name], *(int(i) for i in index))
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=key))


def rotation_angle(seed: int, body: int, frame: int) -> float:
    return float(substream(seed, "rotations", body, frame).uniform(0.0, 2 * np.pi))


def affine_deformation(eps: float, gamma: float) -> NDArray[np.float64]:
    """``exp([[eps, gamma], [gamma, -eps]])`` in closed form.

    The exponent is symmetric and traceless, so its square is ``r^2 I`` with
    ``r = hypot(eps, gamma)`` and the exponential is
    ``cosh(r) I + sinh(r)/r M``. The result is symmetric with unit determinant.
    """
    M = np.array([[eps, gamma], [gamma, -eps]], dtype=float)
    r = np.hypot(eps, gamma)
    if r == 0:
        return np.eye(2)
    return np.cosh(r) * np.eye(2) + (np.sinh(r) / r) * M


def _check_gamma(gamma: float) -> None:
    if abs(gamma) < GAMMA_MIN:
        raise SingularParameter(f"|gamma| = {abs(gamma):.3g} is below {GAMMA_MIN}")


def bending_deformation(eps: float, gamma: float, points: ArrayLike) -> NDArray[np.float64]:
    """Non-uniform bending map applied to ``(x0, y0)`` points.

    ``(x, y) = (1 + gamma e^eps x0) / gamma * (sin(phi), cos(phi) - 1)`` with
    ``phi = gamma y0 e^-eps``. Every point lands on the circle of radius
    ``R = 1/gamma + e^eps x0`` centred at ``(0, -R)``.
    """
    _check_gamma(gamma)
    P = np.atleast_2d(np.asarray(points, dtype=float))
    x0, y0 = P[:, 0], P[:, 1]
    radius = (1 + gamma * np.exp(eps) * x0) / gamma
    phi = gamma * y0 * np.exp(-eps)
    return np.column_stack([radius * np.sin(phi), radius * (np.cos(phi) - 1)])


def bending_inverse(eps: float, gamma: float, points: ArrayLike) -> NDArray[np.float64]:
    """Invert :func:`bending_deformation` for points with ``y != 0``.

    Recovers ``R`` from ``x^2 + (y + R)^2 = R^2`` and the angle from
    ``(x, y + R) = R (sin phi, cos phi)``; valid while ``|phi| < pi`` and
    ``R > 0``.
    """
    _check_gamma(gamma)
    P = np.atleast_2d(np.asarray(points, dtype=float))
    x, y = P[:, 0], P[:, 1]
    radius = -(x**2 + y**2) / (2 * y)
    phi = np.arctan2(x / radius, (y + radius) / radius)
    x0 = (radius - 1 / gamma) * np.exp(-eps)
    y0 = phi * np.exp(eps) / gamma
    return np.column_stack([x0, y0])


def offset_bending_deformation(eps: float, gamma: float, points: ArrayLike) -> NDArray[np.float64]:
    """Bending map with the ``1/gamma`` offset inside the second component.

    ``(x, y) = (R sin(phi), R cos(phi) - 1/gamma)`` with
    ``R = 1/gamma + e^eps x0`` and ``phi = gamma y0 e^-eps``. Points bend
    about the fixed centre ``(0, -1/gamma)``, landmarks stay distinct and the
    map tends to the area-preserving stretch ``(y0 e^-eps, x0 e^eps)`` as
    ``gamma -> 0``.
    """
    _check_gamma(gamma)
    P = np.atleast_2d(np.asarray(points, dtype=float))
    x0, y0 = P[:, 0], P[:, 1]
    radius = 1 / gamma + np.exp(eps) * x0
    phi = gamma * y0 * np.exp(-eps)
    return np.column_stack([radius * np.sin(phi), radius * np.cos(phi) - 1 / gamma])


def offset_bending_inverse(eps: float, gamma: float, points: ArrayLike) -> NDArray[np.float64]:
    """Invert :func:`offset_bending_deformation` (valid for ``R > 0``, ``|phi| < pi``)."""
    _check_gamma(gamma)
    P = np.atleast_2d(np.asarray(points, dtype=float))
    x, y = P[:, 0], P[:, 1] + 1 / gamma
    radius, phi = np.hypot(x, y), np.arctan2(x, y)
    return np.column_stack([(radius - 1 / gamma) * np.exp(-eps), phi * np.exp(eps) / gamma])


BENDING_VARIANTS = {
    "printed": (bending_deformation, bending_inverse),
    "offset": (offset_bending_deformation, offset_bending_inverse),
}


def _bending_pair(variant: str):
    try:
        return BENDING_VARIANTS[variant]
    except KeyError:
        raise ValueError(f"unknown bending variant {variant!r}") from None


def deform(
    family: str, eps: float, gamma: float, body: ArrayLike, variant: str = "printed"
) -> NDArray[np.float64]:
    body = np.asarray(body, dtype=float)
    if family == "affine":
        return body @ affine_deformation(eps, gamma).T
    if family == "bending":
        return _bending_pair(variant)[0](eps, gamma, body)
    raise ValueError(f"unknown deformation family {family!r}")


@dataclass(frozen=True)
class CycleSpec:
    """Closed ellipse in the (eps, gamma) plane sampled at ``samples`` points.

    ``eps(t) = eps0 + a cos(2 pi t + phase)``, ``gamma(t) = gamma0 + b sin(2 pi t + phase)``
    for ``t = 0, 1/n, ..., (n-1)/n``. ``bending_variant`` picks the bending
    map (``"printed"`` or ``"offset"``) and is ignored by the affine family.
    """

    family: str = "affine"
    center: tuple[float, float] = (0.0, 0.25)
    radii: tuple[float, float] = (0.15, 0.15)
    samples: int = 20
    phase: float = 0.0
    bending_variant: str = "printed"

    def __post_init__(self):
        if self.family not in ("affine", "bending"):
            raise ValueError(f"unknown deformation family {self.family!r}")
        _bending_pair(self.bending_variant)
        if self.samples < 3:
            raise ValueError("a cycle needs at least 3 samples")
        if self.family == "bending":
            # minimum of gamma over the whole ellipse, not just the samples
            if self.center[1] - abs(self.radii[1]) <= GAMMA_MIN:
                raise SingularParameter(f"bending cycle needs gamma(t) > {GAMMA_MIN} for all t")

    def parameters(self) -> NDArray[np.float64]:
        """``(samples, 2)`` array of ``(eps, gamma)``."""
        t = np.arange(self.samples) / self.samples
        angle = 2 * np.pi * t + self.phase
        (e0, g0), (a, b) = self.center, self.radii
        return np.column_stack([e0 + a * np.cos(angle), g0 + b * np.sin(angle)])

    def with_samples(self, samples: int) -> "CycleSpec":
        return replace(self, samples=samples)

    def deform(self, eps: float, gamma: float, body: ArrayLike) -> NDArray[np.float64]:
        return deform(self.family, eps, gamma, body, self.bending_variant)

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "center": [float(v) for v in self.center],
            "radii": [float(v) for v in self.radii],
            "samples": int(self.samples),
            "phase": float(self.phase),
            "bending_variant": self.bending_variant,
        }


@dataclass(frozen=True)
class ReferenceBody:
    id: str
    config: NDArray[np.float64]


def _landmark_angles(k: int) -> NDArray[np.float64]:
    # offset by half a step: no landmark on y = 0, where the bending map
    # collapses distinct points; the set stays mirror-symmetric about the x axis
    return np.pi / k + 2 * np.pi * np.arange(k) / k


def make_reference_bodies(
    seed: int = DEFAULT_SEED,
    n_bodies: int = 5,
    k: int = N_LANDMARKS,
    amplitude: float = 0.6,
    secondary: float = 0.15,
) -> list[ReferenceBody]:
    """A regular polygon plus ``n_bodies - 1`` smooth radial perturbations of it.

    Body ``j >= 1`` has radii ``1 + w(theta)`` where ``w`` is one dominant
    cosine mode (cycling through ``+cos 2t, -cos 2t, cos t, cos 3t``) plus
    seeded secondary cosine modes of relative weight ``secondary``, rescaled
    so that ``max |w| == amplitude``. The two opposite elongations keep the
    bodies far apart in shape space.

    Only cosine modes are used, so every body is symmetric about the x axis
    with landmark ``i`` mirrored onto landmark ``k - 1 - i``. Bodies are centred.
    """
    theta = _landmark_angles(k)
    unit = np.column_stack([np.cos(theta), np.sin(theta)])
    plan = [(2, 1.0), (2, -1.0), (1, 1.0), (3, 1.0)]
    bodies = [ReferenceBody("B0", center(unit))]
    for j in range(1, n_bodies):
        mode, sign = plan[(j - 1) % len(plan)]
        rng = substream(seed, "bodies", j)
        wave = sign * np.cos(mode * theta)
        for m in (1, 2, 3):
            if m != mode:
                wave += secondary * rng.standard_normal() * np.cos(m * theta)
        wave *= amplitude / np.max(np.abs(wave))
        bodies.append(ReferenceBody(f"B{j}", center(unit * (1 + wave)[:, None])))
    return bodies


def max_pairwise_procrustes(configs) -> float:
    return max(procrustes_distance(a, b) for a, b in combinations(configs, 2))


def default_cycles(case_id: int, samples: int = 20) -> list[CycleSpec]:
    """Default cycles; cases 1-2 share one cycle, cases 3-4 use five.

    The bending cases use the offset bending map, whose gamma range here is
    ``[0.1, 0.5]`` for case 2.
    """
    if case_id == 1:
        return [CycleSpec("affine", (0.0, 0.25), (0.15, 0.15), samples)]
    if case_id == 2:
        return [CycleSpec("bending", (0.0, 0.3), (0.15, 0.2), samples, bending_variant="offset")]
    if case_id == 3:
        return [
            CycleSpec("affine", (0.05 * j - 0.1, 0.15 + 0.05 * j), (0.1 + 0.02 * j, 0.15), samples, 0.3 * j)
            for j in range(5)
        ]
    if case_id == 4:
        return [
            CycleSpec(
                "bending",
                (0.05 * j - 0.1, 0.3 + 0.05 * j),
                (0.1 + 0.02 * j, 0.15),
                samples,
                0.3 * j,
                bending_variant="offset",
            )
            for j in range(5)
        ]
    raise ValueError(f"case_id must be 1..4, got {case_id}")


@dataclass
class DatasetCase:
    """A generated dataset with its ground truth.

    ``rotations[j, i]`` is the rotation that was applied (on the right) to the
    centred deformed body ``j`` at frame ``i``.
    """

    case_id: int
    set: TrajectorySet
    ground_truth: list[CycleSpec]
    seed: int
    bodies: list[ReferenceBody] = field(default_factory=list)
    rotations: NDArray[np.float64] | None = None


def generate_case(
    case_id: int,
    cycles: list[CycleSpec] | None = None,
    bodies: list[ReferenceBody] | None = None,
    seed: int = DEFAULT_SEED,
    frames: int | None = None,
    rotate: bool = True,
) -> DatasetCase:
    """Build one of the four experimental datasets.

    Cases 1 and 2 apply one cycle to every body, cases 3 and 4 one cycle per
    body. Every generated configuration is centred and then rotated by an
    independent uniform random angle (unless ``rotate`` is false).

    Raises:
        CardinalityMismatch: wrong number of cycles for the case.
    """
    if case_id not in (1, 2, 3, 4):
        raise ValueError(f"case_id must be 1..4, got {case_id}")
    if cycles is None:
        cycles = default_cycles(case_id, frames or 20)
    elif frames is not None:
        cycles = [c.with_samples(frames) for c in cycles]
    if bodies is None:
        bodies = make_reference_bodies(seed)
    family = "affine" if case_id in (1, 3) else "bending"
    if any(c.family != family for c in cycles):
        raise CardinalityMismatch(f"case {case_id} needs {family} cycles")
    if case_id in (1, 2):
        if len(cycles) != 1:
            raise CardinalityMismatch(f"case {case_id} takes exactly one cycle, got {len(cycles)}")
        per_body = [cycles[0]] * len(bodies)
    else:
        if len(cycles) != len(bodies):
            raise CardinalityMismatch(
                f"case {case_id} needs one cycle per body ({len(bodies)}), got {len(cycles)}"
            )
        per_body = list(cycles)
    if len({c.samples for c in per_body}) != 1:
        raise CardinalityMismatch("all cycles must have the same number of samples")

    trajectories, rots = [], []
    for j, (body, cycle) in enumerate(zip(bodies, per_body)):
        params = cycle.parameters()
        body_rots = np.array(
            [rotation(rotation_angle(seed, j, i)) if rotate else np.eye(2) for i in range(len(params))]
        )
        frames_j = np.array(
            [center(cycle.deform(e, g, body.config)) @ R for (e, g), R in zip(params, body_rots)]
        )
        trajectories.append(Trajectory(body.id, frames_j, [f"{i}" for i in range(len(params))]))
        rots.append(body_rots)
    return DatasetCase(case_id, TrajectorySet(trajectories), per_body, seed, list(bodies), np.array(rots))


def low_variance_bodies(seed: int = DEFAULT_SEED, n_bodies: int = 5, amplitude: float = 0.12):
    """Reference bodies close to one another (max Procrustes distance well below 0.3)."""
    return make_reference_bodies(seed, n_bodies, amplitude=amplitude)


def _pull_back(cycle: CycleSpec, eps: float, gamma: float, points: ArrayLike) -> NDArray[np.float64]:
    if cycle.family == "affine":
        return np.asarray(points, dtype=float) @ np.linalg.inv(affine_deformation(eps, gamma)).T
    return _bending_pair(cycle.bending_variant)[1](eps, gamma, points)


def ground_truth_trajectory(case: DatasetCase, grand_mean: ArrayLike) -> NDArray[np.float64]:
    """The shared cycle applied to a virtual body whose first frame is ``grand_mean``.

    Only defined for single-cycle cases (1 and 2). The Grand Mean is taken
    back to the bodies' native frame with the rotation that best maps the
    mean of the native first frames onto it, restored to native position
    (generation centres each deformed body), pulled back through the first
    deformation of the cycle and pushed forward through every deformation
    of the cycle. Frames are returned centred in the Grand Mean's frame,
    shape ``(n, k, 2)``.
    """
    from .shapes import opa_align

    if case.case_id not in (1, 2):
        raise ValueError("ground truth of the Grand Mean needs a single shared cycle")
    cycle = case.ground_truth[0]
    params = cycle.parameters()
    e0, g0 = params[0]
    first = np.array([cycle.deform(e0, g0, b.config) for b in case.bodies])
    offset = first.mean(axis=(0, 1))
    native_mean = (first - first.mean(axis=1, keepdims=True)).mean(axis=0)
    gm = center(grand_mean)
    _, T = opa_align(native_mean, gm)
    body = _pull_back(cycle, e0, g0, gm @ T.T + offset)
    return np.array([center(cycle.deform(e, g, body)) @ T for e, g in params])
