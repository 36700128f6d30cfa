"""Transport of deformations between configurations.

Two mechanisms are implemented:

* Levi-Civita parallel transport on the planar size-and-shape space, in its
  closed form along the straight (horizontal) geodesic between two aligned
  configurations, using the complex representation ``x + iy`` per landmark.
* Direct Transport: the linear part ``X^+ X'`` of a pointpair is applied to
  the destination (exact for affine deformations), or the thin-plate spline
  of the pair is extrapolated to the destination landmarks.

All functions centre their inputs; outputs are centred configurations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from . import tps as _tps
from .errors import AntipodalConfigurations
from .shapes import center, mopa_align, opa_align, pseudo_inverse

ANTIPODAL_TOL = 1e-12
REAL_TOL = 1e-8


def to_complex(X: ArrayLike) -> NDArray[np.complex128]:
    X = np.asarray(X, dtype=float)
    return X[:, 0] + 1j * X[:, 1]


def from_complex(z: ArrayLike) -> NDArray[np.float64]:
    z = np.asarray(z)
    return np.column_stack([z.real, z.imag])


def horizontal_part(mu: ArrayLike, w: ArrayLike) -> NDArray[np.complex128]:
    """Remove from ``w`` its vertical (rotational) component at ``mu``."""
    mu, w = np.asarray(mu), np.asarray(w)
    return w - 1j * np.vdot(mu, w).imag / np.vdot(mu, mu).real * mu


def lc_transport_vector(mu_a, mu_b, w_a) -> NDArray[np.complex128]:
    """Closed-form parallel transport of a horizontal vector from ``mu_a`` to ``mu_b``.

    ``mu_a`` and ``mu_b`` must be centred and aligned (``<mu_a, mu_b>`` real)
    and ``w_a`` horizontal at ``mu_a``. ``<u, v>`` is ``sum(conj(u) * v)``.
    Works on the last axis, so batches of shape ``(..., k)`` are accepted.

    Raises:
        AntipodalConfigurations: if ``<mu_a, mu_b> + |mu_a||mu_b|`` vanishes.
    """
    mu_a, mu_b, w_a = (np.asarray(v, dtype=complex) for v in (mu_a, mu_b, w_a))
    na = np.linalg.norm(mu_a, axis=-1, keepdims=True)
    nb = np.linalg.norm(mu_b, axis=-1, keepdims=True)
    inner_ab = np.sum(np.conj(mu_a) * mu_b, axis=-1, keepdims=True)
    denom = (inner_ab + na * nb) * nb
    if np.any(np.abs(denom) < ANTIPODAL_TOL):
        raise AntipodalConfigurations("geodesic between the configurations is undefined")
    im_bw = np.sum(np.conj(mu_b) * w_a, axis=-1, keepdims=True).imag
    return w_a - 1j * (im_bw / denom) * (nb * mu_a + na * mu_b)


def lc_transport(source: ArrayLike, deformed: ArrayLike, destination: ArrayLike):
    """Levi-Civita transport of the displacement ``deformed - source`` to ``destination``.

    The destination is first OPA-aligned to the source so that the complex
    inner product of the two is real; the transported vector is added and the
    result is rotated back into the destination's own frame. The pair itself
    is used as given: for an isometric transport the displacement should be
    horizontal, which holds when ``deformed`` is OPA-aligned to ``source``.
    """
    X, Xp, Y = center(source), center(deformed), center(destination)
    Ya, Q = opa_align(Y, X)
    mu_a, mu_b = to_complex(X), to_complex(Ya)
    inner = np.vdot(mu_a, mu_b)
    if abs(inner.imag) > REAL_TOL * max(np.linalg.norm(mu_a) * np.linalg.norm(mu_b), 1.0):
        raise AntipodalConfigurations("could not align destination to source")
    w_b = lc_transport_vector(mu_a, mu_b, to_complex(Xp - X))
    return (Ya + from_complex(w_b)) @ Q.T


def dt_affine(source: ArrayLike, deformed: ArrayLike, destination: ArrayLike):
    """Apply the linear part of the pair to the destination, ``Y X^+ X'``."""
    X, Xp, Y = center(source), center(deformed), center(destination)
    return Y @ pseudo_inverse(X) @ Xp


def dt_pointpair(source: ArrayLike, deformed: ArrayLike, destination: ArrayLike):
    """Extrapolate the thin-plate spline of the pair to the destination landmarks."""
    X, Xp, Y = center(source), center(deformed), center(destination)
    model = _tps.tps_fit(X, Xp)
    return center(_tps.tps_eval(model, Y))


def align_pair_to(source: ArrayLike, deformed: ArrayLike, destination: ArrayLike):
    """Select aligned representatives of a pair for transport to ``destination``.

    The source is OPA-aligned to the destination, then the deformed
    configuration is MOPA-aligned to the aligned source.
    """
    X, Xp, Y = center(source), center(deformed), center(destination)
    Xa, _ = opa_align(X, Y)
    Xpa, _ = mopa_align(Xp, Xa)
    return Xa, Xpa


def dt_size_and_shape(
    source: ArrayLike, deformed: ArrayLike, destination: ArrayLike, affine: bool = False
):
    """Direct Transport between size-and-shapes.

    After :func:`align_pair_to` the spline transport (or, with
    ``affine=True``, the purely linear one) is applied. The result does not
    depend on the rotations of the incoming pair.
    """
    Xa, Xpa = align_pair_to(source, deformed, destination)
    step = dt_affine if affine else dt_pointpair
    return step(Xa, Xpa, destination)


def affine_metric(X: ArrayLike, U: ArrayLike, V: ArrayLike) -> float:
    """``trace(U^T X^{+T} X^+ V)``; vanishes on the non-affine component."""
    P = pseudo_inverse(center(X))
    return float(np.trace((P @ np.asarray(U)).T @ (P @ np.asarray(V))))


def affine_distance(X: ArrayLike, Y: ArrayLike) -> float:
    """Squared strain ``||X^+ Y - I||^2`` relative to the change from X to Y."""
    F = pseudo_inverse(center(X)) @ center(Y)
    return float(np.sum((F - np.eye(2)) ** 2))


def elastic_metric(X: ArrayLike, U: ArrayLike, V: ArrayLike, coefficients=(1.0, 1.0)) -> float:
    """Weighted sum of the affine metric and the bending metric at ``X``."""
    mu1, mu2 = coefficients
    Xc = center(X)
    return mu1 * affine_metric(Xc, U, V) + mu2 * _tps.bending_metric(Xc, U, V)


@dataclass(frozen=True)
class EnergyReport:
    affine: float
    bending: float
    coefficients: tuple[float, float] = (1.0, 1.0)

    @property
    def total(self) -> float:
        mu1, mu2 = self.coefficients
        return mu1 * self.affine + mu2 * self.bending


def pair_energy(source: ArrayLike, deformed: ArrayLike, coefficients=(1.0, 1.0)) -> EnergyReport:
    X, Xp = center(source), center(deformed)
    return EnergyReport(
        affine_distance(X, Xp),
        _tps.bending_energy_of(X, Xp),
        tuple(float(c) for c in coefficients),
    )


@dataclass(frozen=True)
class TransportReport:
    method: str
    source_pair: tuple[NDArray[np.float64], NDArray[np.float64]]
    destination: NDArray[np.float64]
    transported: NDArray[np.float64]
    elastic_discrepancy: float
    closure_error: float | None
    source_energy: EnergyReport
    transported_energy: EnergyReport


_METHODS = {
    "lc": lc_transport,
    "dt": dt_size_and_shape,
    "dt_affine": lambda X, Xp, Y: dt_size_and_shape(X, Xp, Y, affine=True),
}


def transport(source, deformed, destination, method: str = "dt"):
    try:
        step = _METHODS[method]
    except KeyError:
        raise ValueError(f"unknown transport method {method!r}") from None
    return step(source, deformed, destination)


def transport_quality(
    source: ArrayLike,
    deformed: ArrayLike,
    destination: ArrayLike,
    method: str = "dt",
    coefficients=(1.0, 1.0),
) -> TransportReport:
    """Transport a pair and gauge how well the deformation survived.

    ``elastic_discrepancy`` is ``|g(V_X, V_X) - g(V_Y, V_Y)|`` for the elastic
    metric ``g`` evaluated at the pair source and at the destination.
    ``closure_error`` is the distance between the deformed configuration and
    its round trip (transport to the destination and back).
    """
    Y = center(destination)
    if method == "lc":
        X, Xp = center(source), center(deformed)
    else:
        X, Xp = align_pair_to(source, deformed, Y)
    Yp = transport(X, Xp, Y, method)
    g_x = elastic_metric(X, Xp - X, Xp - X, coefficients)
    g_y = elastic_metric(Y, Yp - Y, Yp - Y, coefficients)
    back = transport(Y, Yp, X, method)
    return TransportReport(
        method=method,
        source_pair=(X, Xp),
        destination=Y,
        transported=Yp,
        elastic_discrepancy=abs(g_x - g_y),
        closure_error=float(np.linalg.norm(back - Xp)),
        source_energy=pair_energy(X, Xp, coefficients),
        transported_energy=pair_energy(Y, Yp, coefficients),
    )


def padded_bbox(*configs, pad: float = 0.1):
    """Joint bounding box of configurations, enlarged by ``pad`` of its extent."""
    pts = np.vstack([np.asarray(c, dtype=float) for c in configs])
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    margin = pad * (hi - lo)
    return (*(lo - margin), *(hi + margin))


def grid_deviation(source, deformed, reference, resolution: int = 10, bbox=None, align: bool = True):
    """RMS gap between the deformation grids of ``source -> deformed`` and ``source -> reference``.

    With ``align`` the deformed configuration is first OPA-aligned to the
    reference, so that only the size-and-shape of the deformation counts.
    """
    X, Yd, Yr = center(source), center(deformed), center(reference)
    if align:
        Yd, _ = opa_align(Yd, Yr)
    bbox = padded_bbox(X) if bbox is None else bbox
    grid_d = _tps.tps_grid(_tps.tps_fit(X, Yd), bbox, resolution)
    grid_r = _tps.tps_grid(_tps.tps_fit(X, Yr), bbox, resolution)
    diff = np.vstack(grid_d) - np.vstack(grid_r)
    return float(np.sqrt(np.mean(np.sum(diff**2, axis=1))))
