# %% [markdown]
# # Transport mechanics on a single triple
#
# A small walk through the two transports on one pair and one destination:
# the Levi-Civita closed form against direct integration of the parallelism
# conditions, and the properties of Direct Transport.

# %%
import numpy as np

from shape_transport import simulation as sim
from shape_transport.shapes import center, opa_align, pseudo_inverse
from shape_transport.tps import bending_energy_of
from shape_transport.transport import (
    dt_affine,
    dt_size_and_shape,
    horizontal_part,
    lc_transport_vector,
    to_complex,
    transport_quality,
)

bodies = sim.make_reference_bodies()
X, Y = center(bodies[1].config), center(bodies[3].config)
Ya, _ = opa_align(Y, X)

# %% [markdown]
# ## Levi-Civita transport
# Along the straight geodesic from X to the aligned Y, a horizontal vector is
# transported by `dw/dt = -i Im<mu', w> / |mu|^2 mu`. The closed form agrees
# with a fine Runge-Kutta integration.

# %%
mu_a, mu_b = to_complex(X), to_complex(Ya)
w = horizontal_part(mu_a, to_complex(center(np.random.default_rng(0).standard_normal(X.shape) * 0.2)))
closed = lc_transport_vector(mu_a, mu_b, w)

d = mu_b - mu_a
def rate(t, v):
    mu = mu_a + t * d
    return -1j * np.vdot(d, v).imag / np.vdot(mu, mu).real * mu

v, h = w.copy(), 1e-3
for i in range(1000):
    t = i * h
    k1 = rate(t, v); k2 = rate(t + h / 2, v + h / 2 * k1)
    k3 = rate(t + h / 2, v + h / 2 * k2); k4 = rate(t + h, v + h * k3)
    v = v + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
print("closed form vs RK4:", np.max(np.abs(closed - v)))
print("norm before / after:", np.linalg.norm(w), np.linalg.norm(closed))

# %% [markdown]
# ## Direct Transport
# For an affine pair the linear part is carried over unchanged, whatever the
# destination; for a bending pair the spline is extrapolated and the round
# trip no longer closes.

# %%
F = sim.affine_deformation(0.2, -0.1)
print("affine: Y+ Y' - F =", np.max(np.abs(pseudo_inverse(Y) @ dt_affine(X, X @ F, Y) - F)))
Xp = center(sim.offset_bending_deformation(0.0, 0.3, X))
for method in ("dt", "lc"):
    rep = transport_quality(X, Xp, Y, method)
    print(f"{method}: elastic discrepancy {rep.elastic_discrepancy:.4f}, closure {rep.closure_error:.4f}")
Yp = dt_size_and_shape(X, Xp, Y)
print("bending energy at source %.4f, at destination %.4f" % (bending_energy_of(X, Xp), bending_energy_of(Y, Yp)))
