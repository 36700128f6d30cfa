# %% [markdown]
# # When do the two transports agree?
#
# With bodies far apart in shape space the choice of transport matters. With
# closely similar bodies the two centred analyses should give nearly the same
# scores; here we measure how the gap grows with the spread of the bodies.

# %%
import numpy as np

from shape_transport import simulation as sim
from shape_transport.pipelines import PipelineConfig, align_signs, run_pipeline, score_rms

print("default bodies, max rho = %.3f" % sim.max_pairwise_procrustes([b.config for b in sim.make_reference_bodies()]))

for amplitude in (0.03, 0.06, 0.12, 0.2, 0.3):
    bodies = sim.low_variance_bodies(amplitude=amplitude)
    rho = sim.max_pairwise_procrustes([b.config for b in bodies])
    row = [f"amplitude {amplitude:.2f}  max rho {rho:.3f}"]
    for case_id in (1, 2):
        case = sim.generate_case(case_id, bodies=bodies)
        dt = run_pipeline(case.set, PipelineConfig("dt", with_reports=False)).pca.scores
        lc = run_pipeline(case.set, PipelineConfig("lc", with_reports=False)).pca.scores
        m = min(dt.shape[1], lc.shape[1])
        lc_s, _ = align_signs(lc[:, :m], dt[:, :m])
        gap = np.sqrt(np.mean(np.sum((dt[:, :m] - lc_s) ** 2, axis=1))) / score_rms(dt)
        row.append(f"case {case_id} score gap {100 * gap:5.1f}%")
    print("  ".join(row))

# %% [markdown]
# For the affine cycle the gap stays within a few percent well past
# rho = 0.2. For the bending cycle it grows roughly in proportion to rho,
# since the two transports already differ at first order in the distance
# between a body and the Grand Mean.
