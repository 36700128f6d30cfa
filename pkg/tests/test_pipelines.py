import numpy as np
import pytest

from shape_transport import simulation as sim
from shape_transport.pipelines import (
    PipelineConfig,
    align_signs,
    between_body_dispersion,
    run_classic,
    run_dt,
    run_lc,
    run_pipeline,
    score_rms,
    sequence_rms,
)
from shape_transport.shapes import (
    Trajectory,
    TrajectorySet,
    center,
    pseudo_inverse,
    rotation,
    size_and_shape_distance,
)


@pytest.fixture(scope="module")
def case1():
    return sim.generate_case(1)


def test_config_validation():
    with pytest.raises(ValueError):
        PipelineConfig("pca")
    with pytest.raises(ValueError):
        PipelineConfig("dt", local_ref_rule="median")
    with pytest.raises(ValueError):
        PipelineConfig("dt", elastic_coefficients=(1.0, 0.0))
    assert PipelineConfig("classic").scale_final
    assert not PipelineConfig("lc").scale_final
    assert PipelineConfig("dt", scale_in_final_pca=True).to_dict()["scale_in_final_pca"]


def test_dispersion_helpers():
    a = np.zeros((4, 2))
    b = np.ones((4, 2))
    assert sequence_rms(a, b) == pytest.approx(np.sqrt(2))
    assert between_body_dispersion(np.stack([a, a, b])) == pytest.approx(2 * np.sqrt(2) / 3)
    assert between_body_dispersion(a[None]) == 0.0
    assert score_rms(b) == pytest.approx(np.sqrt(2))


def test_align_signs():
    t = np.linspace(0, 1, 10)
    ref = np.column_stack([t, t**2])
    scores = np.column_stack([-3 * t, 2 * t**2 + 0.01])
    signed, signs = align_signs(scores, ref)
    np.testing.assert_array_equal(signs, [-1, 1])
    assert np.all(np.diff(signed[:, 0]) > 0)


def test_single_body_classic(case1):
    single = TrajectorySet([case1.set.trajectories[0]])
    out = run_classic(single)
    assert out.transport_reports == []
    assert out.pca.scores.shape[0] == 20


def test_duplicated_body_classic(case1):
    t = case1.set.trajectories[0]
    dup = TrajectorySet([t, Trajectory("copy", t.frames @ rotation(0.3))])
    blocks = run_classic(dup).score_blocks()
    np.testing.assert_allclose(blocks[0], blocks[1], atol=1e-9)


def test_case1_dt_exact_recovery(case1):
    out = run_dt(case1.set)
    blocks = out.score_blocks()
    assert out.pca.cumulative_ratio(2) >= 0.9999
    assert np.max(np.abs(blocks - blocks[0])) < 1e-8
    # transported frames carry the ground-truth strain relative to frame 0
    params = case1.ground_truth[0].parameters()
    F0 = sim.affine_deformation(*params[0])
    gm = center(out.grand_mean)
    truth = sim.ground_truth_trajectory(case1, gm)
    for i in (3, 11):
        M = np.linalg.solve(F0.T, sim.affine_deformation(*params[i]).T)  # frame 0 -> i on rows
        expected = np.linalg.eigvalsh(M.T @ M)
        for traj in out.centered_set:
            L = pseudo_inverse(gm) @ traj.frames[i]
            np.testing.assert_allclose(np.linalg.eigvalsh(L.T @ L), expected, atol=1e-8)
            assert size_and_shape_distance(traj.frames[i], truth[i]) < 1e-8


def test_case1_lc_and_classic_do_not(case1):
    d_dt = between_body_dispersion(run_dt(case1.set, PipelineConfig("dt", with_reports=False)).score_blocks())
    lc = run_lc(case1.set)
    d_lc = between_body_dispersion(lc.score_blocks())
    cl = run_classic(case1.set).score_blocks()
    assert d_lc >= 10 * max(d_dt, 1e-300)
    assert between_body_dispersion(cl) > 0.1 * score_rms(cl)
    for rep in lc.transport_reports:
        X, Xp = rep.source_pair
        assert np.linalg.norm(rep.transported - rep.destination) == pytest.approx(np.linalg.norm(Xp - X), abs=1e-10)


def test_bodies_equal_to_mean_lc_equals_classic():
    body = sim.make_reference_bodies()[1].config
    cyc = sim.CycleSpec("affine", (0.0, 0.2), (0.1, 0.1), 6)
    case = sim.generate_case(1, cycles=[cyc], bodies=[sim.ReferenceBody(f"c{i}", body) for i in range(3)])
    lc = run_lc(case.set, PipelineConfig("lc", scale_in_final_pca=True, with_reports=False))
    cl = run_classic(case.set)
    np.testing.assert_allclose(lc.pca.eigenvalues, cl.pca.eigenvalues, atol=1e-9)
    np.testing.assert_allclose(np.abs(lc.pca.scores), np.abs(cl.pca.scores), atol=1e-9)


def test_constant_cycle_dt_collapses():
    cyc = sim.CycleSpec("affine", (0.0, 0.0), (0.0, 0.0), 5)
    out = run_dt(sim.generate_case(1, cycles=[cyc]).set)
    assert out.pca.total_variance < 1e-18
    for traj in out.centered_set:
        for f in traj.frames:
            np.testing.assert_allclose(f, out.grand_mean, atol=1e-9)


def test_case2_dt_concentrates_variance():
    case = sim.generate_case(2)
    dt = run_dt(case.set, PipelineConfig("dt", with_reports=False))
    lc = run_lc(case.set, PipelineConfig("lc", with_reports=False))
    assert dt.pca.cumulative_ratio(3) > lc.pca.cumulative_ratio(3)
    assert dt.centered_set.n == case.set.n


def test_determinism_and_permutation(case1):
    cfg = PipelineConfig("dt", with_reports=False)
    a, b = run_pipeline(case1.set, cfg), run_pipeline(case1.set, cfg)
    np.testing.assert_array_equal(a.pca.scores, b.pca.scores)
    perm = [2, 0, 4, 1, 3]
    permuted = TrajectorySet([case1.set.trajectories[i] for i in perm])
    for method in ("dt", "lc"):
        base = run_pipeline(case1.set, PipelineConfig(method, with_reports=False))
        p = run_pipeline(permuted, PipelineConfig(method, with_reports=False))
        s_base, _ = align_signs(base.score_blocks()[perm].reshape(-1, base.pca.n_components), p.pca.scores)
        np.testing.assert_allclose(p.pca.eigenvalues, base.pca.eigenvalues, rtol=1e-9, atol=1e-12)
        np.testing.assert_allclose(np.abs(p.pca.scores), np.abs(s_base), atol=1e-9)


def test_rigid_motion_invariance(case1):
    moved = TrajectorySet(
        [Trajectory(t.body_id, t.frames @ rotation(0.8) + [3.0, -1.0]) for t in case1.set]
    )
    for method in ("classic", "lc", "dt"):
        a = run_pipeline(case1.set, PipelineConfig(method, with_reports=False)).pca.eigenvalues
        b = run_pipeline(moved, PipelineConfig(method, with_reports=False)).pca.eigenvalues
        np.testing.assert_allclose(a, b, atol=1e-9)


def test_local_mean_rule_runs(case1):
    out = run_dt(case1.set, PipelineConfig("dt", local_ref_rule="local_mean", with_reports=False))
    assert out.references.shape == (5, 8, 2)
    assert out.pca.cumulative_ratio(2) >= 0.9999
