import numpy as np
import pytest

from shape_transport import simulation as sim
from shape_transport.ordination import pca
from shape_transport.pipelines import PipelineConfig, run_lc, run_pipeline
from shape_transport.plotting import grid_pair, write_grid_plot, write_pca_plot
from shape_transport.shapes import center, rotation
from shape_transport.transport import dt_size_and_shape


@pytest.fixture(scope="module")
def case1_dt():
    return run_pipeline(sim.generate_case(1).set, PipelineConfig("dt", with_reports=False))


def test_pca_plot_deterministic(tmp_path, case1_dt):
    a = write_pca_plot(case1_dt.pca, tmp_path / "a.svg")
    b = write_pca_plot(case1_dt.pca, tmp_path / "b.svg")
    assert a.read_bytes() == b.read_bytes()
    text = a.read_text()
    assert text.startswith("<?xml") and "<svg" in text
    # five bodies, one polyline each
    assert text.count('id="line2d_') >= 5


def test_pca_plot_degenerate(tmp_path):
    t = np.linspace(0, 1, 6)
    one = pca(np.outer(t, [1.0, 0.0, 0.0]), labels=[("a", str(i)) for i in range(6)])
    assert one.n_components == 1
    assert write_pca_plot(one, tmp_path / "strip.svg").exists()
    none = pca(np.ones((4, 3)))
    assert write_pca_plot(none, tmp_path / "none.svg").exists()


def test_grid_affine_dt_coincides(tmp_path):
    X = center(sim.make_reference_bodies()[1].config)
    Y = center(sim.make_reference_bodies()[2].config)
    F = sim.affine_deformation(0.2, 0.3)
    actual = Y @ F.T
    moved = dt_size_and_shape(X, X @ F.T, Y)
    dev = write_grid_plot((Y, actual), (Y, moved @ rotation(0.3)), tmp_path / "g.svg")
    assert dev < 1e-8


def test_grid_identity_single_grid(tmp_path):
    X = center(sim.make_reference_bodies()[0].config)
    real, trans, _, dev = grid_pair((X, X), (X, X))
    assert dev < 1e-12
    for line in real:
        d = line[-1] - line[0]
        normal = np.array([-d[1], d[0]]) / np.linalg.norm(d)
        assert np.max(np.abs((line - line[0]) @ normal)) < 1e-12


def test_grid_case2_dt_better_than_lc(tmp_path):
    case = sim.generate_case(2)
    dt = run_pipeline(case.set, PipelineConfig("dt", with_reports=False))
    lc = run_lc(case.set, PipelineConfig("lc", with_reports=False))
    gm = dt.grand_mean
    truth = sim.ground_truth_trajectory(case, gm)[8]
    d_dt = write_grid_plot((gm, truth), (gm, dt.centered_set.trajectories[1].frames[8]), tmp_path / "dt.svg")
    d_lc = write_grid_plot((gm, truth), (gm, lc.centered_set.trajectories[1].frames[8]), tmp_path / "lc.svg")
    assert 0 < d_dt < d_lc
