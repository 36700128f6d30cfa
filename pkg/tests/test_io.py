import json

import numpy as np
import pytest

from shape_transport import io
from shape_transport import simulation as sim
from shape_transport.errors import ParseError, SchemaError
from shape_transport.ordination import pca
from shape_transport.shapes import TrajectorySet


def minimal_doc():
    return {
        "format_version": "1",
        "k": 3,
        "n": 2,
        "bodies": [{"id": "a", "frames": [[[0, 0], [1, 0], [0, 1]], [[0, 0], [2, 0], [0, 1]]], "frame_labels": ["t0", "t1"]}],
    }


def test_minimal_file(tmp_path):
    p = tmp_path / "m.json"
    p.write_text(json.dumps(minimal_doc()))
    ts = io.read_trajectories(p)
    assert (ts.k, ts.n, len(ts)) == (3, 2, 1)
    assert ts.trajectories[0].frame_labels == ["t0", "t1"]


def test_roundtrip_bit_exact(tmp_path):
    rng = np.random.default_rng(0)
    ts = TrajectorySet.from_array(rng.standard_normal((3, 4, 5, 2)) * 10 ** rng.uniform(-8, 8, (3, 4, 5, 2)))
    p = io.write_trajectories(ts, tmp_path / "r.json", metadata={"seed": 1})
    back = io.read_trajectories(p)
    np.testing.assert_array_equal(back.as_array(), ts.as_array())
    assert io.read_metadata(p) == {"seed": 1}
    assert p.read_text() == io.write_trajectories(back, tmp_path / "r2.json", {"seed": 1}).read_text()


def test_csv_matches_json(tmp_path):
    ts = sim.generate_case(1, frames=4).set
    pj = io.write_trajectories(ts, tmp_path / "a.json")
    pc = io.write_trajectories_csv(ts, tmp_path / "a.csv")
    a, b = io.read_trajectories(pj), io.read_trajectories(pc)
    np.testing.assert_array_equal(a.as_array(), b.as_array())
    assert a.body_ids == b.body_ids
    assert io.read_metadata(pc) == {}


@pytest.mark.parametrize(
    "mutate",
    [
        lambda d: d.update(format_version="2"),
        lambda d: d.update(bodies=[]),
        lambda d: d["bodies"][0]["frames"][1].pop(),
        lambda d: d["bodies"].append({"id": "b", "frames": d["bodies"][0]["frames"][:1] * 3}),
        lambda d: d["bodies"].append(dict(d["bodies"][0])),
        lambda d: d["bodies"][0]["frames"][0][0].__setitem__(0, "x"),
        lambda d: d.update(k=4),
        lambda d: d["bodies"][0].pop("frames"),
    ],
)
def test_schema_errors(tmp_path, mutate):
    doc = minimal_doc()
    mutate(doc)
    p = tmp_path / "bad.json"
    p.write_text(json.dumps(doc))
    with pytest.raises(SchemaError):
        io.read_trajectories(p)


def test_mismatched_frame_counts(tmp_path):
    doc = minimal_doc()
    doc.pop("n")
    doc["bodies"].append({"id": "b", "frames": doc["bodies"][0]["frames"] * 2})
    p = tmp_path / "bad.json"
    p.write_text(json.dumps(doc))
    with pytest.raises(SchemaError):
        io.read_trajectories(p)


def test_parse_errors_have_location(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{"format_version": "1",\n "bodies": [1, }')
    with pytest.raises(ParseError, match="line 2"):
        io.read_trajectories(p)
    with pytest.raises(ParseError):
        io.read_trajectories(tmp_path / "missing.json")


def test_csv_errors(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("body_id,frame_index,landmark_index,x,y\na,0,0,1,2\na,0,x,1,2\n")
    with pytest.raises(ParseError, match="line 3"):
        io.read_trajectories(p)
    p.write_text("body,frame\n")
    with pytest.raises(ParseError, match="header"):
        io.read_trajectories(p)
    rows = ["body_id,frame_index,landmark_index,x,y"]
    rows += [f"a,{f},{i},{i},{i * i + f}" for f in range(2) for i in range(3)]
    p.write_text("\n".join(rows + ["a,1,2,0,0"]) + "\n")
    with pytest.raises(SchemaError, match="duplicate"):
        io.read_trajectories(p)
    p.write_text("\n".join(rows[:-1]) + "\n")
    with pytest.raises(SchemaError):
        io.read_trajectories(p)


def test_digest_and_manifest(tmp_path):
    a = {"b": [1.0, 2.5], "a": 1}
    b = {"a": 1, "b": [1.0, 2.5]}
    assert io.content_digest(a) == io.content_digest(b)
    assert len(io.content_digest(a)) == 64
    m = io.RunManifest(command="run", seed=3, config={"x": 1})
    data = json.loads(m.write(tmp_path / "m.json").read_text())
    assert data["seed"] == 3 and data["tool_version"]


def test_pca_to_dict():
    rng = np.random.default_rng(1)
    res = pca(rng.standard_normal((10, 4)), labels=[("a", str(i)) for i in range(10)])
    doc = io.pca_to_dict(res)
    assert len(doc["scores"]) == 10
    json.dumps(doc)
