import math

import numpy as np
import pytest

import bimdrift


@pytest.fixture(scope="module")
def scene():
    model = bimdrift.split_walls(bimdrift.generate_scene(2, 2))
    waypoints = bimdrift.generate_waypoints(2, 2, seed=7)
    return model, waypoints


def test_transform_round_trip():
    t = bimdrift.RigidTransform.rot_z(0.3, [1.0, 2.0, 3.0])
    ident = t * t.inverse()
    assert bimdrift.rotation_distance(ident, bimdrift.RigidTransform.identity()) < 1e-12
    assert bimdrift.translation_distance(ident, bimdrift.RigidTransform.identity()) < 1e-12
    q = t.quaternion
    assert math.isclose(np.linalg.norm(q), 1.0, abs_tol=1e-12)
    same = bimdrift.RigidTransform(q, t.translation)
    assert bimdrift.rotation_distance(same, t) < 1e-12


def test_plane_from_corners():
    p = bimdrift.Plane.from_corners([[2, -1, 0], [2, 1, 0], [2, 1, 3], [2, -1, 3]])
    assert np.allclose(p.normal, [1, 0, 0])
    assert math.isclose(p.offset, 2.0)
    assert math.isclose(p.area, 6.0)
    with pytest.raises(bimdrift.CollinearInput):
        bimdrift.Plane.from_corners([[0, 0, 0], [1, 0, 0], [2, 0, 0]])


def test_errors_share_a_base():
    assert issubclass(bimdrift.ValidationError, bimdrift.Error)
    with pytest.raises(bimdrift.Error):
        bimdrift.parse_floorplan('{"walls": []}')


def test_scene_split(scene):
    model, _ = scene
    assert len(model) == 12
    assert model.find("wx1") is None
    assert model.find("wy0#1").parent_id == "wy0"
    assert bimdrift.generate_scene(1, 1).find("wx1").parent_id is None
    assert model.find("nope") is None


def test_estimate_recovers_injected_transform():
    model = bimdrift.generate_scene(1, 1)
    truth = bimdrift.RigidTransform.rot_z(math.radians(5), [0.3, -0.2, 0.1])
    s_t_b = truth.inverse()
    pairs = [(bimdrift.transform_plane(s_t_b, w.plane), w.id) for w in model.walls]
    result = bimdrift.estimate_transform(pairs, model)
    # Two walls per axis constrain x and y only.
    assert result["rank"] == 2
    assert abs(result["transform"].translation[0] - 0.3) < 1e-9
    assert abs(result["transform"].translation[1] + 0.2) < 1e-9
    assert result["final_cost"] < 1e-18


def test_match_planes(scene):
    model, _ = scene
    wall = model.find("wx0#1")
    matches = bimdrift.match_planes([("o", wall.plane)], model)
    assert matches == [("o", "wx0#1", 0.0)]


def test_simulate_and_compare(scene):
    model, waypoints = scene
    sim = bimdrift.simulate(model, waypoints, max_keyframes=60)
    assert len(sim.keyframes) == 60
    assert sim.keyframes[0].known_wall_ids
    for k, kf in enumerate(sim.keyframes):
        lifted = sim.true_B_T_S[k] * kf.camera_pose
        assert bimdrift.translation_distance(lifted, sim.true_poses[k]) < 1e-9

    final, samples = bimdrift.run_session(sim.keyframes, model, "local")
    assert len(samples) == 60
    assert samples[0]["variant"] == "local"

    report = bimdrift.compare_variants(sim.keyframes, model)
    assert set(report["reductions"]) == {"global", "local"}
    assert report["pooled"]["initial_manual"]["keyframes"] > 0
    with pytest.raises(bimdrift.ValidationError):
        bimdrift.compare_variants(sim.keyframes, model, variants=["local"])
    with pytest.raises(bimdrift.ValidationError):
        bimdrift.run_session(sim.keyframes, model, "local", '{"tua": 1}')
