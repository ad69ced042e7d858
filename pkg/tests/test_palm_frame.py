import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from twist_retarget.errors import ConfigInvalid, DegenerateKeypoints, TrajectoryInvalid
from twist_retarget.palm_frame import (
    ArmCommandConfig,
    HandFrameSample,
    build_palm_frame,
    compose_arm_command,
)
from twist_retarget.se3 import Transform, is_rotation, rotation_about, so3_exp


def _sample(wrist, index_knuckle, pinky_knuckle, t=0.0):
    tips = {"thumb_tip": [0.1, -0.02, 0.05], "index_tip": [0.12, 0.0, 0.06], "middle_tip": [0.12, 0.02, 0.06]}
    return HandFrameSample(t, {"wrist": wrist, "index_knuckle": index_knuckle,
                               "pinky_knuckle": pinky_knuckle, **tips})


def test_axis_aligned_hand_gives_identity():
    f = build_palm_frame(_sample([0, 0, 0], [0.1, 0, 0], [0.08, 0.08, 0]))
    np.testing.assert_allclose(f.pose.rotation, np.eye(3), atol=1e-15)
    np.testing.assert_allclose(f.pose.translation, 0.0)
    np.testing.assert_allclose(f.normal, [0, 0, 1])


def test_rigidly_moved_hand_recovers_motion():
    R = rotation_about([0.3, -0.5, 0.8], 1.2)
    p = np.array([0.4, -0.1, 0.3])
    move = lambda x: R @ np.asarray(x, float) + p
    f = build_palm_frame(_sample(move([0, 0, 0]), move([0.1, 0, 0]), move([0.08, 0.08, 0])))
    np.testing.assert_allclose(f.pose.rotation, R, atol=1e-12)
    np.testing.assert_allclose(f.pose.translation, p, atol=1e-15)
    np.testing.assert_allclose(f.to_palm(move([0.01, 0.02, 0.03])), [0.01, 0.02, 0.03], atol=1e-12)


def test_to_palm_batches():
    f = build_palm_frame(_sample([0.1, 0.2, 0.3], [0.2, 0.25, 0.3], [0.15, 0.3, 0.35]))
    pts = np.array([[0.0, 0.1, 0.2], [0.3, 0.2, 0.1]])
    np.testing.assert_allclose(f.to_palm(pts), f.pose.inverse().apply(pts), atol=1e-15)


def test_collinear_knuckles_raise():
    with pytest.raises(DegenerateKeypoints):
        build_palm_frame(_sample([0, 0, 0], [0.1, 0, 0], [0.2, 0, 0]))
    with pytest.raises(DegenerateKeypoints):
        build_palm_frame(_sample([0, 0, 0], [0, 0, 0], [0.08, 0.08, 0]))


def test_sample_validation():
    with pytest.raises(TrajectoryInvalid):
        HandFrameSample(0.0, {"wrist": [0, 0, 0]})
    with pytest.raises(TrajectoryInvalid):
        _sample([0, 0, np.nan], [0.1, 0, 0], [0.08, 0.08, 0])
    with pytest.raises(TrajectoryInvalid):
        _sample([0, 0], [0.1, 0, 0], [0.08, 0.08, 0])
    with pytest.raises(TrajectoryInvalid):
        _sample([0, 0, 0], [0.1, 0, 0], [0.08, 0.08, 0], t=float("inf"))


def test_random_frames_are_rotations(rng):
    for _ in range(200):
        w, a, b = rng.normal(scale=0.1, size=(3, 3))
        try:
            f = build_palm_frame(_sample(w, a, b))
        except DegenerateKeypoints:
            continue
        R = f.pose.rotation
        assert np.abs(R.T @ R - np.eye(3)).max() <= 1e-9
        assert abs(np.linalg.det(R) - 1.0) <= 1e-9


@given(st.floats(0.05, 10.0), st.tuples(*[st.floats(-1, 1)] * 3))
def test_arm_command_scales_translation_only(scale, rv):
    R = so3_exp(np.array(rv))
    frame = build_palm_frame(_sample([0.1, 0.2, 0.3], [0.2, 0.2, 0.3], [0.18, 0.28, 0.3]))
    base = Transform(R, [0.0, 0.0, 0.5])
    cmd = compose_arm_command(frame, ArmCommandConfig(base, scale), t=1.5)
    assert cmd.t == 1.5
    np.testing.assert_allclose(cmd.pose.rotation, R @ frame.pose.rotation, atol=1e-12)
    np.testing.assert_allclose(cmd.pose.translation, R @ (scale * frame.pose.translation) + [0, 0, 0.5],
                               atol=1e-12)
    assert is_rotation(cmd.pose.rotation)


def test_arm_config_bounds():
    with pytest.raises(ConfigInvalid):
        ArmCommandConfig(translation_scale=0.0)
    with pytest.raises(ConfigInvalid):
        ArmCommandConfig(translation_scale=11.0)
