import json

import numpy as np
import pytest

from twist_retarget.errors import ConfigInvalid, TrajectoryInvalid
from twist_retarget.harness.compare import parse_methods, pooled_report, timing_stats
from twist_retarget.harness.config import RunConfig, config_to_dict, load_config, parse_config
from twist_retarget.harness.io import (
    read_gt,
    read_records,
    read_trajectory,
    record_columns,
    records_series,
    write_gt,
    write_records,
    write_trajectory,
)
from twist_retarget.harness.pipeline import method_series, run_pipeline, task_series
from twist_retarget.harness.scenario import ScenarioConfig, Segment, default_suite, generate_scenario
from twist_retarget.metrics import summarize

SHORT = ScenarioConfig((Segment("approach", 0.2), Segment("hold", 0.1), Segment("turn", 0.3)), name="short")


# scenario generation

def test_suite_ground_truth_totals():
    totals = {}
    for sc in default_suite():
        traj, gt = generate_scenario(sc)
        assert len(traj) == len(gt.t)
        totals[sc.name] = np.degrees(gt.value[-1])
    assert totals == pytest.approx({"single_turn_120": 120.0, "ratchet_3x60": 180.0, "turn_with_holds": 90.0})


def test_ground_truth_moves_only_while_turning():
    sc = ScenarioConfig((Segment("hold", 0.2), Segment("turn", 0.2), Segment("release_and_rewind", 0.5, 40.0)))
    _, gt = generate_scenario(sc)
    d = np.diff(np.degrees(gt.value))
    # frame 10 is the first turn frame, so d[9] is its increment
    assert np.allclose(d[:9], 0.0) and np.allclose(d[9:19], 60.0 / 50.0)
    assert np.allclose(d[19:], 0.0)
    assert gt.active[:20].all() and not gt.active[20:25].any() and gt.active[-1]


def test_noise_is_seeded():
    a = generate_scenario(ScenarioConfig(SHORT.segments, noise_sigma=0.001, seed=7))[0]
    b = generate_scenario(ScenarioConfig(SHORT.segments, noise_sigma=0.001, seed=7))[0]
    c = generate_scenario(ScenarioConfig(SHORT.segments, noise_sigma=0.001, seed=8))[0]
    assert all(np.array_equal(x.keypoints["thumb_tip"], y.keypoints["thumb_tip"]) for x, y in zip(a, b))
    assert not np.array_equal(a[-1].keypoints["thumb_tip"], c[-1].keypoints["thumb_tip"])


@pytest.mark.parametrize("bad", [
    dict(segments=()),
    dict(segments=(Segment("turn", 1.0),), frame_rate=0.0),
    dict(segments=(Segment("turn", 1.0),), noise_sigma=-1.0),
    dict(segments=(Segment("turn", 1.0),), axis_in_palm=(0.0, 0.0, 0.0)),
])
def test_scenario_validation(bad):
    with pytest.raises(ConfigInvalid):
        ScenarioConfig(**bad)
    with pytest.raises(ConfigInvalid):
        Segment("spin", 1.0)


# file formats

def test_trajectory_round_trip(tmp_path):
    traj, gt = generate_scenario(SHORT)
    write_trajectory(tmp_path / "t.jsonl", traj)
    back = read_trajectory(tmp_path / "t.jsonl")
    assert [s.t for s in back] == [s.t for s in traj]
    for x, y in zip(traj, back):
        assert x.keypoints.keys() == y.keypoints.keys()
        for k in x.keypoints:
            np.testing.assert_array_equal(x.keypoints[k], y.keypoints[k])
    write_gt(tmp_path / "gt.csv", gt)
    g = read_gt(tmp_path / "gt.csv")
    np.testing.assert_array_equal(g.t, gt.t)
    np.testing.assert_allclose(g.value, gt.value, rtol=1e-15)
    np.testing.assert_array_equal(g.active, gt.active)


@pytest.mark.parametrize("line", [
    "not json",
    '{"t": 0.0}',
    '{"t": 0.0, "keypoints": [], "x": 1}',
    '{"t": 0.0, "keypoints": {"wrist": [0, 0, 0]}}',
    '{"t": "a", "keypoints": {}}',
])
def test_trajectory_rejects_bad_lines(tmp_path, line):
    p = tmp_path / "bad.jsonl"
    p.write_text(line + "\n")
    with pytest.raises(TrajectoryInvalid):
        read_trajectory(p)


def test_trajectory_rejects_time_going_backwards(tmp_path):
    traj, _ = generate_scenario(SHORT)
    write_trajectory(tmp_path / "t.jsonl", [traj[1], traj[0]])
    with pytest.raises(TrajectoryInvalid):
        read_trajectory(tmp_path / "t.jsonl")
    with pytest.raises(TrajectoryInvalid):
        read_trajectory(tmp_path / "missing.jsonl")


def test_records_round_trip(tmp_path, model):
    traj, gt = generate_scenario(SHORT)
    recs = run_pipeline(traj, gt, "dextwist", model)
    write_records(tmp_path / "r.csv", recs, model.n_dof)
    header = (tmp_path / "r.csv").read_text().splitlines()[0].split(",")
    assert header == record_columns(model.n_dof)
    rows = read_records(tmp_path / "r.csv")
    a, b = records_series(rows), method_series(recs)
    np.testing.assert_allclose(a.value, b.value, rtol=1e-15)
    np.testing.assert_array_equal(a.active, b.active)
    bad = tmp_path / "bad.csv"
    bad.write_text("t,theta_r_deg\n0,1\n")
    with pytest.raises(TrajectoryInvalid):
        read_records(bad)


# configuration

def test_empty_config_uses_defaults():
    cfg = parse_config({})
    assert [s.name for s in cfg.scenarios] == [s.name for s in default_suite()]
    assert cfg.pipeline.refine.w_conn == 200.0


def test_config_sections_and_scenario_forms(tmp_path):
    data = {"refine": {"iterations": 7}, "gate": {"d_on": 0.04},
            "scenario": {"segments": [{"kind": "turn", "duration": 0.5}], "name": "one"}}
    (tmp_path / "c.json").write_text(json.dumps(data))
    cfg = load_config(tmp_path / "c.json")
    assert cfg.pipeline.refine.iterations == 7 and cfg.pipeline.gate.d_on == 0.04
    assert cfg.scenario().name == "one"
    noisy = parse_config({"scenario": {"suite": "default", "noise_sigma": 0.001, "seed": 3}})
    assert {s.noise_sigma for s in noisy.scenarios} == {0.001}
    assert config_to_dict(cfg)["refine"]["iterations"] == 7


def test_relative_model_path_resolves_next_to_config(tmp_path):
    (tmp_path / "c.json").write_text(json.dumps({"hand_model_path": "hand.json"}))
    assert load_config(tmp_path / "c.json").hand_model_path == str(tmp_path / "hand.json")


@pytest.mark.parametrize("data", [
    {"solver": {}},
    {"refine": {"iterationz": 3}},
    {"refine": {"iterations": 0}},
    {"refine": {"w_rot": True}},
    {"gate": {"d_on": 0.1}},
    {"scenario": {"segments": "turn"}},
    {"scenario": {"segments": [{"kind": "turn", "duration": 1.0, "speed": 2}]}},
    {"scenario": {"suite": "other"}},
    {"scenario": [{"segments": [{"kind": "turn", "duration": 1.0}]},
                  {"segments": [{"kind": "hold", "duration": 1.0}]}]},
    {"hand_model_path": 3},
    [],
])
def test_config_rejections(data):
    with pytest.raises(ConfigInvalid):
        parse_config(data)


def test_config_file_errors(tmp_path):
    with pytest.raises(ConfigInvalid):
        load_config(tmp_path / "none.json")
    (tmp_path / "bad.json").write_text("{")
    with pytest.raises(ConfigInvalid):
        load_config(tmp_path / "bad.json")
    with pytest.raises(ConfigInvalid):
        parse_config({}).scenario()
    with pytest.raises(ConfigInvalid):
        parse_config({}).scenario("nope")


# pipeline

def test_zero_length_trajectory(model):
    assert run_pipeline([], None, "dextwist", model) == []


def test_pipeline_rejects_bad_inputs(model):
    traj, gt = generate_scenario(SHORT)
    with pytest.raises(ConfigInvalid):
        run_pipeline(traj, gt, "magic", model)
    with pytest.raises(TrajectoryInvalid):
        run_pipeline(traj[:-1], gt, "dextwist", model)


def test_three_ratchets_accumulate_to_one_eighty(model):
    traj, gt = generate_scenario(default_suite()[1])
    recs = run_pipeline(traj, gt, "vector", model)
    assert recs[-1].theta_task_deg == pytest.approx(180.0, abs=2.0)
    task = task_series(recs)
    for i in range(1, len(recs)):
        if not recs[i].gate_active:
            assert task.value[i] == task.value[i - 1]


def test_records_are_well_formed(suite_report, model):
    recs = suite_report.scenarios[0].records["dextwist"]
    active = [r for r in recs if r.gate_active]
    assert active and all(np.isfinite(r.J_total) for r in active)
    assert all(np.isnan(r.J_total) and np.isnan(r.axis_dev_deg) for r in recs if not r.gate_active)
    for r in active:
        assert r.J_total == pytest.approx(r.J_rot + r.J_conn + r.J_axis + r.J_pos)
    assert all(r.q_cmd.shape == (model.n_dof,) for r in recs)


def test_final_turn_within_five_degrees(suite_report):
    # end-to-end expectation on the noise-free single-turn scenario
    last = suite_report.scenarios[0].records["dextwist"][-1]
    assert abs(last.theta_r_deg - last.theta_gt_deg) < 5.0


def test_single_turn_ordering(suite_report):
    s = suite_report.scenarios[0]
    assert s.reports["dextwist"].rmse < s.reports["vector"].rmse
    assert s.reports["dextwist"].axis_dev_mean < s.reports["vector"].axis_dev_mean


# comparison

def test_pooled_equals_concatenated_summary(suite_report):
    pooled = suite_report.pooled["vector"]
    single = pooled_report([(method_series(s.records["vector"]), s.gt, None) for s in suite_report.scenarios[:1]])
    direct = summarize(method_series(suite_report.scenarios[0].records["vector"]), suite_report.scenarios[0].gt)
    assert single.rmse == pytest.approx(direct.rmse, abs=1e-12)
    assert pooled.n_samples == sum(s.reports["vector"].n_samples for s in suite_report.scenarios)


def test_report_dict_is_json_and_timing_optional(suite_report):
    d = suite_report.to_dict()
    assert "timing" not in d and set(d) == {"config_digest", "methods", "pooled", "scenarios"}
    json.dumps(d, allow_nan=False)
    assert "timing" in suite_report.to_dict(include_timing=True)
    t = timing_stats(suite_report.scenarios[0].records["dextwist"])
    assert t["refined"]["n_frames"] > 0 and t["all"]["median_ms"] > 0


def test_parse_methods():
    assert parse_methods("vector, dextwist") == ["vector", "dextwist"]
    for bad in ("", "dextwist,dextwist", "dextwist,other"):
        with pytest.raises(ConfigInvalid):
            parse_methods(bad)


def test_run_config_model_default():
    assert RunConfig().model().n_dof == 16


def test_two_second_turn_is_one_hundred_frames():
    traj, gt = generate_scenario(ScenarioConfig((Segment("turn", 2.0),)))
    assert len(traj) == 100
    assert np.degrees(gt.value[-1]) == pytest.approx(120.0)
