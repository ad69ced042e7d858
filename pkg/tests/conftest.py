import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from twist_retarget.hand_model import default_model, model_from_dict

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

# tripod tips of the spinning toy hand at q = 0; the centroid sits on the z axis
TOY_TIPS = {
    "thumb": [0.02, 0.0, 0.05],
    "index": [-0.01, 0.0173, 0.05],
    "middle": [-0.01, -0.0173, 0.05],
}


def _spin_finger(tip, mimic=None):
    joint = {"axis": [0, 0, 1], "offset": [0, 0, 0], "lower": -1.0, "upper": 1.0}
    if mimic:
        joint["mimic"] = mimic
    return {"base_position": [0, 0, 0], "base_rotation_rpy": [0, 0, 0], "joints": [joint], "tip_offset": tip}


def toy_model_dict():
    """One actuated joint spins the whole tripod about +z; the ring owns a second joint."""
    return {"fingers": {
        "thumb": _spin_finger(TOY_TIPS["thumb"]),
        "index": _spin_finger(TOY_TIPS["index"], ["thumb", 0]),
        "middle": _spin_finger(TOY_TIPS["middle"], ["thumb", 0]),
        "ring": {"base_position": [0.0, 0.05, 0.0], "base_rotation_rpy": [0, 0, 0],
                 "joints": [{"axis": [0, -1, 0], "offset": [0, 0, 0], "lower": -0.5, "upper": 1.5}],
                 "tip_offset": [0.04, 0.0, 0.0]},
    }}


@pytest.fixture(scope="session")
def model():
    return default_model()


@pytest.fixture(scope="session")
def toy_model():
    return model_from_dict(toy_model_dict(), name="toy")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_rotvecs(rng, n, max_angle=3.0):
    axes = rng.normal(size=(n, 3))
    axes /= np.linalg.norm(axes, axis=1, keepdims=True)
    return axes * rng.uniform(0.0, max_angle, size=(n, 1))


def record_refine_calls(monkeypatch, scenarios, model, cfg=None):
    """Run the dextwist pipeline and capture every refine call as
    ``(q_init, ref, target, align_axis, output)``."""
    from twist_retarget import retarget
    from twist_retarget.harness.pipeline import PipelineConfig, run_pipeline
    from twist_retarget.harness.scenario import generate_scenario

    calls = []
    real = retarget.refine

    def spy(model_, q_init, ref, target, rcfg=retarget.RefineConfig(), align_axis=None):
        out = real(model_, q_init, ref, target, rcfg, align_axis)
        calls.append((np.array(q_init), ref, target, align_axis, out))
        return out

    monkeypatch.setattr(retarget, "refine", spy)
    for sc in scenarios:
        traj, gt = generate_scenario(sc)
        run_pipeline(traj, gt, "dextwist", model, cfg or PipelineConfig())
    return calls


@pytest.fixture(scope="session")
def suite_report():
    """Both methods over the noise-free default suite (shared, it takes seconds)."""
    from twist_retarget.harness.compare import compare
    from twist_retarget.harness.config import RunConfig
    from twist_retarget.harness.scenario import default_suite

    return compare(RunConfig(scenarios=tuple(default_suite())), ["dextwist", "vector"])


ACCEPTANCE_LINES = {}


@pytest.fixture
def verdict():
    """Record one pass/fail line for an acceptance criterion, then assert it."""

    def record(cid, ok, detail):
        line = f"{cid} {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES[cid] = line
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for cid in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[cid])
