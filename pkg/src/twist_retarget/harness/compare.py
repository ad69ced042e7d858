"""Run several methods over a scenario suite and assemble a report."""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Dict, List, Sequence

import numpy as np

from ..errors import ConfigInvalid, DegenerateSignal, EmptyMask
from ..hand_model import default_model_path
from ..metrics import AngleSeries, MetricsReport, joint_mask, pearson, rmse_mae, summarize
from .config import RunConfig, config_to_dict
from .pipeline import METHODS, FrameRecord, method_series, run_pipeline
from .scenario import generate_scenario


@dataclass
class ScenarioResult:
    name: str
    digest: str
    gt: AngleSeries
    records: Dict[str, List[FrameRecord]]
    reports: Dict[str, MetricsReport]
    intent: MetricsReport  # theta_task against gt, shared by all methods


@dataclass
class RunReport:
    methods: List[str]
    scenarios: List[ScenarioResult]
    pooled: Dict[str, MetricsReport]
    config_digest: str
    timing: Dict[str, dict] = field(default_factory=dict)

    def to_dict(self, include_timing: bool = False) -> dict:
        """JSON-ready report; timing is opt-in because it differs run to run."""
        out = {
            "config_digest": self.config_digest,
            "methods": list(self.methods),
            "pooled": {m: self.pooled[m].to_dict() for m in self.methods},
            "scenarios": [
                {
                    "name": s.name,
                    "digest": s.digest,
                    "intent": s.intent.to_dict(),
                    "metrics": {m: s.reports[m].to_dict() for m in self.methods},
                }
                for s in self.scenarios
            ],
        }
        if include_timing:
            out["timing"] = self.timing
        return out


def parse_methods(text: str) -> List[str]:
    methods = [m.strip() for m in text.split(",") if m.strip()]
    bad = [m for m in methods if m not in METHODS]
    if not methods or bad:
        raise ConfigInvalid(f"methods must be a comma list drawn from {METHODS}")
    if len(set(methods)) != len(methods):
        raise ConfigInvalid("methods repeated")
    return methods


def pooled_report(pairs: Sequence[tuple]) -> MetricsReport:
    """Metrics over the concatenation of several ``(method, gt, axis_dev)`` runs."""
    errs, m_vals, g_vals, devs = [], [], [], []
    for method, gt, axis_dev in pairs:
        mask = joint_mask(method, gt)
        errs.append(method.value[mask] - gt.value[mask])
        m_vals.append(method.value[mask])
        g_vals.append(gt.value[mask])
        if axis_dev is not None:
            devs.append(np.asarray(axis_dev, dtype=float)[mask])
    e = np.concatenate(errs)
    if e.size == 0:
        raise EmptyMask("no active frames in any run")
    rmse, mae = rmse_mae(e)
    try:
        corr = pearson(np.concatenate(m_vals), np.concatenate(g_vals)) if e.size >= 2 else float("nan")
    except DegenerateSignal:
        corr = float("nan")
    dev = np.concatenate(devs) if devs else np.zeros(0)
    dev = dev[np.isfinite(dev)]
    mean, mx = (float(dev.mean()), float(dev.max())) if dev.size else (float("nan"), float("nan"))
    return MetricsReport(rmse, mae, corr, mean, mx, int(e.size))


def timing_stats(records: Sequence[FrameRecord]) -> dict:
    """Per-frame wall-clock percentiles over all frames and over refined frames."""
    out = {}
    for key, recs in (("all", records), ("refined", [r for r in records if r.refined])):
        ms = np.array([r.frame_time for r in recs]) * 1e3
        out[key] = {"n_frames": int(ms.size)}
        if ms.size:
            out[key].update(median_ms=float(np.median(ms)), p99_ms=float(np.percentile(ms, 99)),
                            max_ms=float(ms.max()))
    return out


def compare(cfg: RunConfig, methods: Sequence[str]) -> RunReport:
    """Every method on every scenario of ``cfg``; identical frames per method."""
    methods = list(methods)
    model = cfg.model()
    results: List[ScenarioResult] = []
    times: Dict[str, list] = {m: [] for m in methods}
    for sc in cfg.scenarios:
        traj, gt = generate_scenario(sc)
        recs, reps = {}, {}
        for m in methods:
            recs[m] = run_pipeline(traj, gt, m, model, cfg.pipeline)
            reps[m] = summarize(method_series(recs[m]), gt, [r.axis_dev_deg for r in recs[m]])
            times[m] += recs[m]
        first = recs[methods[0]]
        intent = summarize(AngleSeries(gt.t, np.radians([r.theta_task_deg for r in first]),
                                       np.array([r.gate_active for r in first], dtype=bool)), gt)
        results.append(ScenarioResult(sc.name, sc.digest(), gt, recs, reps, intent))
    pooled = {
        m: pooled_report([(method_series(s.records[m]), s.gt, [r.axis_dev_deg for r in s.records[m]])
                          for s in results])
        for m in methods
    }
    return RunReport(methods, results, pooled, _config_digest(cfg), {m: timing_stats(times[m]) for m in methods})


def _config_digest(cfg: RunConfig) -> str:
    """Hash of the effective configuration; the hand model enters by content."""
    d = config_to_dict(cfg)
    model_file = d.pop("hand_model_path") or default_model_path()
    h = hashlib.sha256(json.dumps(d, sort_keys=True).encode())
    with open(model_file, "rb") as fh:
        h.update(fh.read())
    return h.hexdigest()[:16]
