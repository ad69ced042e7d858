"""Strict JSON run configuration.

Sections: ``gate``, ``intent``, ``refine``, ``baseline``, ``hand_model_path``
and ``scenario``.  Every section is optional; unknown keys anywhere raise
``ConfigInvalid``.  ``scenario`` is one scenario object, a list of them, or
``{"suite": "default", "noise_sigma": ..., "seed": ...}`` for the built-in
three-scenario suite.
"""
from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from ..errors import ConfigInvalid
from ..hand_model import HandModel, default_model, load_hand_model
from ..retarget import RefineConfig, VectorRetargetConfig
from ..tripod_intent import IntentConfig, PinchGateConfig
from .pipeline import PipelineConfig
from .scenario import ScenarioConfig, Segment, default_suite

SECTIONS = ("gate", "intent", "refine", "baseline", "hand_model_path", "scenario")
_SECTION_TYPES = {"gate": PinchGateConfig, "intent": IntentConfig, "refine": RefineConfig,
                  "baseline": VectorRetargetConfig}


@dataclass(frozen=True)
class RunConfig:
    pipeline: PipelineConfig = field(default_factory=PipelineConfig)
    hand_model_path: Optional[str] = None
    scenarios: tuple = ()

    def model(self) -> HandModel:
        return default_model() if self.hand_model_path is None else load_hand_model(self.hand_model_path)

    def scenario(self, name: Optional[str] = None) -> ScenarioConfig:
        """The scenario called ``name``, or the only one when ``name`` is None."""
        if name is None:
            if len(self.scenarios) != 1:
                raise ConfigInvalid(f"config holds {len(self.scenarios)} scenarios; pick one by name")
            return self.scenarios[0]
        for sc in self.scenarios:
            if sc.name == name:
                return sc
        raise ConfigInvalid(f"no scenario named {name!r}")


def _build(cls, data, where: str):
    if not isinstance(data, dict):
        raise ConfigInvalid(f"{where}: expected an object")
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - names)
    if unknown:
        raise ConfigInvalid(f"{where}: unknown keys {unknown}")
    for f in dataclasses.fields(cls):
        if f.name in data and f.type in ("float", "int") and isinstance(data[f.name], bool):
            raise ConfigInvalid(f"{where}.{f.name}: expected a number")
    try:
        return cls(**data)
    except ConfigInvalid as exc:
        raise ConfigInvalid(f"{where}: {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise ConfigInvalid(f"{where}: {exc}") from exc


def _scenario(data, where: str) -> ScenarioConfig:
    if not isinstance(data, dict):
        raise ConfigInvalid(f"{where}: expected an object")
    data = dict(data)
    segs = data.get("segments")
    if not isinstance(segs, list):
        raise ConfigInvalid(f"{where}.segments: expected a list")
    data["segments"] = tuple(_build(Segment, s, f"{where}.segments[{i}]") for i, s in enumerate(segs))
    if "axis_in_palm" in data:
        data["axis_in_palm"] = tuple(data["axis_in_palm"])
    return _build(ScenarioConfig, data, where)


def _scenarios(data) -> tuple:
    if isinstance(data, list):
        out = tuple(_scenario(s, f"scenario[{i}]") for i, s in enumerate(data))
    elif isinstance(data, dict) and "suite" in data:
        extra = sorted(set(data) - {"suite", "noise_sigma", "seed"})
        if extra or data["suite"] != "default":
            raise ConfigInvalid("scenario: only the 'default' suite with noise_sigma/seed is known")
        try:
            out = tuple(default_suite(float(data.get("noise_sigma", 0.0)), int(data.get("seed", 0))))
        except (TypeError, ValueError) as exc:
            raise ConfigInvalid(f"scenario: {exc}") from exc
    else:
        out = (_scenario(data, "scenario"),)
    names = [s.name for s in out]
    if len(set(names)) != len(names):
        raise ConfigInvalid("scenario names must be unique")
    return out


def parse_config(data: dict, base_dir: Optional[Path] = None) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigInvalid("config must be a JSON object")
    unknown = sorted(set(data) - set(SECTIONS))
    if unknown:
        raise ConfigInvalid(f"unknown config sections {unknown}")
    parts = {k: _build(cls, data[k], k) for k, cls in _SECTION_TYPES.items() if k in data}
    model_path = data.get("hand_model_path")
    if model_path is not None:
        if not isinstance(model_path, str):
            raise ConfigInvalid("hand_model_path must be a string")
        if base_dir is not None and not Path(model_path).is_absolute():
            model_path = str(base_dir / model_path)
    scenarios = _scenarios(data["scenario"]) if "scenario" in data else tuple(default_suite())
    return RunConfig(PipelineConfig(**parts), model_path, scenarios)


def load_config(path) -> RunConfig:
    """Parse a run config file; relative model paths resolve against its folder."""
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigInvalid(f"cannot read config {path}: {exc}") from exc
    except ValueError as exc:
        raise ConfigInvalid(f"{path} is not valid JSON: {exc}") from exc
    return parse_config(data, path.parent)


def config_to_dict(cfg: RunConfig) -> dict:
    out = {k: dataclasses.asdict(getattr(cfg.pipeline, k)) for k in _SECTION_TYPES}
    out["hand_model_path"] = cfg.hand_model_path
    out["scenario"] = [s.to_dict() for s in cfg.scenarios]
    return out
