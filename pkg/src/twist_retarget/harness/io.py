"""File formats: JSONL trajectories, ground-truth CSV, per-frame record CSV.

Floats are written with ``repr`` so a file round-trips bit-exactly and two
identical runs produce identical bytes.
"""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Iterable, List, Sequence

import numpy as np

from ..errors import TrajectoryInvalid
from ..metrics import AngleSeries
from ..palm_frame import HandFrameSample
from .pipeline import CSV_COLUMNS, FrameRecord

GT_COLUMNS = ("t", "theta_gt_deg", "active")


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    x = float(x)
    return "nan" if math.isnan(x) else repr(x)


def write_trajectory(path, trajectory: Iterable[HandFrameSample]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for s in trajectory:
            kp = {k: [float(c) for c in s.keypoints[k]] for k in sorted(s.keypoints)}
            fh.write(json.dumps({"t": float(s.t), "keypoints": kp}) + "\n")


def read_trajectory(path) -> List[HandFrameSample]:
    """Read a JSONL trajectory; rejects malformed lines and non-increasing ``t``."""
    samples: List[HandFrameSample] = []
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise TrajectoryInvalid(f"cannot read trajectory {path}: {exc}") from exc
    for n, line in enumerate(lines, 1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
            t, kp = obj["t"], obj["keypoints"]
        except (ValueError, KeyError, TypeError) as exc:
            raise TrajectoryInvalid(f"line {n}: expected {{\"t\": ..., \"keypoints\": {{...}}}}") from exc
        if not isinstance(kp, dict) or set(obj) - {"t", "keypoints"}:
            raise TrajectoryInvalid(f"line {n}: unexpected record layout")
        try:
            sample = HandFrameSample(float(t), kp)
        except TrajectoryInvalid as exc:
            raise TrajectoryInvalid(f"line {n}: {exc}") from exc
        except (TypeError, ValueError) as exc:
            raise TrajectoryInvalid(f"line {n}: bad number") from exc
        if samples and not sample.t > samples[-1].t:
            raise TrajectoryInvalid(f"line {n}: timestamps must be strictly increasing")
        samples.append(sample)
    return samples


def write_gt(path, gt: AngleSeries) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(GT_COLUMNS)
        for t, v, a in zip(gt.t, gt.value, gt.active):
            w.writerow((_fmt(t), _fmt(math.degrees(v)), _fmt(bool(a))))


def read_gt(path) -> AngleSeries:
    rows = _read_csv(path, GT_COLUMNS)
    try:
        t = np.array([float(r["t"]) for r in rows])
        v = np.radians([float(r["theta_gt_deg"]) for r in rows])
        a = np.array([_flag(r["active"]) for r in rows], dtype=bool)
    except ValueError as exc:
        raise TrajectoryInvalid(f"{path}: {exc}") from exc
    return AngleSeries(t, v, a)


def record_columns(n_dof: int) -> List[str]:
    return list(CSV_COLUMNS) + [f"q_{i}" for i in range(n_dof)]


def write_records(path, records: Sequence[FrameRecord], n_dof: int) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(record_columns(n_dof))
        for r in records:
            head = [getattr(r, c) for c in CSV_COLUMNS]
            w.writerow([_fmt(x) for x in head] + [_fmt(x) for x in r.q_cmd])


def read_records(path) -> List[dict]:
    """Records CSV as a list of dicts of floats (``gate_active`` as bool)."""
    rows = _read_csv(path, CSV_COLUMNS)
    out = []
    try:
        for r in rows:
            d = {k: float(v) for k, v in r.items() if k != "gate_active"}
            d["gate_active"] = _flag(r["gate_active"])
            out.append(d)
    except ValueError as exc:
        raise TrajectoryInvalid(f"{path}: {exc}") from exc
    return out


def records_series(rows: Sequence[dict]) -> AngleSeries:
    return AngleSeries(np.array([r["t"] for r in rows]), np.radians([r["theta_r_deg"] for r in rows]),
                       np.array([r["gate_active"] for r in rows], dtype=bool))


def _flag(s: str) -> bool:
    if s not in ("0", "1"):
        raise ValueError(f"expected 0 or 1, got {s!r}")
    return s == "1"


def _read_csv(path, required: Sequence[str]) -> List[dict]:
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            missing = set(required) - set(reader.fieldnames or ())
            if missing:
                raise TrajectoryInvalid(f"{path}: missing columns {sorted(missing)}")
            return list(reader)
    except OSError as exc:
        raise TrajectoryInvalid(f"cannot read {path}: {exc}") from exc
