"""Turning-angle tracking and screw-axis stability metrics.

Angles are radians internally and degrees in reports.  Variances and
covariances use the population (1/T) convention.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .errors import DegenerateSignal, EmptyMask, MisalignedSeries


@dataclass(frozen=True)
class AngleSeries:
    t: np.ndarray
    value: np.ndarray  # rad
    active: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        v = np.asarray(self.value, dtype=float)
        a = np.asarray(self.active, dtype=bool)
        if not (t.shape == v.shape == a.shape) or t.ndim != 1:
            raise MisalignedSeries("t, value and active must be 1-D of equal length")
        if t.size > 1 and np.any(np.diff(t) <= 0):
            raise MisalignedSeries("time stamps must be strictly increasing")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "value", v)
        object.__setattr__(self, "active", a)


@dataclass(frozen=True)
class MetricsReport:
    rmse: float  # deg
    mae: float  # deg
    corr: float
    axis_dev_mean: float  # deg
    axis_dev_max: float  # deg
    n_samples: int

    def to_dict(self) -> dict:
        """Plain dict; undefined values (NaN) become None so the JSON stays standard."""
        return {k: (None if isinstance(v, float) and v != v else v) for k, v in asdict(self).items()}


def joint_mask(method: AngleSeries, gt: AngleSeries) -> np.ndarray:
    if method.t.shape != gt.t.shape or not np.array_equal(method.t, gt.t):
        raise MisalignedSeries("series must share identical time stamps")
    mask = method.active & gt.active
    if not mask.any():
        raise EmptyMask("no frame is active in both series")
    return mask


def tracking_error(method: AngleSeries, gt: AngleSeries) -> np.ndarray:
    """``method - gt`` (rad) over frames active in both series."""
    mask = joint_mask(method, gt)
    return method.value[mask] - gt.value[mask]


def rmse_mae(errors) -> tuple:
    """RMSE and MAE in degrees of errors given in radians."""
    e = np.degrees(np.asarray(errors, dtype=float))
    if e.size == 0:
        raise EmptyMask("no errors to summarize")
    rmse, mae = float(np.sqrt(np.mean(e * e))), float(np.mean(np.abs(e)))
    # RMSE >= MAE holds exactly; guard against a last-ulp inversion when all |e| are equal
    return max(rmse, mae), mae


def pearson(a, b) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1 or a.size < 2:
        raise MisalignedSeries("pearson needs two equal-length series of at least 2 samples")
    da, db = a - a.mean(), b - b.mean()
    sa, sb = np.sqrt(np.mean(da * da)), np.sqrt(np.mean(db * db))
    if sa <= 1e-12 or sb <= 1e-12:
        raise DegenerateSignal("a series has (near) zero standard deviation")
    return float(np.clip(np.mean(da * db) / (sa * sb), -1.0, 1.0))


def axis_deviation(a, a_ref) -> float:
    """Angle in degrees between two axes, ignoring sign; in [0, 90]."""
    d = abs(float(np.dot(a, a_ref)))
    return float(np.degrees(np.arccos(min(d, 1.0))))


def axis_deviation_series(axes, a_ref) -> np.ndarray:
    d = np.abs(np.asarray(axes, dtype=float) @ np.asarray(a_ref, dtype=float))
    return np.degrees(np.arccos(np.minimum(d, 1.0)))


def summarize(method: AngleSeries, gt: AngleSeries, axis_dev_deg=None) -> MetricsReport:
    """Metrics over the joint active mask.

    ``axis_dev_deg`` is a per-frame axis deviation aligned with ``method``;
    NaN entries inside the mask are ignored.  The correlation is NaN when
    either signal is constant over the mask.
    """
    mask = joint_mask(method, gt)
    rmse, mae = rmse_mae(method.value[mask] - gt.value[mask])
    try:
        corr = pearson(method.value[mask], gt.value[mask]) if mask.sum() >= 2 else float("nan")
    except DegenerateSignal:
        corr = float("nan")
    dev_mean = dev_max = float("nan")
    if axis_dev_deg is not None:
        dev = np.asarray(axis_dev_deg, dtype=float)[mask]
        dev = dev[np.isfinite(dev)]
        if dev.size:
            dev_mean, dev_max = float(dev.mean()), float(dev.max())
    return MetricsReport(rmse, mae, corr, dev_mean, dev_max, int(mask.sum()))
