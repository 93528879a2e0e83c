"""Timing and trend helpers shared by the pipeline and its tests."""

from __future__ import annotations

import time
from contextlib import contextmanager
from typing import Sequence

import numpy as np


class StageTimer:
    """Collects wall-clock duration per named stage, in milliseconds."""

    def __init__(self):
        self.stages_ms: dict[str, float] = {}

    @contextmanager
    def stage(self, name: str):
        start = time.perf_counter()
        try:
            yield
        finally:
            self.stages_ms[name] = self.stages_ms.get(name, 0.0) + (
                time.perf_counter() - start
            ) * 1000.0


def linear_fit_r2(xs: Sequence[float], ys: Sequence[float]) -> tuple[float, float, float]:
    """Least-squares line through (xs, ys); returns (slope, intercept, r_squared).

    A constant series fits its own flat line perfectly, so r_squared is 1.0
    when the y values carry no variance.
    """
    if len(xs) != len(ys):
        raise ValueError("xs and ys must have equal length")
    if len(xs) < 2:
        raise ValueError("need at least two points to fit a line")
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    slope, intercept = np.polyfit(x, y, 1)
    predicted = slope * x + intercept
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot == 0.0:
        return float(slope), float(intercept), 1.0
    ss_res = float(np.sum((y - predicted) ** 2))
    return float(slope), float(intercept), 1.0 - ss_res / ss_tot
