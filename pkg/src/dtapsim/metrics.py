"""Streaming run metrics: windowed ATST, policy-entropy snapshots, CSV frames.

One recorder per simulation instance. Completed tasks are attributed to the
window containing their completion instant; a frame is emitted at each
window boundary. Frames are pure functions of the completion trace and the
policy snapshot, so replaying a trace reproduces them bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels

CSV_HEADER = "time,window_tasks,atst,entropy_mean,entropy_std,tasks_completed_total"


@dataclass(frozen=True)
class MetricsFrame:
    time: int
    window_tasks: int
    atst: float  # nan when the window completed no tasks
    entropy_mean: float
    entropy_std: float
    tasks_completed_total: int


class MetricsRecorder:
    """Accumulates per-window TST sums keyed by window index."""

    def __init__(self, window: int):
        if window < 1:
            raise ValueError(f"window must be >= 1, got {window}")
        self.window = window
        self._counts: dict[int, int] = {}
        self._sums: dict[int, float] = {}
        self.total_completed = 0
        self.total_tst = 0.0
        self.frames: list[MetricsFrame] = []

    def record_completion(self, task_tst: float, completion_time: float) -> None:
        if task_tst < 0.0:
            raise ValueError(f"task TST must be >= 0, got {task_tst}")
        idx = math.ceil(completion_time / self.window)
        self._counts[idx] = self._counts.get(idx, 0) + 1
        self._sums[idx] = self._sums.get(idx, 0.0) + task_tst
        self.total_completed += 1
        self.total_tst += task_tst

    def window_stats(self, index: int) -> tuple[int, float]:
        """(task count, mean TST) for one window; mean is nan when empty."""
        count = self._counts.get(index, 0)
        if count == 0:
            return 0, math.nan
        return count, self._sums[index] / count

    def make_frame(self, time: int, entropy_mean: float, entropy_std: float) -> MetricsFrame:
        count, atst = self.window_stats(time // self.window)
        frame = MetricsFrame(
            time=time,
            window_tasks=count,
            atst=atst,
            entropy_mean=entropy_mean,
            entropy_std=entropy_std,
            tasks_completed_total=self.total_completed,
        )
        self.frames.append(frame)
        return frame

    @property
    def mean_tst(self) -> float:
        """Full-run unwindowed mean TST over all recorded completions."""
        if self.total_completed == 0:
            return math.nan
        return self.total_tst / self.total_completed


def entropy_snapshot(policies) -> tuple[float, float]:
    """Mean and population std of policy entropy across agents, in bits."""
    values = [kernels.entropy_bits(np.ascontiguousarray(p, dtype=np.float64)) for p in policies]
    if not values:
        raise ValueError("entropy snapshot needs at least one agent")
    arr = np.asarray(values)
    return float(arr.mean()), float(arr.std())


def empirical_policy(counts) -> np.ndarray:
    """Normalized action frequencies from tally counts."""
    arr = np.asarray(counts, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("counts must be a non-empty 1-D vector")
    if np.any(arr < 0):
        raise ValueError("counts must be non-negative")
    total = arr.sum()
    if total <= 0:
        raise ValueError("cannot estimate a policy from an all-zero counter")
    return arr / total


def _fmt(x: float) -> str:
    return "" if math.isnan(x) else f"{x:.10g}"


def format_frame(frame: MetricsFrame) -> str:
    return (
        f"{frame.time},{frame.window_tasks},{_fmt(frame.atst)},"
        f"{_fmt(frame.entropy_mean)},{_fmt(frame.entropy_std)},"
        f"{frame.tasks_completed_total}"
    )


def emit_frame(frame: MetricsFrame, sink) -> None:
    """Append one CSV row; flushed so frames survive interruption."""
    sink.write(format_frame(frame) + "\n")
    sink.flush()


def load_metrics_csv(path) -> list[MetricsFrame]:
    frames = []
    with open(path, encoding="utf-8") as f:
        header = f.readline().strip()
        if header != CSV_HEADER:
            raise ValueError(f"unexpected metrics header: {header!r}")
        for line in f:
            line = line.strip()
            if not line:
                continue
            t, n, atst, emean, estd, total = line.split(",")
            frames.append(
                MetricsFrame(
                    time=int(t),
                    window_tasks=int(n),
                    atst=float(atst) if atst else math.nan,
                    entropy_mean=float(emean),
                    entropy_std=float(estd),
                    tasks_completed_total=int(total),
                )
            )
    return frames


def frames_in_span(frames, t_lo: float, t_hi: float) -> list[MetricsFrame]:
    """Frames with t_lo < time <= t_hi."""
    return [f for f in frames if t_lo < f.time <= t_hi]


def period_atst(frames, t_lo: float, t_hi: float) -> float:
    """Task-weighted ATST over all windows in (t_lo, t_hi]."""
    span = frames_in_span(frames, t_lo, t_hi)
    tasks = sum(f.window_tasks for f in span)
    if tasks == 0:
        return math.nan
    total = sum(f.atst * f.window_tasks for f in span if f.window_tasks > 0)
    return total / tasks


def atst_rel_change(frames, t_lo: float, t_hi: float) -> float:
    """|ATST(second half) - ATST(first half)| / ATST(first half) over (t_lo, t_hi]."""
    mid = (t_lo + t_hi) / 2.0
    first = period_atst(frames, t_lo, mid)
    second = period_atst(frames, mid, t_hi)
    if math.isnan(first) or first == 0.0:
        return math.nan
    return abs(second - first) / first


def entropy_at(frames, time: int) -> float:
    for f in frames:
        if f.time == time:
            return f.entropy_mean
    raise ValueError(f"no frame at time {time}")


def entropy_slope(frames, t_lo: float, t_hi: float) -> float:
    """Least-squares slope of entropy_mean vs time over windows in (t_lo, t_hi]."""
    span = frames_in_span(frames, t_lo, t_hi)
    if len(span) < 2:
        return math.nan
    t = np.asarray([f.time for f in span], dtype=np.float64)
    h = np.asarray([f.entropy_mean for f in span], dtype=np.float64)
    t = t - t.mean()
    denom = float((t * t).sum())
    if denom == 0.0:
        return math.nan
    return float((t * (h - h.mean())).sum() / denom)
