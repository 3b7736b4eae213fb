import io
import math

import numpy as np
import pytest

from dtapsim.metrics import (
    CSV_HEADER,
    MetricsFrame,
    MetricsRecorder,
    atst_rel_change,
    emit_frame,
    empirical_policy,
    entropy_at,
    entropy_slope,
    entropy_snapshot,
    format_frame,
    frames_in_span,
    load_metrics_csv,
    period_atst,
)
from dtapsim.policy import uniform_policy


def test_window_mean_is_arithmetic_mean():
    rec = MetricsRecorder(window=1000)
    for tst in (10.0, 20.0, 30.0):
        rec.record_completion(tst, 500.0)
    count, atst = rec.window_stats(1)
    assert count == 3
    assert atst == 20.0


def test_empty_window_reports_nan_and_zero():
    rec = MetricsRecorder(window=1000)
    count, atst = rec.window_stats(2)
    assert count == 0 and math.isnan(atst)


def test_window_attribution_boundaries():
    rec = MetricsRecorder(window=1000)
    rec.record_completion(1.0, 1000.0)  # exactly on the boundary: window 1
    rec.record_completion(1.0, 1000.0 + 2.0**-16)  # just past it: window 2
    assert rec.window_stats(1)[0] == 1
    assert rec.window_stats(2)[0] == 1


def test_every_completion_lands_in_exactly_one_window():
    rng = np.random.default_rng(20)
    rec = MetricsRecorder(window=100)
    times = rng.uniform(0.001, 5000, 2000)
    for t in times:
        rec.record_completion(1.0, float(t))
    total = sum(rec.window_stats(i)[0] for i in range(1, 52))
    assert total == 2000 == rec.total_completed


def test_full_run_mean_equals_task_weighted_window_mean():
    rng = np.random.default_rng(4)
    rec = MetricsRecorder(window=50)
    for _ in range(5000):
        rec.record_completion(float(rng.exponential(30)), float(rng.uniform(0, 2000)))
    weighted = 0.0
    tasks = 0
    for idx in range(1, 41):
        count, atst = rec.window_stats(idx)
        if count:
            weighted += atst * count
            tasks += count
    assert tasks == rec.total_completed
    assert rec.mean_tst == pytest.approx(weighted / tasks, rel=1e-12)


def test_recorder_rejects_negative_tst():
    rec = MetricsRecorder(window=10)
    with pytest.raises(ValueError):
        rec.record_completion(-1.0, 5.0)


def test_replaying_a_trace_reproduces_identical_frames():
    def replay():
        rec = MetricsRecorder(window=100)
        rng = np.random.default_rng(9)
        frames = []
        for t in range(1, 1001):
            if rng.random() < 0.3:
                rec.record_completion(float(rng.exponential(20)), float(t))
            if t % 100 == 0:
                frames.append(rec.make_frame(t, 1.25, 0.5))
        return frames

    assert replay() == replay()


def test_entropy_snapshot_uniform_and_deterministic():
    mean, std = entropy_snapshot([uniform_policy(5)] * 4)
    assert mean == pytest.approx(math.log2(5), abs=1e-12)
    assert std == 0.0
    mean, std = entropy_snapshot([np.array([1.0, 0.0, 0.0])] * 3)
    assert mean == 0.0 and std == 0.0


def test_entropy_snapshot_two_point_population():
    policies = [np.array([0.5, 0.5])] * 2 + [np.array([1.0, 0.0])] * 2
    mean, std = entropy_snapshot(policies)
    assert mean == pytest.approx(0.5)
    assert std == pytest.approx(0.5)  # population, not sample, deviation


def test_empirical_policy_examples():
    np.testing.assert_array_equal(empirical_policy([10, 0, 0]), [1.0, 0.0, 0.0])
    np.testing.assert_array_equal(empirical_policy([25, 25, 50]), [0.25, 0.25, 0.5])
    with pytest.raises(ValueError):
        empirical_policy([0, 0, 0])
    with pytest.raises(ValueError):
        empirical_policy([-1, 2])


def test_empirical_policy_recovers_sampling_distribution():
    rng = np.random.default_rng(14)
    p = np.array([0.1, 0.6, 0.3])
    counts = np.bincount(rng.choice(3, size=100_000, p=p), minlength=3)
    np.testing.assert_allclose(empirical_policy(counts), p, atol=0.01)


def test_frame_formatting_contract():
    frame = MetricsFrame(1000, 42, 95.5, 2.1, 0.31, 42)
    assert format_frame(frame) == "1000,42,95.5,2.1,0.31,42"
    blank = MetricsFrame(2000, 0, math.nan, 2.05, 0.3, 42)
    assert format_frame(blank) == "2000,0,,2.05,0.3,42"


def test_emit_and_load_round_trip():
    frames = [
        MetricsFrame(100, 3, 12.25, 2.0, 0.125, 3),
        MetricsFrame(200, 0, math.nan, 1.5, 0.25, 3),
        MetricsFrame(300, 1, 7.0625, 1.0, 0.0, 4),
    ]
    sink = io.StringIO()
    sink.write(CSV_HEADER + "\n")
    for f in frames:
        emit_frame(f, sink)
    text = sink.getvalue()
    assert text.count("\n") == 4
    path_sink = io.StringIO(text)

    import tempfile, pathlib

    with tempfile.TemporaryDirectory() as d:
        p = pathlib.Path(d) / "metrics.csv"
        p.write_text(text, encoding="utf-8")
        loaded = load_metrics_csv(p)
    assert len(loaded) == 3
    for a, b in zip(loaded, frames):
        assert a.time == b.time and a.window_tasks == b.window_tasks
        assert (math.isnan(a.atst) and math.isnan(b.atst)) or a.atst == b.atst
        assert a.entropy_mean == b.entropy_mean


def test_load_rejects_unknown_header(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("time,foo\n1,2\n", encoding="utf-8")
    with pytest.raises(ValueError):
        load_metrics_csv(bad)


def test_one_frame_per_window_over_long_horizon():
    rec = MetricsRecorder(window=1000)
    for t in range(1, 600_001):
        if t % 1000 == 0:
            rec.make_frame(t, 1.0, 0.0)
    assert len(rec.frames) == 600


def _synthetic_frames():
    # entropy falls linearly 2.0 -> 1.0; atst flat 50 with task counts 10
    frames = []
    for k in range(1, 101):
        t = k * 100
        frames.append(MetricsFrame(t, 10, 50.0, 2.0 - 0.01 * k, 0.1, 10 * k))
    return frames


def test_series_helpers_on_synthetic_frames():
    frames = _synthetic_frames()
    assert len(frames_in_span(frames, 0, 10_000)) == 100
    assert period_atst(frames, 0, 10_000) == pytest.approx(50.0)
    assert atst_rel_change(frames, 0, 10_000) == pytest.approx(0.0, abs=1e-12)
    assert entropy_at(frames, 5000) == pytest.approx(2.0 - 0.01 * 50)
    slope = entropy_slope(frames, 0, 10_000)
    assert slope == pytest.approx(-0.01 / 100, rel=1e-9)


def test_period_atst_task_weighting():
    frames = [
        MetricsFrame(100, 1, 10.0, 1.0, 0.0, 1),
        MetricsFrame(200, 3, 30.0, 1.0, 0.0, 4),
        MetricsFrame(300, 0, math.nan, 1.0, 0.0, 4),
    ]
    assert period_atst(frames, 0, 300) == pytest.approx((10 + 3 * 30) / 4)
    assert math.isnan(period_atst(frames, 200, 300))
