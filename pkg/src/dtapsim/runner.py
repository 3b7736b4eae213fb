"""Seeded simulation execution: single runs, artifact output, sweeps.

Each run writes into its own directory: ``metrics.csv`` (one frame per
window), ``config.txt`` (the resolved config, re-runnable), ``summary.json``
and optionally ``policies.csv``. Sweeps run independent configs (optionally
in parallel processes) and write an ``index.csv`` of per-run summaries;
a failing run is recorded in the index and does not stop the sweep.
"""

from __future__ import annotations

import dataclasses
import gc
import json
import math
import os
import time
from dataclasses import dataclass
from multiprocessing import get_context
from pathlib import Path

from . import metrics
from .config import RunConfig, echo_config, generator_ids, learner_config, validate
from .world import World, build_grid

OUTPUT_ROOT_ENV = "DTAPSIM_OUTPUT_ROOT"

INDEX_HEADER = (
    "run_dir,algorithm,seed,eta,status,error,tasks_completed,mean_tst,"
    "final_window_atst,peak_window_atst,final_entropy_mean"
)


@dataclass
class RunResult:
    config: RunConfig
    output_dir: Path
    summary: dict
    frames: list


def default_output_root() -> Path:
    return Path(os.environ.get(OUTPUT_ROOT_ENV, "runs"))


def resolve_output_dir(cfg: RunConfig) -> Path:
    if cfg.output_dir:
        return Path(cfg.output_dir)
    root = default_output_root()
    base = f"{cfg.algorithm}-s{cfg.seed}"
    candidate = root / base
    k = 2
    while candidate.exists():
        candidate = root / f"{base}-{k}"
        k += 1
    return candidate


def _fmt(x: float) -> str:
    return "" if (isinstance(x, float) and math.isnan(x)) else f"{x:.10g}"


def _summarize(cfg: RunConfig, world: World, recorder: metrics.MetricsRecorder, wall: float) -> dict:
    frames = recorder.frames
    last = frames[-1] if frames else None
    nonempty = [f for f in frames if f.window_tasks > 0]
    peak = max(nonempty, key=lambda f: f.atst) if nonempty else None
    horizon = min(50_000, cfg.duration)
    t_end = cfg.duration
    summary = {
        "algorithm": cfg.algorithm,
        "seed": cfg.seed,
        "eta": cfg.eta,
        "alpha": cfg.alpha,
        "epsilon_floor": cfg.epsilon_floor,
        "duration": cfg.duration,
        "window": cfg.window,
        "tasks_generated": world.tasks_generated,
        "tasks_completed": world.tasks_completed,
        "mean_tst": recorder.mean_tst,
        "final_window_atst": last.atst if last else math.nan,
        "final_entropy_mean": last.entropy_mean if last else math.nan,
        "final_entropy_std": last.entropy_std if last else math.nan,
        "peak_window_atst": peak.atst if peak else math.nan,
        "peak_window_time": peak.time if peak else -1,
        "atst_last_horizon": metrics.period_atst(frames, t_end - horizon, t_end),
        "atst_rel_change_last_horizon": metrics.atst_rel_change(frames, t_end - horizon, t_end),
        "entropy_slope_last_horizon": metrics.entropy_slope(frames, t_end - horizon, t_end),
        "stats_horizon": horizon,
        "wall_seconds": wall,
    }
    return summary


def run(cfg: RunConfig, out_dir=None) -> RunResult:
    """Execute one simulation to cfg.duration and write its artifacts."""
    validate(cfg)
    out = Path(out_dir) if out_dir is not None else resolve_output_dir(cfg)
    out.mkdir(parents=True, exist_ok=True)
    cfg = dataclasses.replace(cfg, output_dir=str(out))
    (out / "config.txt").write_text(echo_config(cfg), encoding="utf-8")

    recorder = metrics.MetricsRecorder(cfg.window)
    world = World(
        topology=build_grid(cfg.grid_rows, cfg.grid_cols, cfg.adjacent_delay),
        learner_cfg=learner_config(cfg),
        generator_ids=generator_ids(cfg),
        arrival_rate=cfg.arrival_rate,
        service_rate=cfg.service_rate,
        seed=cfg.seed,
        recorder=recorder,
        hop_cap=cfg.hop_cap,
    )

    started = time.perf_counter()
    dump_file = None
    # the event loop allocates heavily but creates no reference cycles;
    # cyclic GC scans of millions of live tasks would dominate the run
    gc_was_enabled = gc.isenabled()
    gc.disable()
    try:
        with open(out / "metrics.csv", "w", encoding="utf-8", newline="\n") as sink:
            sink.write(metrics.CSV_HEADER + "\n")
            if cfg.dump_policies:
                dump_file = open(out / "policies.csv", "w", encoding="utf-8", newline="\n")
                dump_file.write("time,agent_id,action_index,probability\n")
            window_index = 0
            for tick in range(1, cfg.duration + 1):
                world.step()
                if tick % cfg.window == 0:
                    window_index += 1
                    emean, estd = metrics.entropy_snapshot(a.policy for a in world.agents)
                    frame = recorder.make_frame(tick, emean, estd)
                    metrics.emit_frame(frame, sink)
                    if dump_file is not None and window_index % cfg.dump_every == 0:
                        _dump_policies(dump_file, tick, world)
    finally:
        if dump_file is not None:
            dump_file.close()
        if gc_was_enabled:
            gc.enable()

    wall = time.perf_counter() - started
    summary = _summarize(cfg, world, recorder, wall)
    (out / "summary.json").write_text(
        json.dumps(summary, indent=2, allow_nan=True) + "\n", encoding="utf-8"
    )
    return RunResult(config=cfg, output_dir=out, summary=summary, frames=recorder.frames)


def _dump_policies(sink, tick: int, world: World) -> None:
    for agent in world.agents:
        for k, prob in enumerate(agent.policy):
            sink.write(f"{tick},{agent.id},{k},{prob:.10g}\n")
    sink.flush()


def _sweep_worker(args):
    cfg, out_dir = args
    try:
        result = run(cfg, out_dir=out_dir)
        return (out_dir, cfg, "ok", "", result.summary)
    except Exception as exc:  # noqa: BLE001 - a failed run must not kill the sweep
        return (out_dir, cfg, "failed", f"{type(exc).__name__}: {exc}", None)


def sweep(
    base: RunConfig,
    seeds,
    algorithms=None,
    etas=None,
    out_root=None,
    parallel: int = 1,
) -> Path:
    """Cartesian product of (algorithm, eta, seed) runs plus an index CSV."""
    seeds = list(seeds)
    if not seeds:
        raise ValueError("sweep needs at least one seed")
    algorithms = list(algorithms) if algorithms else [base.algorithm]
    etas = list(etas) if etas else [base.eta]
    root = Path(out_root) if out_root is not None else resolve_output_dir(
        dataclasses.replace(base, output_dir="")
    ).parent / "sweep"
    root.mkdir(parents=True, exist_ok=True)

    jobs = []
    for algorithm in algorithms:
        for eta in etas:
            for seed in seeds:
                cfg = dataclasses.replace(
                    base, algorithm=algorithm, eta=eta, seed=seed, output_dir=""
                )
                validate(cfg)
                name = f"{algorithm}-s{seed}" if len(etas) == 1 else f"{algorithm}-eta{eta:g}-s{seed}"
                jobs.append((cfg, root / name))

    if parallel > 1:
        with get_context("spawn").Pool(parallel) as pool:
            outcomes = pool.map(_sweep_worker, jobs)
    else:
        outcomes = [_sweep_worker(job) for job in jobs]

    index_path = root / "index.csv"
    with open(index_path, "w", encoding="utf-8", newline="\n") as f:
        f.write(INDEX_HEADER + "\n")
        for out_dir, cfg, status, error, summary in outcomes:
            if summary is None:
                stats = ",,,,"
            else:
                stats = ",".join(
                    [
                        str(summary["tasks_completed"]),
                        _fmt(summary["mean_tst"]),
                        _fmt(summary["final_window_atst"]),
                        _fmt(summary["peak_window_atst"]),
                        _fmt(summary["final_entropy_mean"]),
                    ]
                )
            error = error.replace(",", ";")
            f.write(
                f"{Path(out_dir).name},{cfg.algorithm},{cfg.seed},{cfg.eta:g},{status},{error},{stats}\n"
            )
    return index_path
