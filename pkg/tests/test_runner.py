import json

import pytest

import dtapsim.runner as runner_mod
from dtapsim.cli import main as cli_main
from dtapsim.config import make_config
from dtapsim.metrics import CSV_HEADER, load_metrics_csv
from dtapsim.runner import resolve_output_dir, run, sweep


def tiny_config(**overrides):
    base = {
        "grid_rows": 4,
        "grid_cols": 4,
        "generator_rows": 2,
        "generator_cols": 2,
        "arrival_rate": 0.3,
        "service_rate": 0.2,
        "duration": 2000,
        "window": 500,
        "seed": 5,
    }
    base.update(overrides)
    return make_config(overrides=base)


def test_run_writes_all_artifacts(tmp_path):
    result = run(tiny_config(), out_dir=tmp_path / "r1")
    out = result.output_dir
    assert (out / "config.txt").exists()
    assert (out / "summary.json").exists()
    frames = load_metrics_csv(out / "metrics.csv")
    assert len(frames) == 4  # duration / window
    assert frames[-1].time == 2000
    summary = json.loads((out / "summary.json").read_text())
    for key in (
        "tasks_completed",
        "mean_tst",
        "final_window_atst",
        "peak_window_atst",
        "final_entropy_mean",
    ):
        assert key in summary
    assert summary["tasks_completed"] == frames[-1].tasks_completed_total
    with open(out / "metrics.csv", encoding="utf-8") as f:
        assert f.readline().strip() == CSV_HEADER


def test_same_seed_gives_byte_identical_metrics(tmp_path):
    a = run(tiny_config(), out_dir=tmp_path / "a")
    b = run(tiny_config(), out_dir=tmp_path / "b")
    bytes_a = (a.output_dir / "metrics.csv").read_bytes()
    bytes_b = (b.output_dir / "metrics.csv").read_bytes()
    assert bytes_a == bytes_b
    c = run(tiny_config(seed=6), out_dir=tmp_path / "c")
    assert (c.output_dir / "metrics.csv").read_bytes() != bytes_a


def test_rerun_from_echoed_config_reproduces_run(tmp_path):
    a = run(tiny_config(), out_dir=tmp_path / "a")
    cfg = make_config(config_file=a.output_dir / "config.txt")
    b = run(cfg, out_dir=tmp_path / "b")
    assert (a.output_dir / "metrics.csv").read_bytes() == (
        b.output_dir / "metrics.csv"
    ).read_bytes()


def test_policy_dump_emitted_when_enabled(tmp_path):
    result = run(tiny_config(dump_policies=True, dump_every=2), out_dir=tmp_path / "d")
    dump = result.output_dir / "policies.csv"
    lines = dump.read_text().strip().splitlines()
    assert lines[0] == "time,agent_id,action_index,probability"
    times = {int(line.split(",")[0]) for line in lines[1:]}
    assert times == {1000, 2000}  # every 2nd window


def test_output_root_env_var(tmp_path, monkeypatch):
    monkeypatch.setenv(runner_mod.OUTPUT_ROOT_ENV, str(tmp_path / "root"))
    cfg = tiny_config()
    out = resolve_output_dir(cfg)
    assert out.parent == tmp_path / "root"
    out.mkdir(parents=True)
    assert resolve_output_dir(cfg) != out  # collision avoided


def test_sweep_runs_product_and_writes_index(tmp_path):
    index = sweep(
        tiny_config(duration=800, window=400),
        seeds=[1, 2],
        algorithms=["wpl", "giga-wolf"],
        out_root=tmp_path / "sw",
    )
    lines = index.read_text().strip().splitlines()
    assert len(lines) == 5  # header + 4 runs
    names = {line.split(",")[0] for line in lines[1:]}
    assert names == {"wpl-s1", "wpl-s2", "giga-wolf-s1", "giga-wolf-s2"}
    for name in names:
        assert (tmp_path / "sw" / name / "metrics.csv").exists()
    statuses = {line.split(",")[4] for line in lines[1:]}
    assert statuses == {"ok"}


def test_sweep_records_failures_and_continues(tmp_path, monkeypatch):
    real_run = runner_mod.run

    def flaky(cfg, out_dir=None):
        if cfg.seed == 2:
            raise OSError("disk full")
        return real_run(cfg, out_dir=out_dir)

    monkeypatch.setattr(runner_mod, "run", flaky)
    index = sweep(tiny_config(duration=600, window=300), seeds=[1, 2, 3], out_root=tmp_path / "sw")
    rows = index.read_text().strip().splitlines()[1:]
    by_seed = {row.split(",")[2]: row.split(",")[4] for row in rows}
    assert by_seed == {"1": "ok", "2": "failed", "3": "ok"}
    failed_row = [r for r in rows if r.split(",")[4] == "failed"][0]
    assert "disk full" in failed_row


def test_cli_run_and_exit_codes(tmp_path, capsys):
    out = tmp_path / "cli-run"
    code = cli_main(
        [
            "run",
            "--grid-rows", "4", "--grid-cols", "4",
            "--generator-rows", "2", "--generator-cols", "2",
            "--arrival-rate", "0.3", "--service-rate", "0.2",
            "--duration", "1000", "--window", "500",
            "--seed", "3", "--out", str(out),
        ]
    )
    assert code == 0
    assert (out / "metrics.csv").exists()
    assert "run complete" in capsys.readouterr().out

    code = cli_main(["run", "--duration", "0", "--out", str(tmp_path / "x")])
    assert code == 1
    assert "config error" in capsys.readouterr().err


def test_cli_rejects_unknown_config_key(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("not_a_key=1\n", encoding="utf-8")
    assert cli_main(["run", "--config", str(bad)]) == 1
    assert "not_a_key" in capsys.readouterr().err


def test_cli_sweep(tmp_path):
    out = tmp_path / "cli-sweep"
    code = cli_main(
        [
            "sweep",
            "--grid-rows", "4", "--grid-cols", "4",
            "--generator-rows", "2", "--generator-cols", "2",
            "--arrival-rate", "0.3", "--service-rate", "0.2",
            "--duration", "600", "--window", "300",
            "--seeds", "1..2", "--out", str(out),
        ]
    )
    assert code == 0
    assert (out / "index.csv").exists()
    assert len((out / "index.csv").read_text().strip().splitlines()) == 3


def test_cli_bad_seed_range(capsys):
    assert cli_main(["sweep", "--seeds", "5..x"]) == 1
    assert "seed range" in capsys.readouterr().err
