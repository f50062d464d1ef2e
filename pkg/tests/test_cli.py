import numpy as np
import pytest

from avlab.cli import main
from avlab.metrics import import_trace
from avlab.rl.checkpoint import load_checkpoint

TINY_CONFIG = """\
[training]
episodes = 3
horizon = 60

[ppo]
batch_size = 120
minibatch_size = 60
epochs_per_batch = 2

[sac]
warmup_steps = 30
batch_size = 16
"""

ZERO_NOISE_CONFIG = """\
[noise]
Q = [[0.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]]
R = [[0.0, 0.0], [0.0, 0.0]]

[training]
horizon = 200
"""


@pytest.fixture
def tiny_config(tmp_path):
    p = tmp_path / "tiny.toml"
    p.write_text(TINY_CONFIG)
    return p


@pytest.fixture
def trained(tmp_path, tiny_config):
    out = tmp_path / "policy.ckpt"
    rc = main(["train", "--config", str(tiny_config), "--algo", "ppo",
               "--out", str(out), "--seed", "0"])
    assert rc == 0
    return tiny_config, out


def test_missing_config_exits_2(tmp_path, capsys):
    rc = main(["train", "--config", str(tmp_path / "ghost.toml"),
               "--out", str(tmp_path / "x.ckpt")])
    assert rc == 2
    assert "ghost.toml" in capsys.readouterr().err


def test_train_writes_tagged_checkpoint_and_curve(trained):
    _, out = trained
    _, header = load_checkpoint(out)
    assert header["algo"] == "ppo"
    curve = out.parent / (out.name + ".curve.csv")
    lines = curve.read_text().splitlines()
    assert lines[0] == "episode,reward"
    assert len(lines) == 4  # header + 3 episodes


def test_train_same_seed_byte_identical_curves(tmp_path, tiny_config):
    curves = []
    for name in ("a", "b"):
        out = tmp_path / f"{name}.ckpt"
        curve = tmp_path / f"{name}.csv"
        assert main(["train", "--config", str(tiny_config), "--out", str(out),
                     "--seed", "7", "--curve", str(curve)]) == 0
        curves.append(curve.read_bytes())
    assert curves[0] == curves[1]


def test_eval_zero_episodes_exits_2(trained, capsys):
    cfg, out = trained
    rc = main(["eval", "--config", str(cfg), "--policy", str(out), "--episodes", "0"])
    assert rc == 2


def test_eval_config_mismatch_exits_2(tmp_path, trained, capsys):
    _, out = trained
    other = tmp_path / "other.toml"
    other.write_text(TINY_CONFIG + "\n# changed\n")
    rc = main(["eval", "--config", str(other), "--policy", str(out), "--episodes", "1"])
    assert rc == 2
    assert "mismatch" in capsys.readouterr().err


def test_eval_untrained_policy_reports_finite_metrics(tmp_path, capsys):
    cfg = tmp_path / "cfg.toml"
    cfg.write_text(TINY_CONFIG.replace("episodes = 3", "episodes = 0"))
    out = tmp_path / "raw.ckpt"
    assert main(["train", "--config", str(cfg), "--out", str(out)]) == 0
    report = tmp_path / "report.txt"
    trace = tmp_path / "trace.csv"
    rc = main(["eval", "--config", str(cfg), "--policy", str(out), "--episodes", "2",
               "--report", str(report), "--trace", str(trace)])
    assert rc == 0
    text = report.read_text()
    values = {
        line.split(": ")[0]: line.split(": ")[1]
        for line in text.strip().splitlines()
        if ": " in line
    }
    for key in ("recall", "energy", "tracking_error"):
        assert np.isfinite(float(values[key]))
    assert "config_hash" in values
    assert len(import_trace(trace)) == 60


def test_eval_scenario_and_jobs_merge(trained, tmp_path):
    cfg, out = trained
    reports = []
    for jobs in ("1", "2"):
        rp = tmp_path / f"r{jobs}.txt"
        rc = main(["eval", "--config", str(cfg), "--policy", str(out), "--episodes", "2",
                   "--scenario", "short", "--jobs", jobs, "--report", str(rp)])
        assert rc == 0
        reports.append(rp.read_text())
    assert reports[0] == reports[1]
    assert "scenario: short" in reports[0]


def test_baseline_reports_hash_and_costs(tiny_config, tmp_path, capsys):
    rp = tmp_path / "base.txt"
    rc = main(["baseline", "--config", str(tiny_config), "--episodes", "2",
               "--report", str(rp)])
    assert rc == 0
    text = rp.read_text()
    assert "config_hash:" in text
    assert "detector_flag_rate:" in text
    assert "tracking_cost:" in text


def test_baseline_zero_noise_flag_rate_is_zero(tmp_path):
    cfg = tmp_path / "zero.toml"
    cfg.write_text(ZERO_NOISE_CONFIG)
    rp = tmp_path / "zero.txt"
    assert main(["baseline", "--config", str(cfg), "--episodes", "2",
                 "--report", str(rp)]) == 0
    line = [l for l in rp.read_text().splitlines() if l.startswith("detector_flag_rate")][0]
    assert float(line.split(": ")[1]) == 0.0


def test_plot_round_trip(trained, tmp_path):
    cfg, out = trained
    trace = tmp_path / "t.csv"
    assert main(["eval", "--config", str(cfg), "--policy", str(out), "--episodes", "1",
                 "--trace", str(trace)]) == 0
    svg = tmp_path / "t.svg"
    assert main(["plot", "--trace", str(trace), "--out", str(svg)]) == 0
    assert svg.stat().st_size > 1000


def test_plot_malformed_csv_names_row(trained, tmp_path, capsys):
    cfg, out = trained
    trace = tmp_path / "t.csv"
    assert main(["eval", "--config", str(cfg), "--policy", str(out), "--episodes", "1",
                 "--trace", str(trace)]) == 0
    with open(trace, "a") as fh:
        fh.write("oops\n")
    svg = tmp_path / "t.svg"
    rc = main(["plot", "--trace", str(trace), "--out", str(svg)])
    assert rc == 2
    assert "row 61" in capsys.readouterr().err


def test_invalid_log_level_exits_2(monkeypatch, tmp_path):
    monkeypatch.setenv("AVLAB_LOG", "chatty")
    rc = main(["baseline", "--episodes", "1"])
    assert rc == 2
