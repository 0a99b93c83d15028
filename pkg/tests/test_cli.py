"""End-to-end command line flows on temporary files."""

import csv
import io
import json

import pytest

from tempograph.cli import main
from tempograph.evaluation import synthetic_log, synthetic_model
from tempograph.model import load_model, load_profile, save_model

from conftest import xes_text


@pytest.fixture
def workspace(tmp_path):
    log = synthetic_log(20, seed=11)
    log_path = tmp_path / "log.xes"
    log_path.write_text(xes_text(log))
    model_path = tmp_path / "model.json"
    save_model(synthetic_model(), model_path)
    return tmp_path, log_path, model_path


def mine_timed_model(workspace):
    tmp, log_path, model_path = workspace
    timed = tmp / "timed.json"
    code = main(
        [
            "mine",
            "--log", str(log_path),
            "--model", str(model_path),
            "--model-out", str(timed),
            "--profile-out", str(tmp / "profile.json"),
        ]
    )
    assert code == 0
    return timed


def test_mine_writes_profile_and_model(workspace, capsys):
    tmp, log_path, model_path = workspace
    timed = mine_timed_model(workspace)
    out = capsys.readouterr().out
    assert "duration" in out and "distance" in out
    profile = load_profile(tmp / "profile.json")
    assert len(profile) == 5  # three durations, two gaps
    model = load_model(timed)
    assert len(model.profile) == 5


def test_mine_split_and_take_are_exclusive(workspace):
    _, log_path, _ = workspace
    with pytest.raises(SystemExit):
        main(
            ["mine", "--log", str(log_path), "--split", "0.5",
             "--take-traces", "3"]
        )


def test_check_log_reports_clean(workspace, capsys):
    tmp, log_path, _ = workspace
    timed = mine_timed_model(workspace)
    report_path = tmp / "report.json"
    code = main(
        [
            "check",
            "--log", str(log_path),
            "--model", str(timed),
            "--report-out", str(report_path),
        ]
    )
    assert code == 0
    out = capsys.readouterr().out
    assert "trace case-0000: structural=0" in out
    data = json.loads(report_path.read_text())
    assert data["counters"]["traces_seen"] == 20
    assert data["counters"]["duration_deviations"] == 0


def test_check_stream_from_stdin(workspace, capsys, monkeypatch):
    tmp, log_path, _ = workspace
    timed = mine_timed_model(workspace)
    capsys.readouterr()

    main(["replay", "--log", str(log_path), "--speed", "0"])
    lines = capsys.readouterr().out
    monkeypatch.setattr("sys.stdin", io.StringIO(lines))
    code = main(["check", "--stream", "-", "--model", str(timed), "--quiet"])
    assert code == 0
    assert "120 events, 20 traces" in capsys.readouterr().out


def test_check_budget_exit_code(workspace, capsys):
    _, log_path, _ = workspace
    timed = mine_timed_model(workspace)
    code = main(
        [
            "check", "--log", str(log_path), "--model", str(timed),
            "--quiet", "--budget", "-1",
        ]
    )
    assert code == 1


def test_check_csv_and_deviation_stream(workspace):
    tmp, log_path, _ = workspace
    timed = mine_timed_model(workspace)
    csv_path = tmp / "dev.csv"
    jsonl_path = tmp / "dev.jsonl"
    main(
        [
            "check", "--log", str(log_path), "--model", str(timed), "--quiet",
            "--csv-out", str(csv_path),
            "--deviations-out", str(jsonl_path),
        ]
    )
    rows = list(csv.reader(csv_path.open()))
    assert rows[0] == ["trace", "kind", "key", "observed_s", "z", "cost", "at"]
    assert len(rows) == 1  # clean log: header only
    assert jsonl_path.read_text() == ""


def test_check_tick_argument_parsing(workspace):
    _, log_path, _ = workspace
    timed = mine_timed_model(workspace)
    assert main(
        ["check", "--log", str(log_path), "--model", str(timed),
         "--quiet", "--tick", "every:30"]
    ) == 0
    with pytest.raises(SystemExit):
        main(
            ["check", "--log", str(log_path), "--model", str(timed),
             "--tick", "sometimes"]
        )


def test_config_file_supplies_defaults(workspace, capsys):
    tmp, log_path, model_path = workspace
    config_path = tmp / "mine.json"
    config_path.write_text(json.dumps({"min_support": 9999}))
    main(
        ["mine", "--config", str(config_path), "--log", str(log_path),
         "--profile-out", str(tmp / "p.json")]
    )
    profile = load_profile(tmp / "p.json")
    # distances filtered away by the configured support floor
    assert len(profile) == 3
    # explicit flags beat the config file
    main(
        ["mine", "--config", str(config_path), "--log", str(log_path),
         "--min-support", "1", "--profile-out", str(tmp / "p2.json")]
    )
    assert len(load_profile(tmp / "p2.json")) == 5


def test_config_file_rejects_unknown_keys(workspace, tmp_path):
    _, log_path, _ = workspace
    config_path = tmp_path / "bad.json"
    config_path.write_text(json.dumps({"not_a_flag": 1}))
    with pytest.raises(SystemExit, match="unknown keys"):
        main(["mine", "--config", str(config_path), "--log", str(log_path)])


def test_replay_to_stdout(workspace, capsys):
    _, log_path, _ = workspace
    code = main(["replay", "--log", str(log_path), "--speed", "0"])
    assert code == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 120
    first = json.loads(lines[0])
    assert {"trace", "activity", "lifecycle", "ts"} <= set(first)


def test_report_renders_summary_and_csv(workspace, capsys, tmp_path):
    tmp, log_path, _ = workspace
    timed = mine_timed_model(workspace)
    report_path = tmp / "report.json"
    main(
        ["check", "--log", str(log_path), "--model", str(timed),
         "--quiet", "--report-out", str(report_path)]
    )
    capsys.readouterr()
    csv_path = tmp_path / "out.csv"
    code = main(["report", str(report_path), "--csv", str(csv_path), "--top", "2"])
    assert code == 0
    out = capsys.readouterr().out
    assert "20 traces" in out
    assert "case-" in out
    assert csv_path.exists()
