import json

import pytest

from gridplan.cli import main
from gridplan.ingest import parse_day


def _run(*argv):
    return main([str(a) for a in argv])


def test_synth_then_optimize(tmp_path, capsys):
    assert _run("synth", "--archetype", "weekday", "--seed", 1, "--out", tmp_path) == 0
    day = tmp_path / "weekday-s1.csv"
    assert parse_day(day.read_text()).label == "weekday-s1"
    out = tmp_path / "run"
    assert _run("optimize", "--in", day, "--out", out) == 0
    report = json.loads((out / "report.json").read_text())
    assert report["peak_reduction_pct"] == pytest.approx(10.0, abs=0.1)
    assert "generated_at" in report
    assert (out / "schedule.csv").exists() and (out / "events.json").exists()
    lines = capsys.readouterr().out.splitlines()
    assert all(": " in ln for ln in lines)
    assert "status: optimal" in lines


def test_set_delta_peak(tmp_path):
    assert _run("optimize", "--archetype", "weekend", "--set", "delta_peak=0.9",
                "--out", tmp_path, "--no-timestamp") == 0
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["peak_reduction_pct"] == pytest.approx(10.0, abs=0.1)
    assert "generated_at" not in report


def test_flat_low_price_day_has_no_events(tmp_path):
    day = tmp_path / "flat.csv"
    day.write_text("hour,price,load:a:critical\n" + "".join(f"{t},40,0.3\n" for t in range(24)))
    cfg = tmp_path / "cfg.txt"
    cfg.write_text("gamma = 1.0\n")
    assert _run("events", "--in", day, "--config", cfg, "--out", tmp_path / "ev") == 0
    assert json.loads((tmp_path / "ev" / "events.json").read_text()) == []


def test_config_from_environment(tmp_path, monkeypatch):
    cfg = tmp_path / "cfg.txt"
    cfg.write_text("alpha_max = 3\n")
    monkeypatch.setenv("GRIDPLAN_CONFIG", str(cfg))
    assert _run("validate-config") == 1
    monkeypatch.delenv("GRIDPLAN_CONFIG")
    assert _run("validate-config", "--out", tmp_path) == 0
    assert "delta_peak = 0.9" in (tmp_path / "config.txt").read_text()


def test_export_mps(tmp_path):
    assert _run("export-mps", "--archetype", "high-price", "--out", tmp_path) == 0
    text = (tmp_path / "model.mps").read_text()
    assert text.startswith("NAME") and text.rstrip().endswith("ENDATA")
    names = json.loads((tmp_path / "model.names.json").read_text())
    assert set(names) == {"columns", "rows"}


def test_batch_directory(tmp_path):
    days = tmp_path / "days"
    for arch in ("weekday", "weekend"):
        assert _run("synth", "--archetype", arch, "--out", days) == 0
    assert _run("batch", "--in", days, "--out", tmp_path / "b") == 0
    table = (tmp_path / "b" / "table.csv").read_text().splitlines()
    assert len(table) == 4 and table[2].startswith("weekday-s1")


@pytest.mark.parametrize("argv", [
    ["optimize", "--bogus"],
    ["frobnicate"],
    [],
    ["synth", "--archetype", "stormy", "--out", "x"],
])
def test_usage_errors_exit_1(argv, capsys):
    assert main(argv) == 1
    assert "usage" in capsys.readouterr().err


def test_data_errors_exit_1(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("hour,price,load:a:critical\n" + "".join(f"{t},40,0.3\n" for t in range(23)))
    assert _run("optimize", "--in", bad, "--out", tmp_path) == 1
    assert _run("optimize", "--in", tmp_path / "missing.csv", "--out", tmp_path) == 1
    assert _run("optimize", "--archetype", "weekday", "--set", "nope=1", "--out", tmp_path) == 1
    assert _run("optimize", "--archetype", "weekday", "--set", "t_min=9", "--out", tmp_path) == 1
    assert _run("batch", "--archetypes", "weekday,stormy", "--out", tmp_path) == 1


def test_soft_infeasible_exit_2(tmp_path):
    day = tmp_path / "spike.csv"
    rows = "".join(f"{t},80,{1.0 if t == 17 else 0.5}\n" for t in range(24))
    day.write_text("hour,price,load:a:critical\n" + rows)
    code = _run("optimize", "--in", day, "--out", tmp_path / "o", "--set", "battery.count=0",
                "--set", "delta_peak=0.6", "--set", "dr_enabled=false")
    assert code == 2
    report = json.loads((tmp_path / "o" / "report.json").read_text())
    assert report["status"] == "soft-infeasible"


def test_internal_error_exit_3(tmp_path, monkeypatch):
    import gridplan.cli as cli

    def boom(*a, **k):
        raise RuntimeError("kaboom")

    monkeypatch.setattr(cli, "run_day", boom)
    assert _run("optimize", "--archetype", "weekday", "--out", tmp_path) == 3


def test_repeat_runs_byte_identical(tmp_path):
    for k in (1, 2):
        assert _run("optimize", "--archetype", "high-price", "--seed", 3, "--no-timestamp",
                    "--out", tmp_path / f"r{k}") == 0
    for name in ("report.json", "schedule.csv", "events.json"):
        assert (tmp_path / "r1" / name).read_bytes() == (tmp_path / "r2" / name).read_bytes()
