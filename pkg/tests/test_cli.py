import pytest

from nclayer.cli import main
from nclayer.spt import load_table


def test_spt_build_writes_loadable_table(tmp_path, capsys):
    out = tmp_path / "table.txt"
    code = main([
        "spt-build", "--budget", "8", "--layers", "2", "--packets", "2",
        "--gran", "4", "--out", str(out),
    ])
    assert code == 0
    text = capsys.readouterr().out
    assert "3-strategy table" in text
    assert "p=1.00" in text
    table = load_table(out)
    assert table.strategies == [(0, 8), (4, 4), (8, 0)]


def test_spt_build_is_byte_reproducible(tmp_path):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    args = ["spt-build", "--budget", "8", "--layers", "2", "--packets", "2", "--gran", "4"]
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_spt_build_rejects_bad_granularity(tmp_path, capsys):
    code = main([
        "spt-build", "--budget", "64", "--gran", "3",
        "--out", str(tmp_path / "t.txt"),
    ])
    assert code == 1
    assert "granularity" in capsys.readouterr().err


def test_simulate_lossless_summary(tmp_path, capsys):
    out = tmp_path / "rows.csv"
    code = main([
        "simulate", "--set", "run.gops=5", "--set", "coding.granularity=4",
        "--out", str(out),
    ])
    assert code == 0
    assert "audl: 4.000000" in capsys.readouterr().out
    assert out.read_text().count("\n") == 2


def test_simulate_same_config_appends_identical_rows(tmp_path):
    out = tmp_path / "rows.csv"
    args = ["simulate", "--set", "run.gops=5", "--set", "chain.links=0.8",
            "--seed", "3", "--out", str(out)]
    assert main(args) == 0
    assert main(args) == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 3
    assert lines[1] == lines[2]


def test_simulate_reads_config_file(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("run.gops = 4\nrun.label = filecase\n")
    assert main(["simulate", "--config", str(cfg)]) == 0
    assert "label: filecase" in capsys.readouterr().out


def test_simulate_unknown_config_key(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("run.gops = 4\nrun.turbo = yes\n")
    assert main(["simulate", "--config", str(cfg)]) == 1
    assert "line 2" in capsys.readouterr().err


def test_sweep_stdout_and_file_agree(tmp_path, capsys):
    args = ["sweep", "--set", "run.gops=5", "--pdr-grid", "0.6,1.0",
            "--modes", "NC1,NoNC1", "--reps", "1"]
    assert main(args) == 0
    stdout_lines = capsys.readouterr().out.strip().splitlines()
    out = tmp_path / "sweep.csv"
    assert main(args + ["--out", str(out)]) == 0
    assert out.read_text().strip().splitlines() == stdout_lines
    assert len(stdout_lines) == 1 + 4


def test_sweep_jobs_do_not_change_output(tmp_path):
    base = ["sweep", "--set", "run.gops=5", "--pdr-grid", "0.7",
            "--modes", "NC2-HBH,spt", "--reps", "2"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(base + ["--jobs", "1", "--out", str(a)]) == 0
    assert main(base + ["--jobs", "4", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_sweep_rejects_unknown_mode(capsys):
    assert main(["sweep", "--modes", "warp9"]) == 1
    assert "unknown sweep mode" in capsys.readouterr().err


def test_sweep_rejects_bad_grid(capsys):
    assert main(["sweep", "--pdr-grid", "0.5,nope"]) == 1


def test_selftest_passes(capsys):
    assert main(["selftest"]) == 0
    out = capsys.readouterr().out
    assert "5/5 checks passed" in out
    assert "PASS oracle-equivalence" in out


def test_selftest_fault_injection_fails(capsys):
    assert main(["selftest", "--inject-gf-fault"]) == 2
    out = capsys.readouterr().out
    assert "FAIL gf256-mul-table" in out


def test_usage_errors_exit_one():
    with pytest.raises(SystemExit) as excinfo:
        main(["no-such-command"])
    assert excinfo.value.code == 1
    with pytest.raises(SystemExit) as excinfo:
        main([])
    assert excinfo.value.code == 1
