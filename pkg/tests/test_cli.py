from importlib import resources

import pytest

from coresleep.cli import main


def test_simulate_prints_summary(capsys):
    code = main([
        "simulate", "--policy", "la_realloc", "--cores", "2", "--util", "0.3",
        "--tasks", "3:5", "--duration", "200", "--seed", "5",
    ])
    out = capsys.readouterr().out
    assert code == 0
    assert "energy_j=" in out
    assert "wakes=" in out


def test_simulate_writes_trace(tmp_path, capsys):
    trace = tmp_path / "trace.csv"
    code = main([
        "simulate", "--tasks", "3:5", "--duration", "200", "--seed", "5",
        "--trace", str(trace),
    ])
    capsys.readouterr()
    assert code == 0
    assert trace.read_text().splitlines()[0] == "time_ns,core,event,task,detail"


def test_sweep_writes_csv_and_is_reproducible(tmp_path, capsys):
    args = [
        "sweep", "--sweep", "U=0.2:0.4:0.2", "--runs", "2", "--duration", "300",
        "--tasks", "3:5", "--seed", "7",
    ]
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(args + ["--out", str(out1)]) == 0
    assert main(args + ["--out", str(out2)]) == 0
    capsys.readouterr()
    assert out1.read_bytes() == out2.read_bytes()
    lines = [ln for ln in out1.read_text().splitlines() if not ln.startswith("#")]
    assert lines[0].startswith("axis,value,policy")
    assert len(lines) == 1 + 2 * 3  # header + 2 values x 3 policies


def test_sweep_m_axis_grid(tmp_path, capsys):
    out = tmp_path / "m.csv"
    code = main([
        "sweep", "--sweep", "m=2:4:2", "--runs", "1", "--duration", "200",
        "--tasks", "3:5", "--out", str(out),
    ])
    capsys.readouterr()
    assert code == 0
    assert "m,2," in out.read_text()


def test_sweep_bare_axis_uses_canonical_grid(tmp_path, capsys):
    from coresleep.harness import DEFAULT_GRIDS

    out = tmp_path / "m_default.csv"
    code = main([
        "sweep", "--sweep", "m", "--runs", "1", "--duration", "200",
        "--util", "0.2", "--tasks", "4:6", "--out", str(out),
    ])
    capsys.readouterr()
    assert code == 0
    data = [ln for ln in out.read_text().splitlines() if not ln.startswith("#")]
    values = sorted({int(ln.split(",")[1]) for ln in data[1:]})
    assert tuple(values) == DEFAULT_GRIDS["m"]


def test_explicit_constants_file(capsys):
    ref = resources.files("coresleep").joinpath("data/cmos70nm.conf")
    with resources.as_file(ref) as path:
        code = main([
            "simulate", "--constants", str(path), "--tasks", "3:4",
            "--duration", "100", "--seed", "2",
        ])
    capsys.readouterr()
    assert code == 0


def test_missing_constants_file_fails(capsys):
    code = main(["simulate", "--constants", "/nonexistent.conf"])
    err = capsys.readouterr().err
    assert code == 1
    assert "error:" in err


def test_bad_axis_fails(tmp_path, capsys):
    code = main([
        "sweep", "--sweep", "frequency=1:2:1", "--runs", "1",
        "--out", str(tmp_path / "x.csv"),
    ])
    err = capsys.readouterr().err
    assert code == 1
    assert "error:" in err


def test_bad_grid_syntax_exits_nonzero(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["sweep", "--sweep", "U=0.1", "--out", str(tmp_path / "x.csv")])
    assert exc.value.code != 0
