import subprocess
import sys
from pathlib import Path

import pytest

from opiniond.cli import main


def _files(root: Path) -> dict[str, bytes]:
    return {str(p.relative_to(root)): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


@pytest.fixture(scope="module")
def fig1c_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("run") / "X"
    assert main(["run", "--preset", "fig1-c", "--seed", "7", "--out", str(out)]) == 0
    return out


def test_run_layout(fig1c_run):
    sd = fig1c_run / "seed-7"
    assert (fig1c_run / "config.toml").is_file()
    assert (fig1c_run / "report.txt").is_file()
    steps = [0, 1_000_000, 2_000_000, 3_000_000, 4_000_000, 5_000_000]
    for t in steps:
        assert (sd / f"snapshot-{t}.opinions.csv").read_text().startswith("node_id,opinion\n0,")
        assert (sd / f"snapshot-{t}.edges.txt").is_file()
    hist = (sd / "histograms.csv").read_text().splitlines()
    assert hist[0] == "step,bin_low,bin_high,mass"
    assert len(hist) == 1 + 20 * len(steps)
    report = (fig1c_run / "report.txt").read_text()
    assert "[seed-7]" in report and "[seed-7.convergence]" in report and "converged = " in report


def test_opinions_have_full_precision(fig1c_run):
    line = (fig1c_run / "seed-7" / "snapshot-0.opinions.csv").read_text().splitlines()[1]
    value = line.split(",")[1]
    assert float(repr(float(value))) == float(value)
    assert len(value.replace("0.", "", 1).lstrip("0")) >= 15


def test_analyze_reproduces_run(fig1c_run, tmp_path):
    before = _files(fig1c_run)
    assert main(["analyze", "--in", str(fig1c_run), "--out", str(tmp_path / "A")]) == 0
    assert _files(fig1c_run) == before
    assert (tmp_path / "A" / "seed-7" / "histograms.csv").read_bytes() == before["seed-7/histograms.csv"]
    assert (tmp_path / "A" / "report.txt").read_bytes() == before["report.txt"]


def test_analyze_to_stdout(fig1c_run, capsys):
    assert main(["analyze", "--in", str(fig1c_run)]) == 0
    assert capsys.readouterr().out == (fig1c_run / "report.txt").read_text()


def test_analyze_refuses_own_input(fig1c_run):
    before = _files(fig1c_run)
    assert main(["analyze", "--in", str(fig1c_run), "--out", str(fig1c_run)]) == 1
    assert _files(fig1c_run) == before


def test_rerun_byte_identical(tmp_path):
    args = ["run", "--preset", "ex1-powerlaw", "--seed", "3", "--seeds", "2", "--steps", "20000"]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--out", str(tmp_path / "b")]) == 0
    a, b = _files(tmp_path / "a"), _files(tmp_path / "b")
    a.pop("config.toml"), b.pop("config.toml")  # records its own output_dir
    assert a == b
    assert {k.split("/")[0] for k in a if "/" in k} == {"seed-3", "seed-4"}


def test_threads_do_not_change_output(tmp_path, monkeypatch):
    args = ["run", "--preset", "fig1-a", "--seed", "1", "--seeds", "3", "--steps", "5000"]
    monkeypatch.setenv("OPINIOND_THREADS", "1")
    main(args + ["--out", str(tmp_path / "one")])
    monkeypatch.setenv("OPINIOND_THREADS", "3")
    main(args + ["--out", str(tmp_path / "three")])
    a, b = _files(tmp_path / "one"), _files(tmp_path / "three")
    a.pop("config.toml"), b.pop("config.toml")
    assert a == b


def test_run_from_config(tmp_path):
    cfg = tmp_path / "c.toml"
    cfg.write_text("seed = 4\ntotal_steps = 3000\nsnapshot_schedule = [0, 1000, 3000]\n"
                   "rewire_probe_limit = 0\nmutation_target = \"interacting\"\n"
                   "[params]\nn = 50\nk_avg = 4\nd = 0.3\nw = 0.5\np = 0.2\n")
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
    assert sorted(p.name for p in (tmp_path / "o" / "seed-4").glob("*.opinions.csv")) == [
        "snapshot-0.opinions.csv", "snapshot-1000.opinions.csv", "snapshot-3000.opinions.csv"]
    assert 'mutation_target = "interacting"' in (tmp_path / "o" / "config.toml").read_text()


def test_bad_config_exits_nonzero(tmp_path, capsys):
    cfg = tmp_path / "c.toml"
    cfg.write_text("total_steps = 10\n[params]\nn = 50\nk_avg = 4\nd = 1.5\nw = 0.5\np = 0.2\n")
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 1
    assert "d must be in (0,1]" in capsys.readouterr().err


def test_missing_input_exits_nonzero(tmp_path):
    assert main(["analyze", "--in", str(tmp_path / "nope")]) == 1


def test_unknown_flag_exits_2():
    proc = subprocess.run([sys.executable, "-m", "opiniond.cli", "run", "--bogus"], capture_output=True, text=True)
    assert proc.returncode == 2
    assert "usage:" in proc.stderr


def test_sweep_grid(tmp_path):
    out = tmp_path / "s"
    assert main(["sweep", "--preset", "fig1-a", "--seed", "0", "--seeds", "2", "--steps", "4000",
                 "--d", "0.1,0.25", "--p", "0.1", "--w", "0,0.5", "--out", str(out)]) == 0
    cells = sorted(p.name for p in out.iterdir() if p.is_dir())
    assert len(cells) == 4
    rows = (out / "sweep.csv").read_text().splitlines()
    assert rows[0].startswith("cell,d,p,w,seed")
    assert len(rows) == 1 + 4 * 2
    for c in cells:
        assert (out / c / "seed-1" / "histograms.csv").is_file()


def test_compare(tmp_path, capsys):
    out = tmp_path / "c"
    assert main(["compare", "--preset-a", "fig1-a", "--preset-b", "fig1-a", "--seeds", "3", "--out", str(out)]) == 0
    text = (out / "report.txt").read_text()
    assert text == capsys.readouterr().out
    assert "excess_sigma = 0\n" in text
    assert len((out / "distances.csv").read_text().splitlines()) == 7


def test_compare_mismatch_exits_nonzero(tmp_path):
    assert main(["compare", "--preset-a", "fig1-a", "--preset-b", "fig1-b", "--out", str(tmp_path / "c")]) == 1
