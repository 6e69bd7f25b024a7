import csv

import pytest

from icnsim.cli import main
from icnsim.metrics import SUMMARY_COLUMNS, TIMESERIES_COLUMNS

SWEEPY = """\
[run]
scenario tiny
strategy sifah
duration 600ms
seed 3
mil 200ms

[nodes]
r0 router
r1 router
r2 router
cons consumer
prod producer

[links]
cons r0 1ms 0.0
r0 r1 10ms 0.0
r1 r2 10ms 0.0
r2 prod 1ms 0.0

[fib]
r0 /a r1 3 1
r1 /a r2 2 1
r2 /a prod 1 1
r0 /b r1 7 1
r1 /b r0 7 1

[consumers]
cons rate=20.0 prefixes=/a:1.0,/b:0.0 stop=200ms

[producers]
prod prefixes=/a,/b payload=8

[sweep]
loop_prefix /b
fractions 0.0 1.0
"""


@pytest.fixture
def sweepy(tmp_path):
    path = tmp_path / "tiny.txt"
    path.write_text(SWEEPY)
    return str(path)


def _read(path):
    with open(path, newline="") as handle:
        return list(csv.DictReader(handle))


def test_run_writes_summary_and_timeseries(tmp_path, sweepy):
    out = tmp_path / "out"
    assert main(["run", sweepy, "--out-dir", str(out)]) == 0
    rows = _read(out / "summary.csv")
    assert len(rows) == 1
    assert list(rows[0].keys()) == SUMMARY_COLUMNS
    assert rows[0]["scenario"] == "tiny"
    series = _read(out / "timeseries.csv")
    assert list(series[0].keys()) == TIMESERIES_COLUMNS


def test_run_bundled_by_name(tmp_path):
    out = tmp_path / "out"
    assert main(["run", "fig2_sifah", "--out-dir", str(out), "--trace"]) == 0
    trace = out / "fig2_sifah_sifah.trace"
    assert trace.exists()
    assert trace.read_text().startswith("0 cy gen /content/seq/0")


def test_run_missing_file_is_an_error(tmp_path, capsys):
    assert main(["run", str(tmp_path / "nope.txt")]) == 2
    assert "not found" in capsys.readouterr().err


def test_parse_error_exits_nonzero(tmp_path, capsys):
    path = tmp_path / "bad.txt"
    path.write_text(SWEEPY.replace("[fib]", "[fibz]"))
    assert main(["run", str(path)]) == 2
    assert "unknown section" in capsys.readouterr().err


def test_inconsistent_topology_exits_nonzero(tmp_path, capsys):
    path = tmp_path / "bad.txt"
    path.write_text(SWEEPY.replace("r2 /a prod 1 1", "r2 /a ghost 1 1"))
    assert main(["run", str(path)]) == 2
    assert "no link to next hop" in capsys.readouterr().err


def test_duplicate_rank_exits_nonzero(tmp_path, capsys):
    path = tmp_path / "bad.txt"
    path.write_text(SWEEPY.replace("r0 /b r1 7 1", "r0 /a r1 7 1"))
    assert main(["run", str(path)]) == 2
    assert "duplicate rank" in capsys.readouterr().err


def test_check_validates_without_output(tmp_path, sweepy, capsys):
    out = tmp_path / "out"
    assert main(["run", sweepy, "--check", "--out-dir", str(out)]) == 0
    assert "config ok" in capsys.readouterr().out
    assert not out.exists()


def test_sweep_runs_cross_product(tmp_path, sweepy):
    out = tmp_path / "out"
    assert main(["sweep", sweepy, "--out-dir", str(out)]) == 0
    rows = _read(out / "summary.csv")
    assert len(rows) == 6  # 3 strategies x 2 fractions
    assert {row["strategy"] for row in rows} == {"ccn", "ndn", "sifah"}
    assert {row["loop_fraction"] for row in rows} == {"0.000000", "1.000000"}


def test_sweep_single_strategy_degenerates(tmp_path, sweepy):
    out = tmp_path / "out"
    assert main(["sweep", sweepy, "--strategy", "sifah", "--out-dir", str(out)]) == 0
    assert len(_read(out / "summary.csv")) == 2


def test_sweep_without_section_is_an_error(tmp_path, capsys):
    path = tmp_path / "nosweep.txt"
    path.write_text(SWEEPY.split("[sweep]")[0])
    assert main(["sweep", str(path)]) == 2
    assert "no sweep section" in capsys.readouterr().err


def test_seed_override_reproduces_identical_csv(tmp_path, sweepy):
    out1, out2 = tmp_path / "one", tmp_path / "two"
    assert main(["run", sweepy, "--seed", "42", "--out-dir", str(out1)]) == 0
    assert main(["run", sweepy, "--seed", "42", "--out-dir", str(out2)]) == 0
    assert (out1 / "summary.csv").read_bytes() == (out2 / "summary.csv").read_bytes()
    assert (out1 / "timeseries.csv").read_bytes() == (out2 / "timeseries.csv").read_bytes()


def test_overrides_reach_the_run(tmp_path, sweepy):
    out = tmp_path / "out"
    assert main(
        ["run", sweepy, "--strategy", "ccn", "--mil", "100ms", "--duration", "400ms",
         "--loop-fraction", "1.0", "--out-dir", str(out)]
    ) == 0
    row = _read(out / "summary.csv")[0]
    assert row["strategy"] == "ccn"
    assert row["mil_ms"] == "100.000000"
    assert row["duration_ms"] == "400.000000"
    assert row["loop_fraction"] == "1.000000"
