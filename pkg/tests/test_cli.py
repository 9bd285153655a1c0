import math
import os
import subprocess
import sys

import numpy as np
import pytest

from carpetbench.catalog import sc8
from carpetbench.cellgraph import build_graph, select
from carpetbench.cli import CSV_HEADER, fit_growth, main, parse_levels, read_budget_config
from carpetbench.potential import EnergyForm, dense_resistance


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(out):
    lines = [ln for ln in out.splitlines() if ln and not ln.startswith(("#", "fit", "probe", "corner/", "rnconst "))]
    assert lines[0] == CSV_HEADER
    head = CSV_HEADER.split(",")
    return [dict(zip(head, ln.split(","))) for ln in lines[1:]]


def test_validate(capsys):
    code, out, _ = run(capsys, "validate", "--system", "carpet104")
    assert code == 0
    lines = out.splitlines()
    assert all(ln.startswith("PASS") for ln in lines)
    for axiom in ("non-overlapping", "connectivity", "symmetry", "boundary-included"):
        assert any(ln.startswith(f"PASS {axiom}:") for ln in lines)


def test_dim(capsys):
    code, out, _ = run(capsys, "dim", "--system", "sc8")
    assert code == 0
    d = float(out.splitlines()[1].split()[1])
    assert abs(d - math.log(8) / math.log(3)) < 1e-9


def test_resistance_matches_dense_oracle(capsys):
    code, out, _ = run(capsys, "resistance", "--system", "sc8", "--level", "2", "--from", "edge:left", "--to", "edge:right")
    assert code == 0
    (row,) = rows(out)
    g = build_graph(sc8(), 2)
    ref = dense_resistance(EnergyForm.from_graph(g), select(g, "edge:left"), select(g, "edge:right"))
    assert abs(float(row["R"]) - ref) <= 1e-10
    assert row["seconds"] == "0"


def test_poincare_and_capacity(capsys):
    code, out, _ = run(capsys, "poincare", "--system", "sc8", "--level", "1")
    assert code == 0 and float(rows(out)[0]["R"]) > 0
    code, out, _ = run(capsys, "capacity", "--system", "sc8", "--level", "1", "--from", "edge:bottom", "--masses", "unit")
    assert code == 0 and float(rows(out)[0]["R"]) > 0


def test_rnconst(capsys):
    code, out, _ = run(capsys, "rnconst", "--system", "sc8", "--level", "1")
    assert code == 0
    assert float(rows(out)[0]["R"]) == pytest.approx(0.875, abs=1e-10)
    assert "truncated at m = 1" in out


def test_claims_output(capsys):
    code, out, _ = run(capsys, "claims", "--system", "carpet104")
    assert code == 0
    assert out.rstrip().splitlines()[-4:] == [
        "bound upper exact 1/2",
        "bound lower log(5)/log(1/a) enclosure 0.50023 0.50024",
        "witness 26250 > 26244",
        "verdict contradiction",
    ]


def test_scan_reports_growth(capsys):
    code, out, _ = run(capsys, "scan", "--system", "carpet104", "--levels", "1..2")
    assert code == 0
    assert "corner/crossing strictly increasing: yes" in out
    assert len(rows(out)) == 4


def test_graph_export(tmp_path, capsys):
    dest = tmp_path / "g.txt"
    code, out, _ = run(capsys, "graph", "--system", "sc8", "--level", "1", "--out", str(dest))
    assert code == 0 and "vertices 8 edges 12" in out
    assert dest.read_text().count("\nedge ") == 8  # segment contacts only
    run(capsys, "graph", "--system", "sc8", "--level", "1", "--corner-edges", "--out", str(dest))
    assert dest.read_text().count("\nedge ") == 12


def test_ifs_roundtrip(tmp_path, capsys):
    path = tmp_path / "c.ifs"
    assert run(capsys, "export-ifs", "--system", "carpet104", "--out", str(path))[0] == 0
    _, a, _ = run(capsys, "validate", "--ifs", str(path))
    _, b, _ = run(capsys, "validate", "--system", "carpet104")
    assert a == b


def test_malformed_ifs(tmp_path, capsys):
    path = tmp_path / "bad.ifs"
    path.write_text("ifs bad\nradicand 2\nmap 1/3 0 0\nmap 1/3 x 0\n")
    code, _, err = run(capsys, "validate", "--ifs", str(path))
    assert code == 2
    assert "line 4" in err


@pytest.mark.parametrize(
    "argv",
    [
        ["validate", "--system", "nope"],
        ["graph", "--system", "carpet104", "--level", "4"],
        ["resistance", "--system", "sc8", "--from", "edge:diag", "--to", "all"],
        ["validate", "--ifs", "/nonexistent/x.ifs"],
    ],
)
def test_usage_errors_exit_2(capsys, argv):
    assert run(capsys, *argv)[0] == 2


def test_bad_subcommand_exits_2(capsys):
    with pytest.raises(SystemExit) as e:
        main(["frobnicate"])
    assert e.value.code == 2


def test_config_budget(tmp_path, capsys):
    cfg = tmp_path / "b.cfg"
    cfg.write_text("budget.sc8 = 1\n")
    assert read_budget_config(str(cfg)) == {"sc8": 1}
    assert run(capsys, "graph", "--system", "sc8", "--level", "2", "--config", str(cfg))[0] == 2
    assert run(capsys, "graph", "--system", "sc8", "--level", "1", "--config", str(cfg))[0] == 0
    assert run(capsys, "graph", "--system", "sc8", "--level", "2", "--budget", "1")[0] == 2


def test_parse_levels():
    assert parse_levels("1..3") == (1, 3)
    assert parse_levels("2") == (2, 2)


def test_fit_growth():
    f = fit_growth([1, 2, 3, 4], [3 * 2.0**n for n in range(1, 5)], "x")
    assert f.slope == pytest.approx(math.log(2), abs=1e-12)
    assert f.residual == pytest.approx(0, abs=1e-12)
    assert f.ratios == pytest.approx([2, 2, 2])
    flat = fit_growth([1, 2, 3], [5.0, 5.0, 5.0])
    assert flat.slope == pytest.approx(0, abs=1e-12)
    with pytest.raises(ValueError):
        fit_growth([1], [1.0])
    with pytest.raises(ValueError):
        fit_growth([1, 2], [1.0, -1.0])


def cli(*argv, threads="1"):
    env = dict(os.environ, LSC_THREADS=threads)
    return subprocess.run([sys.executable, "-m", "carpetbench", *argv], capture_output=True, env=env, check=True).stdout


def test_subprocess_runs_are_byte_identical():
    argv = ["scan", "--system", "sc8", "--levels", "1..2", "--problems", "crossing,poincare,rnconst"]
    first = cli(*argv)
    assert first == cli(*argv)
    assert np.isfinite(float(first.decode().splitlines()[1].split(",")[6]))
