import json

import numpy as np
import pytest

from simlab.errors import ConfigError, IoError, ParseError, UnknownSuite
from simlab.labcli import load_config, loads_config, matrix_io_roundtrip, run_experiment
from simlab.labcli.cli import main
from simlab.labcli.suites import verify_suite
from simlab.numkit import write_matrix

ANALYZE = "[experiment]\nkind = analyze\nname = a\nseed = 1\n[inputs]\nx = diag:0.5\n"
SPLIT = "[experiment]\nkind = split\nname = s\nseed = 1\n[inputs]\na = diag:0.5\nb = diag:2\n"
CRSIM = ("[experiment]\nkind = crsim\nname = c\nseed = 1\n[inputs]\na = inline:-1\n"
         "[times]\ndyadic = 6\n")


def run(text, tmp_path, **kw):
    cfg = loads_config(text, tmp_path, {"output_dir": tmp_path})
    return run_experiment(cfg, **kw)


def rows(rep):
    return [dict(zip(rep.columns, r)) for r in rep.rows]


# ---------------------------------------------------------------- examples

def test_analyze_scalar(tmp_path):
    rep = run(ANALYZE, tmp_path)
    (row,) = rows(rep)
    assert row["C"] == 1.0 and row["verdict"] == "Similar"
    assert rep.passed


def test_split_scalings(tmp_path):
    rep = run(SPLIT, tmp_path)
    got = {r["factor"]: r for r in rows(rep)}
    assert got["a"]["scaling"] == pytest.approx(2.0) and got["b"]["scaling"] == pytest.approx(0.5)
    assert got["tensor"]["verdict"] == "Similar"


def test_crsim_scalar_generator(tmp_path):
    rep = run(CRSIM, tmp_path)
    rs = rows(rep)
    assert [r["t"] for r in rs[:-1]] == [2.0 ** -k for k in range(6, -1, -1)]
    assert all(r["C"] == 1.0 and r["verdict"] == "Consistent" for r in rs)


def test_row_count_matches_grid(tmp_path):
    text = ANALYZE + "y = model:foguel N=3\n[times]\nrange = 0, 2, 3\n"
    rep = run(text, tmp_path)
    # plain matrices are time independent; models get one row per time
    assert len(rep.rows) == 1 + 3 == len(rep.verdicts)


@pytest.mark.parametrize("kind_text", [
    "[experiment]\nkind = gallery\nname = g\nseed = 2\n[inputs]\nf = model:foguel N=9\n"
    "[times]\nvalues = 1, 2\n",
    "[experiment]\nkind = interpolate\nname = i\nseed = 2\nM = 8\n[inputs]\nt = diag:0.5\n"
    "[times]\nvalues = 0.5, 1.25\n",
])
def test_other_kinds_run(tmp_path, kind_text):
    rep = run(kind_text, tmp_path)
    assert rep.rows and rep.passed


# ---------------------------------------------------------------- reports

def test_outputs_are_written_and_deterministic(tmp_path):
    text = ANALYZE + "r = random:dim=3 radius=0.8\n"
    run(text, tmp_path)
    first = (tmp_path / "a.csv").read_bytes()
    summary = json.loads((tmp_path / "a.json").read_text())
    assert summary["verdict"] == "pass" and summary["rows"] == 2
    run(text, tmp_path, force=True)
    assert (tmp_path / "a.csv").read_bytes() == first
    header = first.decode().splitlines()[:6]
    assert header[0] == "# schema=1" and header[4].startswith("# config_sha256=")


def test_different_seed_changes_random_inputs(tmp_path):
    text = ANALYZE + "r = random:dim=3 radius=0.8\n"
    a = run(text, tmp_path, write=False).to_csv()
    b = run(text.replace("seed = 1", "seed = 2"), tmp_path, write=False).to_csv()
    assert a != b


def test_no_overwrite_without_force(tmp_path):
    run(ANALYZE, tmp_path)
    with pytest.raises(IoError):
        run(ANALYZE, tmp_path)
    run(ANALYZE, tmp_path, force=True)


def test_floats_round_trip_through_csv(tmp_path):
    rep = run(ANALYZE.replace("diag:0.5", "inline:0.3,0.7;0,0.1"), tmp_path, write=False)
    line = rep.to_csv().splitlines()[-1].split(",")
    assert float(line[rep.columns.index("norm")]) == rows(rep)[0]["norm"]


# ---------------------------------------------------------------- config errors

@pytest.mark.parametrize("text, line, field", [
    ("[experiment]\nkind = analyze\nname = a\nseed = x\n[inputs]\nx = diag:1\n", 4, "seed"),
    ("[experiment]\nkind = analyze\nname = a\nseed = 1\ncolour = red\n[inputs]\nx = diag:1\n",
     5, "colour"),
    ("[experiment]\nkind = nope\nname = a\nseed = 1\n[inputs]\nx = diag:1\n", 2, "kind"),
    (ANALYZE + "[times]\nvalues = -1, 2\n", None, "times"),
    (ANALYZE + "[times]\nrange = 0, 1\n", 8, "range"),
    ("[experiment]\nkind = analyze\nname = a\n[inputs]\nx = diag:1\n", None, "seed"),
    ("[experiment]\nkind = analyze\nname = a\nseed = 1\n[inputs]\nx = inline:1,2\n", 6, "x"),
    ("[experiment]\nkind = analyze\nname = a\nseed = 1\n[inputs]\nx = bogus:1\n", 6, "x"),
])
def test_config_errors_locate_line_and_field(tmp_path, text, line, field):
    with pytest.raises(ConfigError) as err:
        loads_config(text, tmp_path)
    assert err.value.field == field
    if line is not None:
        assert err.value.line == line


def test_config_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.ini")


def test_matrix_file_input(tmp_path):
    write_matrix(tmp_path / "m.txt", np.diag([0.5, 0.25]))
    text = ANALYZE.replace("diag:0.5", "matrix:m.txt")
    (tmp_path / "exp.ini").write_text(text)
    cfg = load_config(tmp_path / "exp.ini", {"output_dir": tmp_path})
    assert np.array_equal(cfg.inputs[0].matrix, np.diag([0.5, 0.25]))


# ---------------------------------------------------------------- suites and matrix files

@pytest.mark.parametrize("name", ["product-laws", "interpolation"])
def test_suites_pass(name):
    assert verify_suite(name).passed


def test_unknown_suite():
    with pytest.raises(UnknownSuite):
        verify_suite("nope")


def test_matrix_io_roundtrip(tmp_path):
    p = tmp_path / "z.txt"
    p.write_text("1 1\n0:0\n")
    assert np.array_equal(matrix_io_roundtrip(p), np.zeros((1, 1)))
    assert p.read_text() == "1 1\n0:0\n"
    p.write_text("1 2\n1:0 1;2\n")
    with pytest.raises(ParseError) as err:
        matrix_io_roundtrip(p)
    assert err.value.line == 2


# ---------------------------------------------------------------- command line

def test_cli_success_and_guard(tmp_path, capsys):
    args = ["analyze", "--input", "diag:0.5", "--out", str(tmp_path), "--quiet"]
    assert main(args) == 0
    assert (tmp_path / "analyze.csv").exists()
    assert main(args) == 2
    assert main(args + ["--force"]) == 0


def test_cli_verdict_failure(tmp_path):
    # a Jordan block on the unit circle is not power bounded
    args = ["analyze", "--input", "inline:1,1;0,1", "--out", str(tmp_path), "--quiet"]
    assert main(args) == 1


def test_cli_config_errors(tmp_path):
    bad = tmp_path / "bad.ini"
    bad.write_text("[experiment]\nkind = analyze\nseed = x\n")
    assert main(["analyze", "--config", str(bad)]) == 2
    assert main(["split", "--input", "inline:1,2", "--out", str(tmp_path)]) == 2


def test_cli_config_file(tmp_path, capsys):
    cfg = tmp_path / "exp.ini"
    cfg.write_text(SPLIT)
    assert main(["split", "--config", str(cfg), "--out", str(tmp_path)]) == 0
    assert "tensor,1,1,0,Similar" in capsys.readouterr().out


def test_cli_verify(capsys):
    assert main(["verify", "product-laws"]) == 0
    assert "PASS" in capsys.readouterr().out
    assert main(["verify", "nope"]) == 2


def test_inline_comments(tmp_path):
    text = ("[experiment]\nkind = analyze   ; comment\nname = a\nseed = 3  # another\n"
            "[inputs]\nx = inline:0.5,1;0,0.25   ; semicolons inside values stay\n")
    cfg = loads_config(text, tmp_path)
    assert cfg.kind == "analyze" and cfg.seed == 3
    assert np.array_equal(cfg.inputs[0].matrix, [[0.5, 1], [0, 0.25]])
