from __future__ import annotations

import pytest

from checkedc_compat import cli
from checkedc_compat.bench import parse_report
from checkedc_compat.lexer import significant

from conftest import FREAD_LEGACY, FREAD_MACRO, FREAD_NATIVE

OOB = """int main(int i) _Checked {
  int a[4] = {1, 2, 3, 4};
  _Array_ptr<int> p : count(4) = a;
  return p[i];
}
"""


@pytest.fixture
def src(tmp_path):
    def write(text, name="in.c"):
        p = tmp_path / name
        p.write_text(text)
        return str(p)
    return write


def test_version(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["--version"])
    assert exc.value.code == 0
    assert capsys.readouterr().out.strip() == "checkedc-compat 0.1.0 (dialect grammar 1)"


@pytest.mark.parametrize("argv", [[], ["frobnicate"], ["run"], ["expand", "x.c"], ["run", "x.c", "--fuel", "lots"]])
def test_usage_errors(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(argv)
    assert exc.value.code == cli.EXIT_USAGE


def test_missing_input(capsys, tmp_path):
    assert cli.main(["check", str(tmp_path / "nope.c")]) == cli.EXIT_USAGE
    assert "cannot read" in capsys.readouterr().err


def test_check_fread_interface(src):
    assert cli.main(["check", src(FREAD_NATIVE)]) == cli.EXIT_OK


def test_check_reports_errors(src, capsys):
    assert cli.main(["check", src("void f(_Ptr<int> p) _Checked { int *q = p; }")]) == cli.EXIT_TOOL
    assert "E-SCOPE-RAWPTR" in capsys.readouterr().err


def test_syntax_error(src, capsys):
    assert cli.main(["strip", src("int f( {")]) == cli.EXIT_TOOL
    assert "E-SYNTAX" in capsys.readouterr().err


def test_macro_then_expand(src, tmp_path, capsys):
    out = tmp_path / "fread.h"
    assert cli.main(["macro", src(FREAD_NATIVE), "--out", str(out)]) == 0
    assert significant(FREAD_MACRO) == significant(out.read_text())[-len(significant(FREAD_MACRO)):]
    assert cli.main(["expand", str(out), "--legacy"]) == 0
    assert capsys.readouterr().out.strip() == FREAD_LEGACY


def test_expand_checked(src, capsys):
    assert cli.main(["expand", src("ptr(FILE) f;"), "--checked"]) == 0
    assert significant(capsys.readouterr().out) == ["_Ptr", "<", "FILE", ">", "f", ";"]


def test_strip(src, capsys):
    assert cli.main(["strip", src(FREAD_NATIVE)]) == 0
    assert significant(capsys.readouterr().out) == significant(FREAD_LEGACY)


def test_gen_header(capsys):
    assert cli.main(["gen-header"]) == 0
    assert "#define ptr(t) _Ptr<t>" in capsys.readouterr().out


@pytest.mark.parametrize("arg,code,line", [("2", 0, "NORMAL 3"), ("4", 3, "VIOLATION")])
def test_run_oracle(src, capsys, arg, code, line):
    assert cli.main(["run", src(OOB), "--arg", arg]) == code
    assert capsys.readouterr().out.splitlines()[-1].startswith(line)


def test_run_instrumented_traps(src, tmp_path, capsys):
    out = tmp_path / "inst.c"
    assert cli.main(["instrument", src(OOB), "--out", str(out)]) == 0
    sites = (tmp_path / "inst.c.sites").read_text().splitlines()
    assert sites and sites[0].startswith("0\t")
    assert cli.main(["run", str(out), "--mode", "literal", "--arg", "9"]) == cli.EXIT_TRAP
    trap = capsys.readouterr().out.splitlines()[-1]
    assert trap.startswith("TRAP ")
    site = sites[int(trap.split()[1])].split("\t")
    assert "index" in site


def test_run_fuel(src, capsys):
    loop = "int main(void) { while (1) { } return 0; }"
    assert cli.main(["run", src(loop), "--fuel", "50"]) == cli.EXIT_FUEL
    assert capsys.readouterr().out.startswith("FUEL")


def test_stubs_writes_review(src, tmp_path):
    header = src(FREAD_LEGACY, "io.h")
    out = tmp_path / "io_stubs.h"
    assert cli.main(["stubs", header, "--out", str(out)]) == 0
    assert significant(FREAD_MACRO) == significant(out.read_text())[-len(significant(FREAD_MACRO)):]
    review = (tmp_path / "io.stubs.txt").read_text().splitlines()
    assert review == ["fread\tp\tabyte_count(size * nmemb)\tbyte-count\thigh",
                      "fread\tstream\tatype(ptr(FILE))\tsingle\tlow"]


def test_stubs_rejects_definitions(src, capsys):
    assert cli.main(["stubs", src("int f(void) { return 0; }")]) == cli.EXIT_TOOL
    assert "E-STUB-INPUT" in capsys.readouterr().err


def test_bench_fixture_csv(samples, capsys):
    assert cli.main(["bench", "--fixture", str(samples / "size_fixture.csv"), "--format", "csv"]) == 0
    out = capsys.readouterr().out
    assert out.splitlines()[-1] == "Total,4258,5823,37,total"
    assert len(parse_report(out, "csv").rows) == 9


def test_bench_modules(samples, capsys):
    assert cli.main(["bench", str(samples / "pktbuf_mini.c")]) == 0
    assert capsys.readouterr().out.splitlines()[1].split()[-1] == "source-bytes"


def test_bench_missing_module(capsys, tmp_path):
    assert cli.main(["bench", str(tmp_path / "gone.c")]) == cli.EXIT_USAGE
