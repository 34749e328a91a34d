from __future__ import annotations

import shutil

import pytest
from hypothesis import given
from hypothesis import strategies as st

from checkedc_compat.bench import (
    BenchError, SizeReport, SizeRow, ToolchainConfig, compute_overhead, load_fixture,
    measure_module, parse_report, render_report, run_bench, source_bytes, text_size,
)

FIXTURE_ES = {"inet_csum": 68, "netapi": 26, "netreg": 75, "icmpv6_echo": 54, "icmpv6": 70,
             "ipv6": 24, "pkt": 88, "pktbuf_static": 36, "udp": 32}
MODULES = ["inet_csum_mini.c", "pktbuf_mini.c", "optparse_mini.c"]


@pytest.fixture
def fixture(samples):
    return load_fixture(samples / "size_fixture.csv")


@pytest.mark.parametrize("module,es", FIXTURE_ES.items())
def test_fixture_rows(fixture, module, es):
    row = next(r for r in fixture.rows if r.module == module)
    assert row.es == es


def test_fixture_total(fixture):
    assert [r.module for r in fixture.rows] == list(FIXTURE_ES)
    assert (fixture.total.lc, fixture.total.cc) == (4258, 5823)
    assert fixture.total_es == 37
    # the printed total CC differs from the column sum but rounds the same
    assert compute_overhead(4258, 5832) == 37


@pytest.mark.parametrize("lc,cc,es", [
    (100, 100, 0), (100, 150, 50), (200, 101, -50), (8, 9, 13), (2, 3, 50), (200, 301, 51),
    (200, 299, 50), (200, 99, -51), (1, 0, -100),
])
def test_compute_overhead(lc, cc, es):
    assert compute_overhead(lc, cc) == es


@pytest.mark.parametrize("lc", [0, -5])
def test_compute_overhead_rejects_nonpositive_lc(lc):
    with pytest.raises(ValueError):
        compute_overhead(lc, 10)


@given(st.integers(1, 10**6), st.integers(0, 10**6))
def test_overhead_is_nearest_integer(lc, cc):
    exact = 100 * (cc - lc) / lc
    assert abs(compute_overhead(lc, cc) - exact) <= 0.5 + 1e-9


def test_empty_report():
    r = SizeReport()
    assert render_report(r, "csv").decode().splitlines() == [
        "module,lc_bytes,cc_bytes,es_percent,method", "Total,0,0,0,total"]
    table = render_report(r).decode().splitlines()
    assert table[0].split()[:2] == ["Module", "LC"]
    assert table[-1].split() == ["Total", "0", "0", "0", "total"]


@pytest.mark.parametrize("fmt", ["table", "csv"])
def test_round_trip(fixture, fmt):
    fixture.rows.append(SizeRow("name with spaces", 10, 12, "source-bytes"))
    data = render_report(fixture, fmt)
    assert parse_report(data, fmt) == fixture
    assert render_report(parse_report(data, fmt), fmt) == data


def test_table_layout(fixture):
    lines = render_report(fixture).decode().splitlines()
    assert lines[-1].split() == ["Total", "4258", "5823", "37", "total"]
    assert lines[1].split() == ["inet_csum", "80", "134", "68", "fixture"]


def test_parse_rejects_wrong_es():
    bad = b"module,lc_bytes,cc_bytes,es_percent,method\nm,100,150,49,fixture\n"
    with pytest.raises(ValueError):
        parse_report(bad, "csv")


@pytest.mark.parametrize("out,size", [
    ("x.o  :\nsection  size  addr\n.text  123  0\n.data 4 0\nTotal 127\n", 123),
    ("   text\t   data\t    bss\t    dec\t    hex\tfilename\n    456\t      0\t      0\t    456\t    1c8\tx.o\n", 456),
    ("789\n", 789),
])
def test_text_size(out, size):
    assert text_size(out) == size


def test_text_size_garbage():
    with pytest.raises(BenchError):
        text_size("nothing useful here")


def test_config_parse():
    cfg = ToolchainConfig.parse("# host\ncompile_cmd = cc -c {in} -o {out}\n\nsize_cmd = size -A {out}\n")
    assert cfg == ToolchainConfig("cc -c {in} -o {out}", "size -A {out}", None)


@pytest.mark.parametrize("text", ["compile_cmd = cc", "compile_cmd = cc\nsize_cmd = size\ncolour = red",
                                  "compile_cmd cc\nsize_cmd = size"])
def test_config_errors(text):
    with pytest.raises(ValueError):
        ToolchainConfig.parse(text)


PLAIN = "int add(int a, int b) {\n  return a + b;\n}\n"
ANNOTATED = """int get(_Array_ptr<int> b : count(n), int n, int i) _Checked {
  return b[i];
}
"""
BARE = """int get(_Array_ptr<int> b : count(n), int n, int i) {
  return 0;
}
"""


def test_annotation_free_module_has_no_overhead():
    row = measure_module(PLAIN, "plain")
    assert row.method == "source-bytes"
    assert row.lc == row.cc == source_bytes(PLAIN)
    assert row.es == 0


def test_annotations_do_not_shrink():
    bare = measure_module(BARE, "m")
    checked = measure_module(ANNOTATED, "m")
    assert checked.cc > checked.lc
    assert checked.cc >= bare.cc


def test_source_bytes_ignores_layout():
    assert source_bytes("int  x ;  /* c */\n") == source_bytes("int x;") == len("int x ;")


def test_bench_rejects_ill_formed_module(tmp_path):
    p = tmp_path / "bad.c"
    p.write_text("int f(_Ptr<int> p) _Checked { int *q = p; return 0; }")
    with pytest.raises(Exception) as exc:
        run_bench([p])
    assert "E-SCOPE-RAWPTR" in str(exc.value.diagnostics[0].code)


def test_source_bytes_bench_on_samples(samples):
    r = run_bench([samples / m for m in MODULES])
    assert [x.module for x in r.rows] == ["inet_csum_mini", "pktbuf_mini", "optparse_mini"]
    assert all(x.cc > x.lc for x in r.rows)
    assert r.query == "source-bytes"


@pytest.mark.skipif(shutil.which("cc") is None or shutil.which("size") is None, reason="no host toolchain")
def test_toolchain_bench_on_samples(samples):
    cfg = ToolchainConfig.load(samples / "host_toolchain.conf")
    r = run_bench([samples / m for m in MODULES], cfg, jobs=3)
    assert all(x.method == "toolchain" and x.cc >= x.lc > 0 for x in r.rows)
    assert "# size query: size -A {out}" in render_report(r).decode()


def test_toolchain_failure_is_reported(tmp_path):
    cfg = ToolchainConfig("false {in}", "size -A {out}", str(tmp_path))
    with pytest.raises(BenchError, match="command failed"):
        measure_module(PLAIN, "plain", cfg)
