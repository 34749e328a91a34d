from __future__ import annotations

import shutil
import subprocess

import pytest

from checkedc_compat.emitters import emit_strip
from checkedc_compat.fuzz import gen_programs
from checkedc_compat.instrument import PRELUDE, SITE_KINDS, instrument_unit
from checkedc_compat.nodes import Index, Unary, walk
from checkedc_compat.oracle import execute
from checkedc_compat.parser import parse_source
from checkedc_compat.sema import analyze, check_unit


def run_instrumented(src, entry="main", args=()):
    ins = instrument_unit(parse_source(src))
    return ins, execute(parse_source(ins.code), entry, args, mode="literal")


SUM = """int get(_Array_ptr<int> b : count(len), int len, int i) _Checked {
  return b[i];
}
int main(int i) _Checked {
  int a[4] = {5, 6, 7, 8};
  return get(a, 4, i);
}
"""


def test_index_guard_uses_declared_range():
    ins = instrument_unit(parse_source(SUM))
    assert "b[__chk_idx(0, b, i, 0, len)]" in ins.code


@pytest.mark.parametrize("i,kind,value", [(0, "normal", 5), (3, "normal", 8), (4, "trap", None), (-1, "trap", None)])
def test_index_guard_behaviour(i, kind, value):
    ins, out = run_instrumented(SUM, args=[i])
    assert out.kind == kind
    if kind == "normal":
        assert out.value == value
    else:
        assert ins.sites[out.trap_id].kind == "index"


NT = """void put(_Nt_array_ptr<char> s : count(len), int len, char c) _Checked {
  s[len] = c;
}
int main(int c) _Checked {
  char buf[4] = "abc";
  put(buf, 3, c);
  return buf[0];
}
"""


@pytest.mark.parametrize("c,kind", [(0, "normal"), (65, "trap")])
def test_nt_terminator_write(c, kind):
    ins, out = run_instrumented(NT, args=[c])
    assert out.kind == kind
    if kind == "trap":
        assert ins.sites[out.trap_id].kind == "nt-terminator-write"


FREAD = """size_t fread(void *p : byte_count(size * nmemb), size_t size, size_t nmemb,
             FILE *stream : itype(_Ptr<FILE>)) {
  return nmemb;
}
struct __FILE { int fd; };
int main(int n, int null_stream) _Checked {
  char buf[8];
  struct __FILE f;
  _Ptr<FILE> s = 0;
  if (!null_stream) {
    s = &f;
  }
  return fread(buf, 1, n, s);
}
"""


@pytest.mark.parametrize("n,null_stream,kind", [(16, 0, "trap"), (8, 0, "normal"), (4, 1, "trap")])
def test_interface_boundary(n, null_stream, kind):
    ins, out = run_instrumented(FREAD, args=[n, null_stream])
    assert out.kind == kind
    oracle = execute(parse_source(FREAD), "main", [n, null_stream])
    assert (oracle.kind == "violation") == (kind == "trap")
    if kind == "trap":
        assert ins.sites[out.trap_id].kind == "interface-boundary"
        assert ins.sites[out.trap_id].span == oracle.span


def test_interface_bounds_unevaluable():
    src = """_Array_ptr<int> mk(void);
int get(int *b : count(n), int n);
int main(void) _Checked {
  return get(mk(), 2);
}"""
    assert "E-IFACE-UNEVAL" in [d.code for d in check_unit(parse_source(src))]


def test_single_evaluation_of_index():
    src = """int f(int i) {
  return i;
}
int main(void) _Checked {
  int a[3] = {1, 2, 3};
  a[f(1)] += 5;
  return a[f(1)];
}"""
    _, out = run_instrumented(src)
    assert out.value == 7
    assert out.calls["f"] == 2


def test_unchecked_accesses_untouched():
    src = "int f(int *p, int i) {\n  return p[i];\n}\n"
    ins = instrument_unit(parse_source(src))
    assert ins.sites == []
    assert ins.code == emit_strip(parse_source(src))
    assert PRELUDE not in ins.code


def test_site_map_format():
    ins = instrument_unit(parse_source(SUM))
    lines = ins.site_map(SUM).splitlines()
    assert lines[:2] == ["0\tindex\t2:10", "1\tinterface-boundary\t6:14"]
    for k, line in enumerate(lines):
        sid, kind, pos = line.split("\t")
        assert int(sid) == k and kind in SITE_KINDS
        assert all(x.isdigit() for x in pos.split(":"))


PROGRAMS = gen_programs(60, seed=9)


def checked_accesses(unit):
    a = analyze(unit)
    return [n for n in walk(unit) if isinstance(n, (Index, Unary)) and a.is_checked_access(n)]


@pytest.mark.parametrize("g", PROGRAMS[:30], ids=lambda g: f"seed{g.seed}")
def test_sites_dense_ordered_and_cover_accesses(g):
    ins = instrument_unit(g.unit)
    assert [s.id for s in ins.sites] == list(range(len(ins.sites)))
    keys = [(s.span[0], -s.span[1]) for s in ins.sites]
    assert keys == sorted(keys)
    access_spans = {s.span for s in ins.sites if s.kind in ("index", "deref-read", "deref-write",
                                                             "nt-terminator-write")}
    for n in checked_accesses(g.unit):
        assert n.span in access_spans
    assert instrument_unit(g.unit).sites == ins.sites


@pytest.mark.parametrize("g", PROGRAMS, ids=lambda g: f"seed{g.seed}")
def test_precision_and_soundness(g):
    oracle = execute(g.unit)
    ins = instrument_unit(g.unit)
    inst = execute(parse_source(ins.code), mode="literal")
    if oracle.kind == "violation":
        assert inst.kind == "trap"
        assert ins.sites[inst.trap_id].span == oracle.span
    else:
        strip = execute(parse_source(emit_strip(g.unit)), mode="literal")
        assert inst.kind == strip.kind == "normal"
        assert (inst.value, inst.log) == (strip.value, strip.log) == (oracle.value, oracle.log)


@pytest.mark.skipif(shutil.which("cc") is None, reason="no host C compiler")
def test_instrumented_code_compiles_and_traps(tmp_path):
    # main's parameter receives argc, so extra command-line words move the index
    src = tmp_path / "sum.c"
    src.write_text(instrument_unit(parse_source(SUM)).code)
    exe = tmp_path / "sum"
    subprocess.run(["cc", "-o", str(exe), str(src)], check=True, capture_output=True)
    ok = subprocess.run([str(exe)], capture_output=True, text=True)
    assert ok.returncode == 6
    bad = subprocess.run([str(exe), "x", "y", "z", "w"], capture_output=True, text=True)
    assert bad.returncode != 0
    assert bad.stderr.strip() == "checked trap 0"
