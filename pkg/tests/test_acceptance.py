"""The eight acceptance criteria, one test each, one PASS/FAIL line each."""

from __future__ import annotations

import time

import pytest

from checkedc_compat.bench import (
    ToolchainConfig, compute_overhead, load_fixture, parse_report, render_report, run_bench,
)
from checkedc_compat.emitters import (
    emit_macro, emit_native, emit_strip, expand_macros, gen_compat_header, resolve_conditionals,
)
from checkedc_compat.fuzz import gen_programs, gen_units
from checkedc_compat.ifacegen import check_stubs, generate_stubs
from checkedc_compat.instrument import instrument_unit
from checkedc_compat.lexer import significant
from checkedc_compat.nodes import FuncDecl, walk
from checkedc_compat.oracle import execute
from checkedc_compat.parser import parse_source
from checkedc_compat.printer import render
from checkedc_compat.sema import check_unit

from conftest import FREAD_LEGACY, FREAD_MACRO, FREAD_NATIVE

FIXTURE_ES = [68, 26, 75, 54, 70, 24, 88, 36, 32]


@pytest.fixture
def verdict(capsys):
    def emit(label: str, ok: bool, detail: str = ""):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] {label}" + (f": {detail}" if detail else ""))
        assert ok, detail
    return emit


def test_c1_size_table_arithmetic(samples, verdict):
    t0 = time.perf_counter()
    report = load_fixture(samples / "size_fixture.csv")
    es = [r.es for r in report.rows]
    total = report.total_es
    elapsed = time.perf_counter() - t0
    ok = es == FIXTURE_ES and total == 37 and compute_overhead(4258, 5832) == 37 and elapsed < 1.0
    verdict("C1 size-table arithmetic", ok, f"ES={es} total={total} in {elapsed:.3f}s")


def test_c2_fread_interface_both_directions(verdict):
    native = parse_source(FREAD_NATIVE)
    macro = emit_macro(native)
    forward = significant(macro.split("\n", 1)[1])  # past the include line
    checked = expand_macros(macro, True)
    legacy = expand_macros(macro, False)
    ok = (forward == significant(FREAD_MACRO)
          and significant(checked) == significant(render(native, "native"))
          and parse_source(checked).items == native.items
          and significant(legacy) == significant(FREAD_LEGACY)
          and significant(expand_macros(FREAD_MACRO, False)) == significant(FREAD_LEGACY))
    verdict("C2 fread native <-> macro form", ok, "macro, checked and legacy legs token-exact")


def test_c3_compat_header_branches(verdict):
    src = gen_compat_header() + "ptr(FILE) stream;\n"
    # the header's include guard survives expansion; compare the declaration
    checked = significant(expand_macros(src, True))[-6:]
    legacy = significant(expand_macros(src, False))[-4:]
    guard = significant(expand_macros(gen_compat_header(), True))
    ok = checked == ["_Ptr", "<", "FILE", ">", "stream", ";"] and legacy == ["FILE", "*", "stream", ";"] \
        and significant(expand_macros(src, True))[:-6] == guard
    verdict("C3 compat header ptr(FILE)", ok, f"checked={' '.join(checked)} legacy={' '.join(legacy)}")


def test_c4_commutation_squares(verdict):
    units = gen_units(240, seed=11)
    failures = []
    for g in units:
        m = emit_macro(g.unit)
        if significant(expand_macros(m, False)) != significant(emit_strip(g.unit)) or \
                significant(expand_macros(m, True)) != significant(emit_native(resolve_conditionals(g.unit, True))):
            failures.append(g.seed)
    verdict("C4 commutation squares", not failures and len(units) >= 200,
            f"{len(units) - len(failures)}/{len(units)} units commute")


def test_c5_differential_spatial_safety(verdict):
    t0 = time.perf_counter()
    programs = gen_programs(520, seed=2024)
    bad, violations = [], 0
    for g in programs:
        oracle = execute(g.unit)
        ins = instrument_unit(g.unit)
        inst = execute(parse_source(ins.code), mode="literal")
        if oracle.kind == "violation":
            violations += 1
            ok = inst.kind == "trap" and ins.sites[inst.trap_id].span == oracle.span
        else:
            strip = execute(parse_source(emit_strip(g.unit)), mode="literal")
            ok = (oracle.kind == inst.kind == strip.kind == "normal"
                  and (oracle.value, oracle.log) == (inst.value, inst.log) == (strip.value, strip.log))
        if not ok:
            bad.append(g.seed)
    elapsed = time.perf_counter() - t0
    ok = not bad and len(programs) >= 500 and elapsed < 300 and 0 < violations < len(programs)
    verdict("C5 differential spatial safety", ok,
            f"{len(programs) - len(bad)}/{len(programs)} agree ({violations} violations) in {elapsed:.1f}s")


NT_RUNTIME = """void put(_Nt_array_ptr<char> s : count(len), int len, char c) _Checked {
  s[len] = c;
}
int main(int c) _Checked {
  char buf[4] = "abc";
  put(buf, 3, c);
  return buf[0];
}
"""
MEMSET = "void *memset(void *s : byte_count(n), int c, size_t n);\n"
MEMSET_CHECKED = MEMSET + """void init(void) _Checked {
  char ary[8];
  _Nt_array_ptr<char> s : count(7) = ary;
  memset(&ary, 0, sizeof(ary));
}
"""
MEMSET_GUARDED = MEMSET + """void init(void) _Checked {
  char ary[8];
#ifndef USE_CHECKEDC
  memset(&ary, 0, sizeof(ary));
#endif
  _Nt_array_ptr<char> s : count(7) = ary;
}
"""


def errors(src):
    return {d.code for d in check_unit(parse_source(src)) if d.is_error}


def test_c6_nt_terminator_rules(verdict):
    unit = parse_source(NT_RUNTIME)
    ins = instrument_unit(unit)
    code = parse_source(ins.code)
    nonzero = execute(code, "main", [65], mode="literal")
    zero = execute(code, "main", [0], mode="literal")
    checks = {
        "runtime non-zero traps": nonzero.kind == "trap" and ins.sites[nonzero.trap_id].kind == "nt-terminator-write",
        "runtime zero succeeds": zero.kind == "normal" and zero.value == ord("a"),
        "oracle agrees": execute(unit, "main", [65]).kind == "violation" and execute(unit, "main", [0]).kind == "normal",
        "static non-zero rejected": "E-NT-OVERWRITE" in errors(
            "void f(_Nt_array_ptr<char> s : count(4)) _Checked { s[4] = 'a'; }"),
        "static zero accepted": not errors("void f(_Nt_array_ptr<char> s : count(4)) _Checked { s[4] = 0; }"),
        "memset rejected in checked scope": errors(MEMSET_CHECKED) == {"E-NT-OVERWRITE"},
        "memset accepted under #ifdef": not errors(MEMSET_GUARDED),
    }
    failed = [k for k, v in checks.items() if not v]
    verdict("C6 nt_array_ptr terminator rules", not failed,
            "failed: " + ", ".join(failed) if failed else f"{len(checks)} checks")


def test_c7_stub_generation(samples, verdict):
    header = parse_source((samples / "libc_mini.h").read_text())
    result = generate_stubs(header)
    reparsed = parse_source(result.code)
    again = generate_stubs(reparsed)
    fread = next(ln for ln in result.code.splitlines() if ln.startswith("size_t fread("))
    checks = {
        "20 prototypes": sum(isinstance(n, FuncDecl) for n in walk(reparsed)) == 20,
        "sema clean": not check_stubs(result),
        "fread golden": significant(fread) == significant(FREAD_MACRO),
        "idempotent": again.code == result.code,
    }
    failed = [k for k, v in checks.items() if not v]
    verdict("C7 stub generation", not failed,
            "failed: " + ", ".join(failed) if failed else f"{len(result.notes)} annotations")


def test_c8_desk_scale_bench(samples, verdict):
    cfg = ToolchainConfig.load(samples / "host_toolchain.conf")
    modules = [samples / m for m in ("inet_csum_mini.c", "pktbuf_mini.c", "optparse_mini.c")]
    try:
        report = run_bench(modules, cfg)
    except Exception as exc:  # a missing toolchain is a failure, not a skip
        verdict("C8 desk-scale bench", False, f"{type(exc).__name__}: {exc}")
    trips = all(parse_report(render_report(report, f), f) == report for f in ("table", "csv"))
    grows = all(r.cc >= r.lc > 0 for r in report.rows)
    sizes = ", ".join(f"{r.module} {r.lc}->{r.cc}" for r in report.rows)
    verdict("C8 desk-scale bench", trips and grows and len(report.rows) == 3, sizes)
