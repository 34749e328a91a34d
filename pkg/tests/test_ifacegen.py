from __future__ import annotations

import pytest

from checkedc_compat.diagnostics import CompileError
from checkedc_compat.emitters import INCLUDE_LINE
from checkedc_compat.ifacegen import RULES, check_stubs, generate_stubs
from checkedc_compat.lexer import significant
from checkedc_compat.nodes import Conditional, FuncDecl
from checkedc_compat.parser import parse_source
from checkedc_compat.sema import analyze

from conftest import FREAD_LEGACY, FREAD_MACRO


def stub_line(proto):
    out = generate_stubs(parse_source(proto)).code
    assert out.startswith(INCLUDE_LINE + "\n")
    return out[len(INCLUDE_LINE) + 1:].strip()


@pytest.mark.parametrize("proto,expected", [
    ("int f(void);", "int f(void);"),
    ("int sum(int *xs, size_t n);", "int sum(int *xs acount(n), size_t n);"),
    ("ssize_t read(int fd, void *buf, size_t count);", "ssize_t read(int fd, void *buf abyte_count(count), size_t count);"),
    ("int put(uint8_t *buf, uint16_t len);", "int put(uint8_t *buf acount(len), uint16_t len);"),
    ("char *name(int id);", "char *name(int id) atype(ptr(char));"),
    ("void *raw(void *p);", "void *raw(void *p);"),
    ("int argv_len(char **argv);", "int argv_len(char **argv);"),
    ("int copy(int *dst, size_t a, size_t b);", "int copy(int *dst atype(ptr(int)), size_t a, size_t b);"),
    # a plain int beside a real length is a value, not a size
    ("void *memset(void *dst, int c, size_t n);", "void *memset(void *dst, int c, size_t n);"),
    ("int fmt(char *buf, size_t len, int value);", "int fmt(char *buf acount(len), size_t len, int value);"),
    ("int total(int *xs, int n);", "int total(int *xs acount(n), int n);"),
])
def test_rules(proto, expected):
    assert stub_line(proto) == expected


def prototypes(items):
    out = []
    for x in items:
        if isinstance(x, Conditional):
            out += prototypes(x.then) + prototypes(x.orelse or [])
        elif isinstance(x, FuncDecl):
            out.append(x)
    return out


def test_fread_golden():
    assert significant(stub_line(FREAD_LEGACY)) == significant(FREAD_MACRO)


def test_rule_order():
    assert [r.name for r in RULES] == ["count", "byte-count", "single"]
    assert [r.confidence for r in RULES] == ["high", "high", "low"]


def test_notes_and_confidence():
    r = generate_stubs(parse_source("void *memset(void *dst, int c, size_t n);\n" + FREAD_LEGACY))
    notes = {(n.function, n.param): n for n in r.notes}
    assert notes["fread", "p"].confidence == "high"
    assert notes["fread", "stream"].annotation == "atype(ptr(FILE))"
    assert notes["fread", "stream"].confidence == "low"
    assert ("memset", "dst") not in notes
    assert r.review().splitlines()[0] == "fread\tp\tabyte_count(size * nmemb)\tbyte-count\thigh"


def test_libc_header(samples):
    header = parse_source((samples / "libc_mini.h").read_text())
    assert len(prototypes(header.items)) == 20
    r = generate_stubs(header)
    assert check_stubs(r) == []
    again = generate_stubs(parse_source(r.code))
    assert again.code == r.code
    assert again.notes == []
    fread = next(ln for ln in r.code.splitlines() if "fread" in ln)
    assert significant(fread) == significant(FREAD_MACRO)


def test_output_passes_sema_with_checked_callers():
    r = generate_stubs(parse_source("int sum(int *xs, size_t n);"))
    src = r.code + "int main(void) _Checked {\n  int a[3] = {1, 2, 3};\n  return sum(a, 3);\n}\n"
    assert analyze(parse_source(src)).ok


@pytest.mark.parametrize("src", ["int f(int x) { return x; }", "int g = 3;", "int f(void) { }"])
def test_non_prototype_rejected(src):
    with pytest.raises(CompileError) as exc:
        generate_stubs(parse_source(src))
    assert exc.value.diagnostics[0].code == "E-STUB-INPUT"
