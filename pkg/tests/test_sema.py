from __future__ import annotations

import pytest

from checkedc_compat.emitters import emit_strip
from checkedc_compat.fuzz import gen_programs
from checkedc_compat.lexer import CHECKED_KEYWORDS, tokenize
from checkedc_compat.nodes import Block, FuncDecl, Index, Range, walk
from checkedc_compat.parser import parse_source
from checkedc_compat.printer import render_expr
from checkedc_compat.sema import analyze, check_unit

MEMSET = "void *memset(void *s : byte_count(n), int c, size_t n);\n"


def codes(src):
    return sorted({d.code for d in check_unit(parse_source(src)) if d.is_error})


@pytest.mark.parametrize("src,expected", [
    ("void f(_Ptr<int> p) _Checked { int *q = p; }", ["E-SCOPE-RAWPTR"]),
    ("int f(_Array_ptr<int> b) _Checked { return b[0]; }", ["E-BOUNDS-MISSING"]),
    ("int f(_Ptr<int> p) _Checked { return *(p + 1); }", ["E-PTR-ARITH"]),
    ("int f(_Array_ptr<int> b : count(n++), int n);", ["E-BOUNDS-ILLFORMED"]),
    ("int g(void);\nint f(_Array_ptr<int> b : count(g()), int n);", ["E-BOUNDS-ILLFORMED"]),
    ("void f(_Nt_array_ptr<char> s : count(4)) _Checked { s[4] = 'a'; }", ["E-NT-OVERWRITE"]),
    ("int f(_Array_ptr<int> b : count(m), int n);", ["E-BOUNDS-UNRESOLVED"]),
])
def test_rule_violations(src, expected):
    assert codes(src) == expected


@pytest.mark.parametrize("src", [
    "void f(_Nt_array_ptr<char> s : count(4)) _Checked { s[4] = 0; }",
    "int f(_Ptr<int> p) _Checked { return *p; }",
    "int f(int *p) { return *(p + 1); }",
    "size_t fread(void *p : byte_count(size * nmemb), size_t size, size_t nmemb, FILE *stream : itype(_Ptr<FILE>));",
])
def test_accepted(src):
    assert codes(src) == []


def test_memset_on_nt_backing_array_rejected_in_checked_scope():
    src = MEMSET + """void init(void) _Checked {
  char ary[8];
  _Nt_array_ptr<char> s : count(7) = ary;
  memset(&ary, 0, sizeof(ary));
}"""
    assert codes(src) == ["E-NT-OVERWRITE"]


@pytest.mark.parametrize("guarded", [
    "#ifndef USE_CHECKEDC\n  memset(&ary, 0, sizeof(ary));\n#endif",
    "#ifndef USE_CHECKEDC\n  _Unchecked { memset(&ary, 0, sizeof(ary)); }\n#endif",
])
def test_memset_guarded_by_ifdef_accepted(guarded):
    src = MEMSET + f"""void init(void) _Checked {{
  char ary[8];
{guarded}
  _Nt_array_ptr<char> s : count(7) = ary;
}}"""
    assert codes(src) == []


def test_legacy_unit_has_no_diagnostics():
    src = "int g;\nint f(int *p, int n) { int s = 0; for (int i = 0; i < n; i++) s += p[i]; return s; }"
    assert check_unit(parse_source(src)) == []


def bounds_of(src, nth=0):
    u = parse_source(src)
    a = analyze(u)
    accesses = [n for n in walk(u) if isinstance(n, Index)]
    r = a.resolve_bounds(accesses[nth])
    return render_expr(r.lo), render_expr(r.hi)


@pytest.mark.parametrize("src,expected", [
    ("int f(_Array_ptr<uint8_t> b : count(len), int len, int i) _Checked { return b[i]; }", ("b", "b + len")),
    ("int f(_Array_ptr<char> p : byte_count(size * nmemb), size_t size, size_t nmemb) _Checked { return p[0]; }",
     ("p", "p + size * nmemb")),
    ("int f(_Array_ptr<int> b : bounds(b, e), _Array_ptr<int> e) _Checked { return b[1]; }", ("b", "e")),
    ("int f(_Array_ptr<int> p : byte_count(8)) _Checked { return p[1]; }", ("p", "p + 2")),
])
def test_resolve_bounds(src, expected):
    assert bounds_of(src) == expected


def test_resolve_bounds_singleton():
    from checkedc_compat.nodes import Unary
    u = parse_source("int f(_Ptr<FILE> stream) _Checked { return (*stream).fd; }\n"
                     "struct __FILE { int fd; };")
    a = analyze(u)
    deref = next(n for n in walk(u) if isinstance(n, Unary) and n.op == "*")
    r = a.resolve_bounds(deref)
    assert isinstance(r, Range)
    assert (render_expr(r.lo), render_expr(r.hi)) == ("stream", "stream + 1")


def test_byte_count_not_multiple_warns():
    diags = check_unit(parse_source("void f(_Array_ptr<int> p : byte_count(6));"))
    assert [(d.code, d.severity) for d in diags] == [("E-BOUNDS-BYTES", "warning")]


PROGRAMS = gen_programs(40, seed=5)


@pytest.mark.parametrize("g", PROGRAMS[:20], ids=lambda g: f"seed{g.seed}")
def test_wrapping_in_unchecked_keeps_acceptance(g):
    u = parse_source(g.source)
    for item in u.items:
        if isinstance(item, FuncDecl) and item.body is not None:
            item.body = Block([item.body], "unchecked")
    assert analyze(u).ok


@pytest.mark.parametrize("g", PROGRAMS, ids=lambda g: f"seed{g.seed}")
def test_strip_has_no_checked_keywords(g):
    out = emit_strip(g.unit)
    assert not [t for t in tokenize(out) if t.text in CHECKED_KEYWORDS]


def test_diagnostics_are_deterministic():
    src = "void f(_Ptr<int> p) _Checked { int *q = p; int *r = p; _Array_ptr<int> b; b[0] = *(p + 1); }"
    runs = [check_unit(parse_source(src)) for _ in range(3)]
    assert runs[0] == runs[1] == runs[2]
    assert len(runs[0]) >= 3
