from __future__ import annotations

import pytest
from hypothesis import given, settings, strategies as st

from checkedc_compat.diagnostics import CompileError, InternalError
from checkedc_compat.fuzz import gen_units
from checkedc_compat.lexer import detokenize, significant, tokenize
from checkedc_compat.nodes import ByteCount, Count, Ident, Pointer, PtrKind
from checkedc_compat.parser import parse_source
from checkedc_compat.printer import render

from conftest import FREAD_MACRO, FREAD_NATIVE


def kinds(src):
    return [(t.kind, t.text) for t in tokenize(src) if t.kind != "eof"]


def test_tokenize_ptr_declaration():
    assert kinds("_Ptr<int> p;") == [
        ("checked-keyword", "_Ptr"), ("punctuation", "<"), ("keyword", "int"),
        ("punctuation", ">"), ("identifier", "p"), ("punctuation", ";"),
    ]


def test_tokenize_define_line_keeps_checked_keyword():
    toks = kinds("#define ptr(t) _Ptr<t>")
    assert ("checked-keyword", "_Ptr") in toks
    assert toks[0] == ("punctuation", "#")


def test_colon_precedes_byte_count():
    texts = significant(FREAD_NATIVE)
    k = texts.index("byte_count")
    assert texts[k - 1] == ":"


@pytest.mark.parametrize("src", [
    '/* unterminated',
    '"open string',
    "int x = 1 @ 2;",
])
def test_lex_errors_carry_spans(src):
    with pytest.raises(CompileError) as exc:
        tokenize(src)
    assert all(d.span is not None for d in exc.value.diagnostics)


@given(st.text(alphabet="abcxyz_019 \t\n+-*/;(){}[]<>=,.:&!~^|%?#'\"\\", max_size=80))
@settings(max_examples=200, deadline=None)
def test_lexing_is_lossless(src):
    try:
        toks = tokenize(src)
    except CompileError:
        return
    assert detokenize(toks) == src
    spans = [t.span for t in toks if t.kind != "eof"]
    assert all(a[1] <= b[0] for a, b in zip(spans, spans[1:]))
    assert all(src.encode()[s:e].decode() == t.text for t, (s, e) in zip(toks, spans))


def test_count_param_is_plain_pointer_with_bounds():
    u = parse_source("void f(int *a : count(n), size_t n);")
    a = u.items[0].params[0]
    assert a.type == Pointer(PtrKind.PLAIN, a.type.pointee)
    assert a.itype is None
    assert a.bounds == Count(Ident("n"))


def test_fread_interface():
    f = parse_source(FREAD_NATIVE).items[0]
    p, _, _, stream = f.params
    assert isinstance(p.bounds, ByteCount)
    assert stream.itype.kind is PtrKind.PTR


def test_empty_file():
    u = parse_source("")
    assert u.items == []
    assert u.scope_default == "Unchecked"


@pytest.mark.parametrize("src,expected", [
    ("#pragma CHECKED_SCOPE ON\nint x;", "Checked"),
    ("int x;\n#pragma CHECKED_SCOPE ON\n", "Unchecked"),
    ("int x;", "Unchecked"),
])
def test_scope_default(src, expected):
    assert parse_source(src).scope_default == expected


def test_annotation_on_non_pointer_rejected():
    with pytest.raises(CompileError) as exc:
        parse_source("void f(int n : count(4));")
    assert [d.code for d in exc.value.diagnostics] == ["E-ANN-NONPTR"]


def test_native_and_macro_spellings_agree():
    assert parse_source(FREAD_NATIVE) == parse_source(FREAD_MACRO)


@pytest.mark.parametrize("native,macro", [
    ("_Ptr<int> p;", "ptr(int) p;"),
    ("_Array_ptr<char> b : count(4) = 0;", "array_ptr(char) b acount(4) = 0;"),
    ("_Nt_array_ptr<const char> s : bounds(s, s + 3) = 0;", "nt_array_ptr(const char) s abounds(s, s + 3) = 0;"),
    ("extern int *q : itype(_Ptr<int>);", "extern int *q atype(ptr(int));"),
    ("void g(void) _Checked { _Unchecked { } }", "void g(void) checked_scope { unchecked_scope { } }"),
])
def test_spelling_equivalence(native, macro):
    assert parse_source(native) == parse_source(macro)


def test_macro_render_uses_family():
    text = render(parse_source("void f(_Ptr<FILE> s);"), "macro")
    assert "ptr(FILE)" in text


SAMPLE = "struct s { int a; };\nint g(int x) {\n  return x * 2;\n}\n"


def test_annotation_free_unit_same_in_all_spellings():
    u = parse_source(SAMPLE)
    texts = [significant(render(u, s)) for s in ("native", "macro", "legacy")]
    assert texts[0] == texts[1] == texts[2]


def test_legacy_render_refuses_checked_constructs():
    with pytest.raises(InternalError):
        render(parse_source("_Ptr<int> p;"), "legacy")


def test_render_is_canonical():
    u = parse_source("int   f( int x ){return x+1;}")
    assert render(u) == "int f(int x) {\n  return x + 1;\n}\n"


@pytest.mark.parametrize("spelling", ["native", "macro"])
def test_round_trip_on_fuzzed_units(spelling):
    for g in gen_units(200, seed=11):
        assert parse_source(render(g.unit, spelling)) == g.unit, g.source
