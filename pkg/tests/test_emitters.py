from __future__ import annotations

import pytest

from checkedc_compat.diagnostics import CompileError
from checkedc_compat.emitters import (
    INCLUDE_LINE, emit_macro, emit_native, emit_strip, expand_macros, gen_compat_header,
    resolve_conditionals,
)
from checkedc_compat.fuzz import gen_units
from checkedc_compat.lexer import CHECKED_KEYWORDS, significant, tokenize
from checkedc_compat.parser import parse_source
from checkedc_compat.printer import render

from conftest import FREAD_LEGACY, FREAD_MACRO, FREAD_NATIVE, PTR_MACRO_DEF

UNITS = gen_units(200, seed=3)


def header_branches():
    lines = gen_compat_header().splitlines()
    k_if, k_else = lines.index("#ifdef USE_CHECKEDC"), lines.index("#else")
    k_end = lines.index("#endif", k_else)
    return lines[k_if + 1:k_else], lines[k_else + 1:k_end]


def test_header_contains_ptr_definitions():
    checked, legacy = header_branches()
    assert "#define ptr(t) _Ptr<t>" in checked
    assert "#define ptr(t) t *" in legacy
    assert "#ifdef USE_CHECKEDC\n#define ptr(t) _Ptr<t>\n" in gen_compat_header()


@pytest.mark.parametrize("line", [
    "#define array_ptr(t) _Array_ptr<t>",
    "#define nt_array_ptr(t) _Nt_array_ptr<t>",
    "#define acount(e) : count(e)",
    "#define abyte_count(e) : byte_count(e)",
    "#define abounds(a, b) : bounds(a, b)",
    "#define atype(t) : itype(t)",
    "#define checked_scope _Checked",
    "#define unchecked_scope _Unchecked",
])
def test_header_checked_branch(line):
    assert line in header_branches()[0]


def test_header_legacy_branch_erases_annotations():
    legacy = header_branches()[1]
    assert len(legacy) == 9
    for line in legacy:
        name = line.split()[1].split("(")[0]
        if name not in ("ptr", "array_ptr", "nt_array_ptr"):
            assert line.split(")")[-1].strip() == "" or line == f"#define {name}"


@pytest.mark.parametrize("checked,expected", [(True, "_Ptr<FILE> f;"), (False, "FILE * f;")])
def test_expand_ptr(checked, expected):
    assert significant(expand_macros("ptr(FILE) f;", checked)) == significant(expected)


def test_expand_with_inline_ptr_definition():
    # a hand-written definition block is consumed like the generated header
    src = PTR_MACRO_DEF + "ptr(int) x;\n"
    assert significant(expand_macros(src, True)) == significant("_Ptr<int> x;")
    assert significant(expand_macros(src, False)) == significant("int * x;")


def test_fread_macro_emission():
    out = emit_macro(parse_source(FREAD_NATIVE))
    assert out.splitlines()[0] == INCLUDE_LINE
    assert significant(out)[len(significant(INCLUDE_LINE)):] == significant(FREAD_MACRO)


def test_fread_legacy_expansion():
    out = expand_macros(emit_macro(parse_source(FREAD_NATIVE)), False)
    assert out.strip() == FREAD_LEGACY
    assert significant(expand_macros(FREAD_MACRO, False)) == significant(FREAD_LEGACY)


def test_fread_strip():
    assert emit_strip(parse_source(FREAD_MACRO)).strip() == FREAD_LEGACY


def test_source_without_macros_unchanged():
    src = "int f(int x) {\n  return x + 1;\n}\n#include <stdio.h>\n"
    assert expand_macros(src, True) == src
    assert expand_macros(src, False) == src


def test_other_directives_preserved():
    src = "#include <stdint.h>\n#define N 4\nptr(int) p;\n"
    out = expand_macros(src, False)
    assert "#include <stdint.h>" in out and "#define N 4" in out


def test_arity_error():
    with pytest.raises(CompileError) as exc:
        expand_macros("ptr(int, char) p;", True)
    assert exc.value.diagnostics[0].code == "E-MACRO-ARITY"


def test_annotation_free_macro_output_is_strip_plus_include():
    u = parse_source("int g(int a) {\n  return a;\n}\n")
    out = emit_macro(u)
    assert out == INCLUDE_LINE + "\n" + emit_strip(u)


def test_annotation_free_strip_is_legacy_render():
    u = parse_source("struct s { int a; };\nint g(struct s *p) { return p->a; }")
    assert emit_strip(u) == render(u, "legacy")


ERASED = set(CHECKED_KEYWORDS)


@pytest.mark.parametrize("g", UNITS, ids=lambda g: f"seed{g.seed}")
def test_commutation_squares(g):
    m = emit_macro(g.unit)
    assert significant(expand_macros(m, False)) == significant(emit_strip(g.unit))
    assert significant(expand_macros(m, True)) == significant(emit_native(resolve_conditionals(g.unit, True)))


@pytest.mark.parametrize("g", UNITS[:100], ids=lambda g: f"seed{g.seed}")
def test_strip_erasure_and_idempotence(g):
    out = emit_strip(g.unit)
    toks = [t.text for t in tokenize(out)]
    assert not ERASED & set(toks)
    assert emit_strip(parse_source(out)) == out


@pytest.mark.parametrize("g", UNITS[:100], ids=lambda g: f"seed{g.seed}")
def test_macro_output_reparses_to_same_unit(g):
    u = parse_source(emit_macro(g.unit))
    assert u.items[1:] == g.unit.items
