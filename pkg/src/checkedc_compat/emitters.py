"""Lowering to legacy C, macro-compatible C and the compat header.

The macro layer keys everything on one preprocessor flag: with
``USE_CHECKEDC`` defined the family expands to checked keywords, without
it to plain C. ``expand_macros`` is a small token-level preprocessor that
understands exactly that family, so both legs can be checked without a
real compiler.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, is_dataclass

from .diagnostics import CompileError, error
from .lexer import Token, tokenize, would_merge
from .nodes import (
    Block, Cast, Conditional, DoWhile, Field, For, FuncDecl, If, Param, ScopePragma,
    SizeofType, SourceUnit, Typedef, VarDecl, While, clone,
)
from .printer import render
from .types import lower_type

CHECKED_MACRO = "USE_CHECKEDC"
HEADER_NAME = "checkedc_compat.h"
INCLUDE_LINE = f'#include "{HEADER_NAME}"'

# name -> (params or None for object-like, checked replacement, legacy replacement)
MACRO_FAMILY = [
    ("ptr", ["t"], "_Ptr<t>", "t *"),
    ("array_ptr", ["t"], "_Array_ptr<t>", "t *"),
    ("nt_array_ptr", ["t"], "_Nt_array_ptr<t>", "t *"),
    ("acount", ["e"], ": count(e)", ""),
    ("abyte_count", ["e"], ": byte_count(e)", ""),
    ("abounds", ["a", "b"], ": bounds(a, b)", ""),
    ("atype", ["t"], ": itype(t)", ""),
    ("checked_scope", None, "_Checked", ""),
    ("unchecked_scope", None, "_Unchecked", ""),
]
FAMILY_NAMES = frozenset(name for name, *_ in MACRO_FAMILY)


def _define(name, params, body) -> str:
    head = name if params is None else f"{name}({', '.join(params)})"
    return f"#define {head} {body}".rstrip()


def gen_compat_header() -> str:
    lines = ["#ifndef CHECKEDC_COMPAT_H", "#define CHECKEDC_COMPAT_H", f"#ifdef {CHECKED_MACRO}"]
    lines += [_define(n, p, checked) for n, p, checked, _ in MACRO_FAMILY]
    lines.append("#else")
    lines += [_define(n, p, legacy) for n, p, _, legacy in MACRO_FAMILY]
    lines += ["#endif", "#endif"]
    return "\n".join(lines) + "\n"


# -- AST-level lowering ---------------------------------------------------------


def _splice(items: list, defined: bool, name: str) -> list:
    out = []
    for item in items:
        if isinstance(item, Conditional) and item.name == name:
            out.extend(_splice(item.active_branch(defined), defined, name))
            continue
        _resolve_inside(item, defined, name)
        out.append(item)
    return out


def _resolve_inside(node, defined, name):
    if isinstance(node, Conditional):
        node.then = _splice(node.then, defined, name)
        if node.orelse is not None:
            node.orelse = _splice(node.orelse, defined, name)
    elif isinstance(node, Block):
        node.items = _splice(node.items, defined, name)
    elif isinstance(node, FuncDecl) and node.body is not None:
        _resolve_inside(node.body, defined, name)
    elif isinstance(node, If):
        _resolve_inside(node.then, defined, name)
        if node.orelse is not None:
            _resolve_inside(node.orelse, defined, name)
    elif isinstance(node, (While, DoWhile, For)):
        _resolve_inside(node.body, defined, name)


def resolve_conditionals(unit: SourceUnit, defined: bool, name: str = CHECKED_MACRO) -> SourceUnit:
    """Copy of ``unit`` with every ``#ifdef name`` region replaced by its active branch."""
    u = clone(unit)
    return SourceUnit(_splice(u.items, defined, name), unit.source_name)


def _lower_in_place(node):
    if isinstance(node, list):
        for x in node:
            _lower_in_place(x)
        return
    if not is_dataclass(node):
        return
    if isinstance(node, (Param, Field, VarDecl)):
        node.type = lower_type(node.type)
        node.bounds = None
        node.itype = None
    elif isinstance(node, FuncDecl):
        node.ret = lower_type(node.ret)
        node.ret_bounds = None
        node.ret_itype = None
    elif isinstance(node, (Cast, SizeofType, Typedef)):
        node.type = lower_type(node.type)
    elif isinstance(node, Block):
        node.scope = None
    for f in fields(node):
        if f.name != "span":
            _lower_in_place(getattr(node, f.name))


def _drop_pragmas(items):
    out = []
    for item in items:
        if isinstance(item, ScopePragma):
            continue
        if isinstance(item, Conditional):
            item.then = _drop_pragmas(item.then)
            if item.orelse is not None:
                item.orelse = _drop_pragmas(item.orelse)
        out.append(item)
    return out


def strip_unit(unit: SourceUnit) -> SourceUnit:
    """The legacy-C unit: checked types lowered, annotations and scope markers erased."""
    u = resolve_conditionals(unit, defined=False)
    u.items = _drop_pragmas(u.items)
    _lower_in_place(u.items)
    return u


def emit_strip(unit: SourceUnit) -> str:
    return render(strip_unit(unit), "legacy")


def emit_macro(unit: SourceUnit) -> str:
    return INCLUDE_LINE + "\n" + render(unit, "macro")


def emit_native(unit: SourceUnit) -> str:
    """Checked-normalized output: native keywords, canonical formatting."""
    return render(unit, "native")


# -- the compat-family preprocessor -----------------------------------------------


@dataclass
class Macro:
    name: str
    params: list | None
    body: list  # Tokens of the replacement list


def _lines(tokens: list[Token]):
    """Group tokens into (is_directive, tokens) runs; directives end at the next line start."""
    i = 0
    n = len(tokens)
    while i < n and tokens[i].kind != "eof":
        if tokens[i].bol and tokens[i].text == "#":
            j = i + 1
            while j < n and tokens[j].kind != "eof" and not tokens[j].bol:
                j += 1
            yield True, tokens[i:j]
        else:
            j = i + 1
            while j < n and tokens[j].kind != "eof" and not (tokens[j].bol and tokens[j].text == "#"):
                j += 1
            yield False, tokens[i:j]
        i = j


def _parse_define(line: list[Token]) -> Macro | None:
    if len(line) < 3 or line[1].text != "define":
        return None
    name = line[2].text
    rest = line[3:]
    if rest and rest[0].text == "(" and rest[0].pre == "":
        close = next(k for k, t in enumerate(rest) if t.text == ")")
        params = [t.text for t in rest[1:close] if t.text != ","]
        body = rest[close + 1:]
        return Macro(name, params, body)
    return Macro(name, None, rest)


def macro_table(checked: bool) -> dict[str, Macro]:
    """The compat family as defined by :func:`gen_compat_header` for one branch."""
    table: dict[str, Macro] = {}
    active = [True]
    for is_dir, line in _lines(tokenize(gen_compat_header())):
        if not is_dir:
            continue
        head = line[1].text if len(line) > 1 else ""
        if head in ("ifdef", "ifndef"):
            name = line[2].text
            # the include guard is always taken
            taken = name != CHECKED_MACRO or checked == (head == "ifdef")
            active.append(taken)
        elif head == "else":
            active[-1] = not active[-1]
        elif head == "endif":
            active.pop()
        elif head == "define" and all(active):
            m = _parse_define(line)
            if m.name in FAMILY_NAMES:
                table[m.name] = m
    return table


class _Expander:
    def __init__(self, checked: bool):
        self.table = macro_table(checked)

    def expand(self, toks: list[Token], disabled=frozenset()) -> list[Token]:
        out: list[Token] = []
        i = 0
        while i < len(toks):
            t = toks[i]
            m = self.table.get(t.text) if t.kind == "identifier" and t.text not in disabled else None
            if m is None:
                out.append(t)
                i += 1
                continue
            if m.params is None:
                body = self._subst(m, {}, t.pre)
                out.extend(self.expand(body, disabled | {m.name}))
                i += 1
                continue
            if i + 1 >= len(toks) or toks[i + 1].text != "(":
                out.append(t)
                i += 1
                continue
            args, i = self._collect_args(toks, i + 1, t)
            if len(args) == 1 and not args[0] and len(m.params) == 0:
                args = []
            if len(args) != len(m.params):
                raise CompileError([error(
                    "E-MACRO-ARITY",
                    f"macro '{m.name}' expects {len(m.params)} argument(s), got {len(args)}", t.span)])
            expanded = {p: self.expand(a, disabled) for p, a in zip(m.params, args)}
            body = self._subst(m, expanded, t.pre)
            out.extend(self.expand(body, disabled | {m.name}))
        return out

    @staticmethod
    def _collect_args(toks, i, name_tok):
        depth = 0
        args: list[list[Token]] = [[]]
        i += 1  # past "("
        while i < len(toks):
            t = toks[i]
            if t.text == "(":
                depth += 1
            elif t.text == ")":
                if depth == 0:
                    return args, i + 1
                depth -= 1
            elif t.text == "," and depth == 0:
                args.append([])
                i += 1
                continue
            args[-1].append(t)
            i += 1
        raise CompileError([error("E-MACRO-ARITY", f"unterminated call of macro '{name_tok.text}'",
                                  name_tok.span)])

    @staticmethod
    def _subst(m: Macro, args: dict, lead: str) -> list[Token]:
        out: list[Token] = []
        for k, bt in enumerate(m.body):
            pre = lead if k == 0 else bt.pre
            if bt.kind == "identifier" and bt.text in args:
                arg = args[bt.text]
                for j, at in enumerate(arg):
                    out.append(Token(at.kind, at.text, at.span, pre if j == 0 else at.pre, False))
            else:
                out.append(Token(bt.kind, bt.text, bt.span, pre, False))
        return out


def _directive_words(line: list[Token]) -> list[str]:
    return [t.text for t in line[1:]]


def expand_macros(source: bytes | str, checked: bool) -> str:
    """Expand the compat family and resolve ``USE_CHECKEDC`` conditionals.

    Other directives are kept verbatim; the compat include and compat
    ``#define`` lines are consumed.
    """
    if isinstance(source, bytes):
        source = source.decode("utf-8")
    tokens = tokenize(source)
    exp = _Expander(checked)
    out: list[Token] = []
    # stack entries: ("flag", taken) for USE_CHECKEDC, ("other", None) for kept conditionals
    stack: list[tuple[str, bool]] = []

    def active() -> bool:
        return all(taken for kind, taken in stack if kind == "flag")

    for is_dir, line in _lines(tokens):
        if not is_dir:
            if active():
                out.extend(exp.expand(line))
            continue
        words = _directive_words(line)
        head = words[0] if words else ""
        if head in ("ifdef", "ifndef") and len(words) > 1 and words[1] == CHECKED_MACRO:
            stack.append(("flag", checked == (head == "ifdef")))
            continue
        if head in ("ifdef", "ifndef", "if"):
            stack.append(("other", True))
        elif head in ("else", "endif", "elif") and stack:
            kind, taken = stack[-1]
            if kind == "flag":
                if head == "else":
                    stack[-1] = (kind, not taken)
                elif head == "endif":
                    stack.pop()
                else:
                    raise CompileError([error("E-PP-UNSUPPORTED",
                                              f"#elif on {CHECKED_MACRO} is not supported", line[0].span)])
                continue
            if head == "endif":
                stack.pop()
        if not active():
            continue
        if head == "include" and len(words) > 1 and words[1] == f'"{HEADER_NAME}"':
            continue
        if head == "define" and len(words) > 1 and (words[1] in FAMILY_NAMES or words[1] == CHECKED_MACRO):
            continue
        out.extend(line)
    if stack:
        raise CompileError([error("E-PP-UNSUPPORTED", "unterminated conditional", None)])
    return (_join(out) + (tokens[-1].pre if tokens else "")).lstrip("\n")


def _join(tokens: list[Token]) -> str:
    parts: list[str] = []
    prev = ""
    for t in tokens:
        pre = t.pre
        if t.bol and "\n" not in pre and parts:
            pre = "\n" + pre
        if not pre and would_merge(prev, t.text):
            pre = " "
        parts.append(pre + t.text)
        prev = t.text
    return "".join(parts)
