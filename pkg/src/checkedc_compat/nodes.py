"""AST and type model for the annotated C subset.

Equality is structural: spans and literal spellings are excluded from
comparisons, so a unit equals its own re-parsed rendering.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, fields, is_dataclass, replace
from typing import Union


def _span():
    return field(default=None, compare=False, repr=False)


# -- types -------------------------------------------------------------------


class PtrKind(enum.Enum):
    PLAIN = "PlainPtr"
    PTR = "Ptr"
    ARRAY = "ArrayPtr"
    NT_ARRAY = "NtArrayPtr"

    @property
    def checked(self) -> bool:
        return self is not PtrKind.PLAIN


@dataclass
class Base:
    """Scalar, void or typedef name (``unsigned int``, ``size_t``, ...)."""

    name: str
    const: bool = False


@dataclass
class StructRef:
    tag: str
    const: bool = False


@dataclass
class Pointer:
    kind: PtrKind
    pointee: "CType"
    const: bool = False


@dataclass
class Array:
    elem: "CType"
    size: "Expr | None"


CType = Union[Base, StructRef, Pointer, Array]


# -- bounds ------------------------------------------------------------------


@dataclass
class Count:
    expr: "Expr"


@dataclass
class ByteCount:
    expr: "Expr"


@dataclass
class Range:
    lo: "Expr"
    hi: "Expr"


Bounds = Union[Count, ByteCount, Range]


# -- expressions -------------------------------------------------------------


@dataclass
class Ident:
    name: str
    span: tuple | None = _span()


@dataclass
class IntLit:
    value: int
    text: str | None = field(default=None, compare=False)
    span: tuple | None = _span()


@dataclass
class CharLit:
    value: int
    text: str = field(default="", compare=False)
    span: tuple | None = _span()


@dataclass
class StrLit:
    text: str  # source spelling including quotes
    span: tuple | None = _span()


@dataclass
class Unary:
    op: str  # - + ! ~ * & ++ -- (prefix)
    operand: "Expr"
    span: tuple | None = _span()


@dataclass
class Postfix:
    op: str  # ++ --
    operand: "Expr"
    span: tuple | None = _span()


@dataclass
class Binary:
    op: str
    left: "Expr"
    right: "Expr"
    span: tuple | None = _span()


@dataclass
class Assign:
    op: str  # = += -= ...
    target: "Expr"
    value: "Expr"
    span: tuple | None = _span()


@dataclass
class Cond:
    test: "Expr"
    then: "Expr"
    orelse: "Expr"
    span: tuple | None = _span()


@dataclass
class Call:
    func: str
    args: list
    span: tuple | None = _span()


@dataclass
class Index:
    base: "Expr"
    index: "Expr"
    span: tuple | None = _span()


@dataclass
class Member:
    base: "Expr"
    name: str
    arrow: bool
    span: tuple | None = _span()


@dataclass
class Cast:
    type: CType
    expr: "Expr"
    span: tuple | None = _span()


@dataclass
class SizeofType:
    type: CType
    span: tuple | None = _span()


@dataclass
class SizeofExpr:
    expr: "Expr"
    span: tuple | None = _span()


@dataclass
class Comma:
    left: "Expr"
    right: "Expr"
    span: tuple | None = _span()


@dataclass
class InitList:
    items: list
    span: tuple | None = _span()


Expr = Union[Ident, IntLit, CharLit, StrLit, Unary, Postfix, Binary, Assign, Cond, Call,
             Index, Member, Cast, SizeofType, SizeofExpr, Comma]


# -- declarations ------------------------------------------------------------


@dataclass
class Param:
    type: CType
    name: str | None
    bounds: Bounds | None = None
    itype: CType | None = None
    span: tuple | None = _span()


@dataclass
class Field:
    type: CType
    name: str
    bounds: Bounds | None = None
    itype: CType | None = None
    span: tuple | None = _span()


@dataclass
class VarDecl:
    type: CType
    name: str
    bounds: Bounds | None = None
    itype: CType | None = None
    init: "Expr | InitList | None" = None
    storage: tuple = ()
    span: tuple | None = _span()


@dataclass
class FuncDecl:
    ret: CType
    name: str
    params: list
    variadic: bool = False
    ret_bounds: Bounds | None = None
    ret_itype: CType | None = None
    storage: tuple = ()
    body: "Block | None" = None
    span: tuple | None = _span()


@dataclass
class StructDef:
    tag: str
    fields: list
    span: tuple | None = _span()


@dataclass
class Typedef:
    type: CType
    name: str
    struct: StructDef | None = None  # ``typedef struct tag { ... } name;``
    span: tuple | None = _span()


@dataclass
class Directive:
    """A preprocessor line kept verbatim (``#include``, ``#define``, ...)."""

    text: str
    span: tuple | None = _span()


@dataclass
class ScopePragma:
    on: bool
    span: tuple | None = _span()


@dataclass
class Conditional:
    """``#ifdef NAME`` / ``#ifndef NAME`` with optional ``#else``; items or statements."""

    name: str
    negated: bool
    then: list
    orelse: list | None = None
    span: tuple | None = _span()

    def active_branch(self, defined: bool) -> list:
        taken = defined != self.negated
        return self.then if taken else (self.orelse or [])

    def checked_branch(self) -> list:
        return self.active_branch(True)

    def legacy_branch(self) -> list:
        return self.active_branch(False)


# -- statements --------------------------------------------------------------


@dataclass
class Block:
    items: list
    scope: str | None = None  # None | "checked" | "unchecked"
    span: tuple | None = _span()


@dataclass
class If:
    test: Expr
    then: "Stmt"
    orelse: "Stmt | None" = None
    span: tuple | None = _span()


@dataclass
class While:
    test: Expr
    body: "Stmt"
    span: tuple | None = _span()


@dataclass
class DoWhile:
    body: "Stmt"
    test: Expr
    span: tuple | None = _span()


@dataclass
class For:
    init: "VarDecl | Expr | None"
    test: "Expr | None"
    step: "Expr | None"
    body: "Stmt"
    span: tuple | None = _span()


@dataclass
class Return:
    value: "Expr | None" = None
    span: tuple | None = _span()


@dataclass
class Break:
    span: tuple | None = _span()


@dataclass
class Continue:
    span: tuple | None = _span()


@dataclass
class ExprStmt:
    expr: Expr
    span: tuple | None = _span()


@dataclass
class Empty:
    span: tuple | None = _span()


Stmt = Union[Block, If, While, DoWhile, For, Return, Break, Continue, ExprStmt, Empty,
             VarDecl, Conditional]


@dataclass
class SourceUnit:
    items: list
    source_name: str = field(default="<input>", compare=False)

    @property
    def scope_default(self) -> str:
        """"Checked" iff the checked-scope pragma precedes every other item."""
        for item in self.items:
            if isinstance(item, ScopePragma):
                return "Checked" if item.on else "Unchecked"
            return "Unchecked"
        return "Unchecked"


# -- traversal helpers ---------------------------------------------------------



def children(node):
    """Direct AST children (nodes and nodes inside lists), in field order."""
    if not is_dataclass(node):
        return
    for f in fields(node):
        if f.name == "span":
            continue
        value = getattr(node, f.name)
        if isinstance(value, list):
            for v in value:
                if is_dataclass(v):
                    yield v
        elif is_dataclass(value):
            yield value


def walk(node):
    yield node
    for child in children(node):
        yield from walk(child)


def clone(node):
    """Deep copy of a node tree (keeps spans)."""
    if isinstance(node, list):
        return [clone(n) for n in node]
    if isinstance(node, enum.Enum) or not is_dataclass(node):
        return node
    kwargs = {}
    for f in fields(node):
        kwargs[f.name] = clone(getattr(node, f.name))
    return type(node)(**kwargs)


def strip_spans(node):
    """Copy with spans cleared; useful when splicing nodes into generated code."""
    if isinstance(node, list):
        return [strip_spans(n) for n in node]
    if isinstance(node, enum.Enum) or not is_dataclass(node):
        return node
    kwargs = {f.name: (None if f.name == "span" else strip_spans(getattr(node, f.name)))
              for f in fields(node)}
    return type(node)(**kwargs)


def is_pointer(t, kind: PtrKind | None = None) -> bool:
    return isinstance(t, Pointer) and (kind is None or t.kind is kind)


def has_checked_constructs(node) -> bool:
    for n in walk(node):
        if isinstance(n, Pointer) and n.kind.checked:
            return True
        if isinstance(n, (Param, Field, VarDecl)) and (n.bounds is not None or n.itype is not None):
            return True
        if isinstance(n, FuncDecl) and (n.ret_bounds is not None or n.ret_itype is not None):
            return True
        if isinstance(n, Block) and n.scope is not None:
            return True
        if isinstance(n, ScopePragma):
            return True
    return False


