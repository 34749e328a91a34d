"""Bounds-safe interface stubs for legacy prototypes.

Each pointer parameter of each prototype is matched against a short,
ordered rule table; the first rule that fits decides the annotation.
Parameters that already carry bounds or an itype, or that already have a
checked type, are left alone, which makes the rewrite idempotent.
"""

from __future__ import annotations

from dataclasses import dataclass

from .diagnostics import CompileError, Diagnostic, error
from .emitters import emit_macro
from .nodes import (
    Base, Binary, ByteCount, Conditional, Count, Directive, FuncDecl, Ident, Param, Pointer,
    PtrKind, ScopePragma, SourceUnit, StructDef, Typedef, VarDecl, clone,
)
from .printer import render_type
from .sema import analyze
from .types import TypeEnv

SIZE_NAMES = ("size_t", "int")


@dataclass(frozen=True)
class StubRule:
    name: str
    pattern: str
    template: str
    confidence: str


RULES = (
    StubRule("count", "pointer followed by one size-typed parameter n", "acount(n)", "high"),
    StubRule("byte-count", "void or 1-byte pointer followed by two size-typed parameters a, b",
             "abyte_count(a * b)", "high"),
    StubRule("single", "lone object pointer", "atype(ptr(T))", "low"),
)
RULES_BY_NAME = {r.name: r for r in RULES}


@dataclass
class StubNote:
    function: str
    param: str  # parameter name, or "<return>"
    annotation: str
    rule: str
    confidence: str

    def line(self) -> str:
        return f"{self.function}\t{self.param}\t{self.annotation}\t{self.rule}\t{self.confidence}"


@dataclass
class StubResult:
    unit: SourceUnit
    notes: list

    @property
    def code(self) -> str:
        return emit_macro(self.unit)

    def review(self) -> str:
        return "".join(n.line() + "\n" for n in self.notes)


def is_size_type(env: TypeEnv, t) -> bool:
    """``size_t``, ``int`` or an unsigned integer typedef whose name ends in ``_t``."""
    if not isinstance(t, Base):
        return False
    if t.name in SIZE_NAMES:
        return True
    if t.name.endswith("_t") and t.name in env.typedefs and env.is_integer(t):
        return not env.int_props(t)[1]
    return False


def _byte_sized(env: TypeEnv, t) -> bool:
    if env.is_void(t):
        return True
    try:
        return env.sizeof(t) == 1
    except (TypeError, KeyError, ValueError):
        return False


def _spell(t) -> str:
    return render_type(t, "macro")


class _Stubber:
    def __init__(self, env: TypeEnv):
        self.env = env
        self.notes: list[StubNote] = []

    def items(self, items):
        for item in items:
            if isinstance(item, FuncDecl):
                if item.body is not None:
                    raise CompileError([error("E-STUB-INPUT",
                                              f"'{item.name}' has a body; stubs take prototypes only", item.span)])
                self.prototype(item)
            elif isinstance(item, Conditional):
                self.items(item.then)
                self.items(item.orelse or [])
            elif isinstance(item, VarDecl):
                if item.init is not None:
                    raise CompileError([error("E-STUB-INPUT",
                                              f"'{item.name}' has an initializer; stubs take declarations only",
                                              item.span)])
            elif not isinstance(item, (Directive, Typedef, StructDef, ScopePragma)):
                raise CompileError([error("E-STUB-INPUT",
                                          f"unexpected {type(item).__name__} in a header",
                                          getattr(item, "span", None))])

    def note(self, f, param, annotation, rule, sizes=()):
        confidence = RULES_BY_NAME[rule].confidence
        # a plain int is only a guess at a length
        if any(self.env.resolve(q.type) == Base("int") for q in f.params if q.name in sizes):
            confidence = "low"
        self.notes.append(StubNote(f.name, param, annotation, rule, confidence))

    def prototype(self, f: FuncDecl):
        params = f.params
        for k, p in enumerate(params):
            t = self.env.resolve(p.type)
            if not isinstance(t, Pointer) or t.kind.checked or p.bounds is not None or p.itype is not None:
                continue
            run = []
            rest = params[k + 1:]
            for j, q in enumerate(rest):
                if q.name is None or not is_size_type(self.env, q.type):
                    break
                if self.env.resolve(q.type) == Base("int"):
                    # a plain int is a length only when it stands alone
                    nxt = rest[j + 1] if j + 1 < len(rest) else None
                    if not run and not (nxt is not None and is_size_type(self.env, nxt.type)):
                        run.append(q.name)
                    break
                run.append(q.name)
            self.param(f, p, t, run)
        rt = self.env.resolve(f.ret)
        if isinstance(rt, Pointer) and not rt.kind.checked and f.ret_bounds is None and f.ret_itype is None \
                and self.single_ok(rt):
            f.ret_itype = Pointer(PtrKind.PTR, rt.pointee)
            self.note(f, "<return>", f"atype({_spell(f.ret_itype)})", "single")

    def single_ok(self, t: Pointer) -> bool:
        # only object pointers: no void, no pointer-to-pointer
        inner = self.env.resolve(t.pointee)
        return not self.env.is_void(inner) and not isinstance(inner, Pointer)

    def param(self, f, p: Param, t: Pointer, run: list):
        if p.name is not None and len(run) == 1:
            n = run[0]
            if self.env.is_void(self.env.resolve(t.pointee)):
                p.bounds = ByteCount(Ident(n))
                self.note(f, p.name, f"abyte_count({n})", "count", run)
            else:
                p.bounds = Count(Ident(n))
                self.note(f, p.name, f"acount({n})", "count", run)
            return
        if p.name is not None and len(run) == 2 and _byte_sized(self.env, self.env.resolve(t.pointee)):
            a, b = run
            p.bounds = ByteCount(Binary("*", Ident(a), Ident(b)))
            self.note(f, p.name, f"abyte_count({a} * {b})", "byte-count", run)
            return
        if self.single_ok(t):
            p.itype = Pointer(PtrKind.PTR, t.pointee)
            self.note(f, p.name or f"#{f.params.index(p)}", f"atype({_spell(p.itype)})", "single")


def generate_stubs(header: SourceUnit) -> StubResult:
    """Annotate every pointer parameter and pointer return of the prototypes in ``header``."""
    unit = clone(header)
    env = analyze(unit).env
    st = _Stubber(env)
    st.items(unit.items)
    unit.items = [x for x in unit.items
                  if not (isinstance(x, Directive) and x.text.split() == ["#include", '"checkedc_compat.h"'])]
    return StubResult(unit, st.notes)


def check_stubs(result: StubResult) -> list[Diagnostic]:
    """Sema errors in generated stubs (expected to be empty)."""
    return analyze(result.unit).errors
