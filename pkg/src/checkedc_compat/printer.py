"""Canonical pretty-printer for the three surface spellings.

Output is one item per line with two-space indentation; parentheses are
inserted from operator precedence only, so ``parse(render(u)) == u``.
"""

from __future__ import annotations

from .diagnostics import InternalError
from .lexer import would_merge
from .nodes import (
    Array, Assign, Base, Binary, Block, Break, ByteCount, Call, Cast, CharLit, Comma, Cond,
    Conditional, Continue, Count, Directive, DoWhile, Empty, ExprStmt, For, FuncDecl, Ident,
    If, Index, InitList, IntLit, Member, Pointer, Postfix, PtrKind, Range, Return,
    ScopePragma, SizeofExpr, SizeofType, SourceUnit, StrLit, StructDef, StructRef, Typedef,
    Unary, VarDecl, While,
)
from .parser import BINARY_PREC

SPELLINGS = ("native", "macro", "legacy")

NATIVE_PTR = {PtrKind.PTR: "_Ptr", PtrKind.ARRAY: "_Array_ptr", PtrKind.NT_ARRAY: "_Nt_array_ptr"}
MACRO_PTR = {PtrKind.PTR: "ptr", PtrKind.ARRAY: "array_ptr", PtrKind.NT_ARRAY: "nt_array_ptr"}
NATIVE_SCOPE = {"checked": "_Checked", "unchecked": "_Unchecked"}
MACRO_SCOPE = {"checked": "checked_scope", "unchecked": "unchecked_scope"}

PREC_COMMA, PREC_ASSIGN, PREC_COND = 0, 1, 2
PREC_UNARY, PREC_POSTFIX, PREC_PRIMARY = 13, 14, 15
INDENT = "  "


def char_literal(value: int) -> str:
    special = {0: "\\0", 10: "\\n", 9: "\\t", 13: "\\r", 39: "\\'", 92: "\\\\"}
    if value in special:
        return f"'{special[value]}'"
    if 32 <= value < 127:
        return f"'{chr(value)}'"
    return f"'\\x{value & 0xFF:02x}'"


class Printer:
    def __init__(self, spelling: str = "native"):
        if spelling not in SPELLINGS:
            raise ValueError(f"unknown spelling {spelling!r}")
        self.spelling = spelling

    # -- types ---------------------------------------------------------------

    def checked_word(self, kind):
        if self.spelling == "legacy":
            raise InternalError("checked pointer type reached the legacy printer")
        return (NATIVE_PTR if self.spelling == "native" else MACRO_PTR)[kind]

    def declare(self, t, inner: str) -> str:
        """Render type ``t`` around declarator text ``inner`` (may be empty)."""
        if isinstance(t, Array):
            size = "" if t.size is None else self.expr(t.size)
            return self.declare(t.elem, f"{inner}[{size}]")
        if isinstance(t, Pointer) and t.kind is PtrKind.PLAIN:
            if isinstance(t.pointee, Array):
                raise InternalError("pointer-to-array declarators are outside the subset")
            star = "* const " if t.const else "*"
            if t.const and not inner:
                star = "* const"
            return self.declare(t.pointee, star + inner)
        spec = self.type_spec(t)
        if not inner:
            return spec
        return f"{spec} {inner}"

    def type_spec(self, t) -> str:
        const = "const " if getattr(t, "const", False) else ""
        if isinstance(t, Base):
            return const + t.name
        if isinstance(t, StructRef):
            return f"{const}struct {t.tag}"
        if isinstance(t, Pointer):
            word = self.checked_word(t.kind)
            inner = self.type_name(t.pointee)
            if self.spelling == "native":
                close = " >" if inner.endswith(">") else ">"
                return f"{const}{word}<{inner}{close}"
            return f"{const}{word}({inner})"
        raise InternalError(f"cannot print type {t!r}")

    def type_name(self, t) -> str:
        return self.declare(t, "")

    # -- annotations ------------------------------------------------------------

    def annotations(self, bounds, itype) -> str:
        if bounds is None and itype is None:
            return ""
        if self.spelling == "legacy":
            raise InternalError("bounds annotation reached the legacy printer")
        clauses = []
        if bounds is not None:
            clauses.append(self.bounds_clause(bounds))
        if itype is not None:
            clauses.append(("itype", self.type_name(itype)))
        if self.spelling == "native":
            return " : " + " ".join(f"{name}({body})" for name, body in clauses)
        return "".join(f" a{'type' if name == 'itype' else name}({body})" for name, body in clauses)

    def bounds_clause(self, b):
        if isinstance(b, Count):
            return ("count", self.expr(b.expr, PREC_ASSIGN))
        if isinstance(b, ByteCount):
            return ("byte_count", self.expr(b.expr, PREC_ASSIGN))
        if isinstance(b, Range):
            return ("bounds", f"{self.expr(b.lo, PREC_ASSIGN)}, {self.expr(b.hi, PREC_ASSIGN)}")
        raise InternalError(f"unknown bounds {b!r}")

    # -- expressions --------------------------------------------------------------

    def expr(self, e, min_prec: int = PREC_COMMA) -> str:
        text, prec = self._expr(e)
        if prec < min_prec:
            return f"({text})"
        return text

    def _expr(self, e):
        if isinstance(e, Ident):
            return e.name, PREC_PRIMARY
        if isinstance(e, IntLit):
            if e.value < 0:
                raise InternalError("negative literal; use unary minus")
            return (e.text or str(e.value)), PREC_PRIMARY
        if isinstance(e, CharLit):
            return (e.text or char_literal(e.value)), PREC_PRIMARY
        if isinstance(e, StrLit):
            return e.text, PREC_PRIMARY
        if isinstance(e, Comma):
            return f"{self.expr(e.left, PREC_COMMA)}, {self.expr(e.right, PREC_ASSIGN)}", PREC_COMMA
        if isinstance(e, Assign):
            return f"{self.expr(e.target, PREC_UNARY)} {e.op} {self.expr(e.value, PREC_ASSIGN)}", PREC_ASSIGN
        if isinstance(e, Cond):
            return (f"{self.expr(e.test, PREC_COND + 1)} ? {self.expr(e.then, PREC_COMMA)} : "
                    f"{self.expr(e.orelse, PREC_COND)}"), PREC_COND
        if isinstance(e, Binary):
            p = BINARY_PREC[e.op] + 2
            return f"{self.expr(e.left, p)} {e.op} {self.expr(e.right, p + 1)}", p
        if isinstance(e, Unary):
            operand = self.expr(e.operand, PREC_UNARY)
            sep = " " if would_merge(e.op, operand[:2]) else ""
            return f"{e.op}{sep}{operand}", PREC_UNARY
        if isinstance(e, Cast):
            return f"({self.type_name(e.type)}){self.expr(e.expr, PREC_UNARY)}", PREC_UNARY
        if isinstance(e, SizeofType):
            return f"sizeof({self.type_name(e.type)})", PREC_UNARY
        if isinstance(e, SizeofExpr):
            return f"sizeof({self.expr(e.expr, PREC_COMMA)})", PREC_UNARY
        if isinstance(e, Postfix):
            return f"{self.expr(e.operand, PREC_POSTFIX)}{e.op}", PREC_POSTFIX
        if isinstance(e, Index):
            return f"{self.expr(e.base, PREC_POSTFIX)}[{self.expr(e.index)}]", PREC_POSTFIX
        if isinstance(e, Member):
            op = "->" if e.arrow else "."
            return f"{self.expr(e.base, PREC_POSTFIX)}{op}{e.name}", PREC_POSTFIX
        if isinstance(e, Call):
            args = ", ".join(self.expr(a, PREC_ASSIGN) for a in e.args)
            return f"{e.func}({args})", PREC_POSTFIX
        if isinstance(e, InitList):
            return "{" + ", ".join(self.initializer(i) for i in e.items) + "}", PREC_PRIMARY
        raise InternalError(f"cannot print expression {e!r}")

    def initializer(self, init) -> str:
        if isinstance(init, InitList):
            return "{" + ", ".join(self.initializer(i) for i in init.items) + "}"
        return self.expr(init, PREC_ASSIGN)

    # -- declarations -------------------------------------------------------------

    def var_decl(self, d: VarDecl) -> str:
        storage = "".join(s + " " for s in d.storage)
        text = storage + self.declare(d.type, d.name) + self.annotations(d.bounds, d.itype)
        if d.init is not None:
            text += " = " + self.initializer(d.init)
        return text

    def param(self, p) -> str:
        return self.declare(p.type, p.name or "") + self.annotations(p.bounds, p.itype)

    def signature(self, f: FuncDecl) -> str:
        params = [self.param(p) for p in f.params]
        if f.variadic:
            params.append("...")
        plist = ", ".join(params) if params else "void"
        storage = "".join(s + " " for s in f.storage)
        return storage + self.declare(f.ret, f"{f.name}({plist})") + self.annotations(f.ret_bounds, f.ret_itype)

    def fields(self, fields, depth) -> list[str]:
        pad = INDENT * depth
        return [f"{pad}{self.declare(f.type, f.name)}{self.annotations(f.bounds, f.itype)};" for f in fields]

    def item(self, item, depth: int = 0) -> list[str]:
        if isinstance(item, Directive):
            return [item.text]
        if isinstance(item, ScopePragma):
            line = f"#pragma CHECKED_SCOPE {'ON' if item.on else 'OFF'}"
            if self.spelling == "legacy":
                raise InternalError("scope pragma reached the legacy printer")
            if self.spelling == "macro":
                return ["#ifdef USE_CHECKEDC", line, "#endif"]
            return [line]
        if isinstance(item, Conditional):
            return self.conditional(item, depth, self.item)
        if isinstance(item, FuncDecl):
            sig = self.signature(item)
            if item.body is None:
                return [sig + ";"]
            return [sig + " " + self.block_open(item.body)] + self.block_items(item.body.items, depth + 1) + ["}"]
        if isinstance(item, VarDecl):
            return [self.var_decl(item) + ";"]
        if isinstance(item, StructDef):
            return [f"struct {item.tag} {{"] + self.fields(item.fields, depth + 1) + ["};"]
        if isinstance(item, Typedef):
            if item.struct is not None:
                head = "struct"
                if getattr(item.type, "const", False):
                    head = "const struct"
                return ([f"typedef {head} {item.struct.tag} {{"] + self.fields(item.struct.fields, 1)
                        + [f"}} {item.name};"])
            return [f"typedef {self.declare(item.type, item.name)};"]
        raise InternalError(f"cannot print item {item!r}")

    def conditional(self, c: Conditional, depth, render_one) -> list[str]:
        lines = [f"#{'ifndef' if c.negated else 'ifdef'} {c.name}"]
        for x in c.then:
            lines += render_one(x, depth)
        if c.orelse is not None:
            lines.append("#else")
            for x in c.orelse:
                lines += render_one(x, depth)
        lines.append("#endif")
        return lines

    # -- statements ---------------------------------------------------------------

    def block_items(self, items, depth) -> list[str]:
        out = []
        for s in items:
            out += self.stmt(s, depth)
        return out

    def block_open(self, b: Block) -> str:
        if b.scope is None:
            return "{"
        if self.spelling == "legacy":
            raise InternalError("scope marker reached the legacy printer")
        words = NATIVE_SCOPE if self.spelling == "native" else MACRO_SCOPE
        return f"{words[b.scope]} {{"

    def stmt(self, s, depth) -> list[str]:
        pad = INDENT * depth
        if isinstance(s, VarDecl):
            return [pad + self.var_decl(s) + ";"]
        if isinstance(s, Directive):
            return [s.text]
        if isinstance(s, Conditional):
            return self.conditional(s, depth, self.stmt)
        if isinstance(s, Block):
            return [pad + self.block_open(s)] + self.block_items(s.items, depth + 1) + [pad + "}"]
        if isinstance(s, ExprStmt):
            return [pad + self.expr(s.expr) + ";"]
        if isinstance(s, Return):
            return [pad + ("return;" if s.value is None else f"return {self.expr(s.value)};")]
        if isinstance(s, Break):
            return [pad + "break;"]
        if isinstance(s, Continue):
            return [pad + "continue;"]
        if isinstance(s, Empty):
            return [pad + ";"]
        if isinstance(s, If):
            lines = self.headed(f"if ({self.expr(s.test)})", s.then, depth)
            if s.orelse is not None:
                if isinstance(s.orelse, If):
                    tail = self.stmt(s.orelse, depth)
                    head = "else " + tail[0].lstrip()
                else:
                    tail = self.headed("else", s.orelse, depth)
                    head = tail[0].lstrip()
                if lines[-1].strip() == "}":
                    lines[-1] += " " + head
                else:
                    lines.append(pad + head)
                lines += tail[1:]
            return lines
        if isinstance(s, While):
            return self.headed(f"while ({self.expr(s.test)})", s.body, depth)
        if isinstance(s, DoWhile):
            body = self.headed("do", s.body, depth)
            if body[-1].strip() == "}":
                body[-1] = body[-1] + f" while ({self.expr(s.test)});"
                return body
            return body + [pad + f"while ({self.expr(s.test)});"]
        if isinstance(s, For):
            if isinstance(s.init, VarDecl):
                init = self.var_decl(s.init)
            else:
                init = "" if s.init is None else self.expr(s.init)
            test = "" if s.test is None else " " + self.expr(s.test)
            step = "" if s.step is None else " " + self.expr(s.step)
            return self.headed(f"for ({init};{test};{step})", s.body, depth)
        raise InternalError(f"cannot print statement {s!r}")

    def headed(self, head: str, body, depth) -> list[str]:
        pad = INDENT * depth
        if isinstance(body, Block):
            inner = self.stmt(body, depth)
            return [pad + head + " " + inner[0].lstrip()] + inner[1:]
        return [pad + head] + self.stmt(body, depth + 1)

    def unit(self, u: SourceUnit) -> str:
        lines = []
        for item in u.items:
            lines += self.item(item)
        return "\n".join(lines) + ("\n" if lines else "")


def render(unit: SourceUnit, spelling: str = "native") -> str:
    """Render ``unit`` in ``native``, ``macro`` or ``legacy`` spelling.

    Legacy spelling raises InternalError if checked constructs remain;
    lower the unit with the emitters first.
    """
    return Printer(spelling).unit(unit)


def render_expr(e, spelling: str = "native") -> str:
    return Printer(spelling).expr(e)


def render_type(t, spelling: str = "native") -> str:
    return Printer(spelling).type_name(t)
