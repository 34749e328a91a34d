"""Lower checked code to legacy C with explicit runtime bounds checks.

Every access through a checked pointer (or an array) in checked scope is
rewritten as ``R[__chk_idx(k, R, i, lo, hi)]`` where ``R`` is the access
root, ``i`` the element index and ``[lo, hi)`` the root's bounds in
elements. Roots that are not plain identifiers go through a temporary so
they are evaluated once. Binding a pointer to declared bounds (initializers,
assignments, call arguments, returns) is guarded by ``__chk_bnd`` on byte
ranges.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .diagnostics import CompileError, position
from .emitters import resolve_conditionals, strip_unit
from .nodes import (
    Array, Assign, Base, Binary, Block, Call, Cast, Comma, Cond, Conditional, DoWhile, ExprStmt,
    For, FuncDecl, Ident, If, Index, InitList, IntLit, Member, Pointer, Postfix, PtrKind, Return,
    SizeofExpr, SizeofType, SourceUnit, Unary, VarDecl, While, clone, strip_spans,
)
from .printer import render, render_expr
from .sema import Analysis, Known, add, analyze, bounds_exprs, is_pure, mul, substitute
from .types import lower_type

SITE_KINDS = ("deref-read", "deref-write", "index", "interface-boundary", "nt-terminator-write",
              "bounds-decl")
LONG = Base("long")

PRELUDE = """\
#ifdef CHECKEDC_TRAP_HANDLER
void __checked_trap(int id);
#else
#include <stdio.h>
#include <stdlib.h>
static void __checked_trap(int id) {
  fprintf(stderr, "checked trap %d\\n", id);
  abort();
}
#endif
static long __chk_idx(int id, const void *p, long i, long lo, long hi) {
  if (p == 0 || i < lo || i >= hi)
    __checked_trap(id);
  return i;
}
static long __chk_nt(int id, long i, long hi, long v) {
  if (i == hi && v != 0)
    __checked_trap(id);
  return v;
}
static void __chk_bnd(int id, const void *p, long lo, long hi, long need_lo, long need_hi) {
  if (p != 0 && (need_lo < lo || need_hi > hi))
    __checked_trap(id);
}
static void __chk_nn(int id, const void *p) {
  if (p == 0)
    __checked_trap(id);
}
"""


@dataclass
class CheckSite:
    id: int
    kind: str
    span: tuple
    bounds: str = ""  # rendered lowered range, for humans
    _lit: IntLit | None = field(default=None, repr=False, compare=False)

    def line_col(self, source) -> tuple[int, int]:
        return position(source, self.span[0]) if self.span else (0, 0)


@dataclass
class Instrumented:
    code: str
    sites: list
    unit: SourceUnit  # the lowered unit that ``code`` renders

    def site_map(self, source) -> str:
        lines = []
        for s in self.sites:
            line, col = s.line_col(source)
            lines.append(f"{s.id}\t{s.kind}\t{line}:{col}")
        return "\n".join(lines) + ("\n" if lines else "")


class Instrumenter:
    def __init__(self, unit: SourceUnit, analysis: Analysis):
        self.unit = unit
        self.a = analysis
        self.sites: list[CheckSite] = []
        self.temps: list[VarDecl] = []
        self.ntemp = 0

    # -- bookkeeping -------------------------------------------------------------

    def site(self, kind, node, lo=None, hi=None) -> IntLit:
        lit = IntLit(-1)
        text = ""
        if lo is not None:
            text = f"[{render_expr(lo)}, {render_expr(hi)})"
        self.sites.append(CheckSite(-1, kind, node.span, text, lit))
        return lit

    def temp(self, t) -> Ident:
        self.ntemp += 1
        name = f"__cc_t{self.ntemp}"
        t = self.a.env.resolve(t)
        if isinstance(t, Array):
            t = Pointer(PtrKind.PLAIN, t.elem)
        self.temps.append(VarDecl(lower_type(t), name))
        return Ident(name)

    def finish(self):
        order = sorted(range(len(self.sites)),
                       key=lambda k: (self.sites[k].span[0], -self.sites[k].span[1], k))
        sites = []
        for new_id, k in enumerate(order):
            s = self.sites[k]
            s.id = new_id
            s._lit.value = new_id
            s._lit.text = str(new_id)
            sites.append(s)
        self.sites = sites

    # -- items and statements ------------------------------------------------------

    def run(self) -> SourceUnit:
        items = [self.item(x) for x in self.unit.items]
        self.finish()
        return SourceUnit(items, self.unit.source_name)

    def item(self, item):
        if isinstance(item, FuncDecl) and item.body is not None:
            self.temps = []
            self.ntemp = 0
            body = self.stmt(item.body)
            body.items = self.temps + body.items
            out = clone(item)
            out.body = body
            return out
        if isinstance(item, Conditional):
            out = clone(item)
            out.then = [self.item(x) for x in item.then]
            if item.orelse is not None:
                out.orelse = [self.item(x) for x in item.orelse]
            return out
        return clone(item)

    def stmt(self, s):
        if isinstance(s, Block):
            return Block([self.stmt(x) for x in s.items], s.scope)
        if isinstance(s, VarDecl):
            out = clone(s)
            if s.init is not None and not isinstance(s.init, InitList):
                value = self.expr(s.init)
                if self.a.is_checked(s):
                    sym = self.a.decl_symbols.get(id(s))
                    target = sym.view_type(True) if sym else s.type
                    value = self.establish(s.init, value, target, s.bounds, s, s.name)
                out.init = value
            elif isinstance(s.init, InitList):
                out.init = self.init_list(s.init)
            return out
        if isinstance(s, ExprStmt):
            return ExprStmt(self.expr(s.expr))
        if isinstance(s, If):
            return If(self.expr(s.test), self.stmt(s.then),
                      None if s.orelse is None else self.stmt(s.orelse))
        if isinstance(s, While):
            return While(self.expr(s.test), self.stmt(s.body))
        if isinstance(s, DoWhile):
            return DoWhile(self.stmt(s.body), self.expr(s.test))
        if isinstance(s, For):
            init = s.init
            if isinstance(init, VarDecl):
                init = self.stmt(init)
            elif init is not None:
                init = self.expr(init)
            return For(init, None if s.test is None else self.expr(s.test),
                       None if s.step is None else self.expr(s.step), self.stmt(s.body))
        if isinstance(s, Return):
            if s.value is None:
                return Return()
            value = self.expr(s.value)
            f = self.a.func_of_return.get(id(s))
            if f is not None and self.a.is_checked(s):
                ret = f.ret_itype if f.ret_itype is not None else f.ret
                value = self.establish(s.value, value, ret, f.ret_bounds, s, None)
            return Return(value)
        if isinstance(s, Conditional):
            out = clone(s)
            out.then = [self.stmt(x) for x in s.then]
            if s.orelse is not None:
                out.orelse = [self.stmt(x) for x in s.orelse]
            return out
        return clone(s)

    def init_list(self, il):
        return InitList([self.init_list(x) if isinstance(x, InitList) else self.expr(x) for x in il.items])

    # -- establishment ---------------------------------------------------------------

    def need(self, target, bounds, self_expr, mapping=None) -> Known | None:
        t = self.a.env.resolve(target)
        if not isinstance(t, Pointer) or not t.kind.checked:
            return None
        esz = self.a.elem_size(t)
        nt = t.kind is PtrKind.NT_ARRAY
        if t.kind is PtrKind.PTR:
            return Known(IntLit(0), IntLit(1), esz)
        if bounds is None and not nt:
            return None
        if bounds is not None and mapping:
            bounds = type(bounds)(*[substitute(x, mapping) for x in _bexprs(bounds)])
        kb = self.a.declared_known(bounds, self_expr, t, nt)
        if nt:
            kb = Known(kb.lo, add(kb.hi, IntLit(1 if kb.unit == esz else esz)), kb.unit, True)
        return kb

    def check_call(self, kind, node, value, src: Known, need: Known):
        """``__chk_bnd`` comparing byte ranges of the source and the required bounds.

        An nt target may take over the source's terminator slot, so for nt to
        nt bindings the source range is extended by one element.
        """
        src_hi = add(src.hi, IntLit(1)) if src.nt and need.nt else src.hi
        lit = self.site(kind, node, mul(need.lo, need.unit), mul(need.hi, need.unit))
        return Call("__chk_bnd", [lit, value, _bytes(src.lo, src.unit), _bytes(src_hi, src.unit),
                                  _bytes(need.lo, need.unit), _bytes(need.hi, need.unit)])

    def establish(self, orig, value, target, bounds, node, self_name, kind="bounds-decl"):
        """``(t = value, __chk_bnd(...), t)`` when ``target`` carries bounds."""
        if _is_null(orig):
            return value
        src = self.a.known_bounds(orig)
        if src is None or src.null or self.need(target, bounds, Ident("_")) is None:
            return value
        tmp = self.temp(self.a.decayed(orig))
        mapping = {self_name: tmp} if self_name else None
        need = self.need(target, bounds, tmp, mapping)
        chk = self.check_call(kind, node, tmp, src, need)
        return Comma(Comma(Assign("=", tmp, value), chk), tmp)

    # -- expressions ---------------------------------------------------------------------

    def is_checked_access(self, e) -> bool:
        return self.a.is_checked_access(e)

    def expr(self, e, mode: str = "read"):
        if e is None:
            return None
        if isinstance(e, (Index, Unary, Member)) and mode != "addr" and self.is_checked_access(e):
            return self.access(e, mode)
        if isinstance(e, Index):
            return Index(self.expr(e.base), self.expr(e.index))
        if isinstance(e, Member):
            if e.arrow:
                return Member(self.expr(e.base), e.name, True)
            return Member(self.expr(e.base, mode), e.name, False)
        if isinstance(e, Unary):
            if e.op == "&":
                return Unary("&", self.expr(e.operand, "addr"))
            if e.op in ("++", "--"):
                return Unary(e.op, self.expr(e.operand, "modify"))
            return Unary(e.op, self.expr(e.operand))
        if isinstance(e, Postfix):
            return Postfix(e.op, self.expr(e.operand, "modify"))
        if isinstance(e, Assign):
            return self.assign(e)
        if isinstance(e, Binary):
            return Binary(e.op, self.expr(e.left), self.expr(e.right))
        if isinstance(e, Cond):
            return Cond(self.expr(e.test), self.expr(e.then), self.expr(e.orelse))
        if isinstance(e, Comma):
            return Comma(self.expr(e.left), self.expr(e.right))
        if isinstance(e, Cast):
            return Cast(clone(e.type), self.expr(e.expr))
        if isinstance(e, Call):
            return self.call(e)
        if isinstance(e, (SizeofExpr, SizeofType)):
            return strip_spans(e)
        return strip_spans(e)

    def access(self, e, mode, nt_value=None):
        """Guarded access. ``nt_value`` is the (lowered) value of a plain nt store."""
        root, idx = self.a.access_parts(e)
        kb = self.a.known_bounds(root)
        if kb is None or kb.null:
            raise CompileError([])  # sema guarantees bounds for checked accesses
        rt = self.a.decayed(root)
        esz = self.a.elem_size(rt)
        lo, hi = self.a.element_bounds(kb, esz)
        is_index = isinstance(e, Index)
        nt = kb.nt
        writing = mode in ("write", "modify")
        if nt and not writing:
            limit = add(hi, IntLit(1))
        elif nt and nt_value is not None:
            limit = add(hi, IntLit(1))
        else:
            limit = hi
        if nt and nt_value is not None:
            kind = "nt-terminator-write"
        elif is_index:
            kind = "index"
        else:
            kind = "deref-write" if writing else "deref-read"
        # index expression must be lowered before the site so nested ids sort by position
        lowered_idx = self.lower_index(e, idx)
        if isinstance(root, Ident):
            r_use, pre = Ident(root.name), None
        else:
            r_use = self.temp(rt)
            pre = Assign("=", r_use, self.expr(root))
        lit = self.site(kind, e, lo, limit)
        check = Call("__chk_idx", [lit, r_use, lowered_idx, strip_spans(lo), strip_spans(limit)])
        if nt_value is not None:
            ti = self.temp(LONG)
            elem_t = lower_type(rt.pointee)
            store = Assign("=", _element(e, clone(r_use), ti),
                           Cast(elem_t, Call("__chk_nt", [lit, ti, strip_spans(hi), Cast(elem_t, nt_value)])))
            seq = Comma(Assign("=", ti, check), store)
            return Comma(pre, seq) if pre is not None else seq
        target = _element(e, clone(r_use), check)
        if pre is None:
            return target
        # *(t = R, t + chk) keeps the access an lvalue
        addr = Comma(pre, Binary("+", clone(r_use), check))
        if isinstance(e, Member):
            return Member(Unary("*", addr), e.name, False)
        return Unary("*", addr)

    def lower_index(self, e, idx):
        """Lower the index expression, transforming nested accesses in the original operands."""
        if isinstance(e, Index):
            base_parts = self._offsets(e.base)
            parts = base_parts + [e.index]
        elif isinstance(e, Unary):
            parts = self._offsets(e.operand)
        else:
            parts = self._offsets(e.base)
        out = IntLit(0)
        for sign, p in _signed(parts):
            lowered = self.expr(p)
            out = _combine(out, sign, lowered)
        return out

    def _offsets(self, p):
        """Offset operands peeled off a pointer expression (mirrors Analysis.peel)."""
        if isinstance(p, Binary) and p.op in ("+", "-"):
            lt = self.a.env.resolve(self.a.type_of(p.left))
            if isinstance(lt, (Pointer, Array)) and is_pure(p.right):
                return self._offsets(p.left) + [p.right if p.op == "+" else ("-", p.right)]
            rt = self.a.env.resolve(self.a.type_of(p.right))
            if p.op == "+" and isinstance(rt, (Pointer, Array)) and is_pure(p.left):
                return self._offsets(p.right) + [p.left]
        return []

    def assign(self, e):
        target = e.target
        if e.op == "=" and self.is_checked_access(target):
            root, _ = self.a.access_parts(target)
            kb = self.a.known_bounds(root)
            if kb is not None and kb.nt:
                value = self.expr(e.value)
                return self.access(target, "write", nt_value=value)
        mode = "write" if e.op == "=" else "modify"
        lowered_target = self.expr(target, mode)
        value = self.expr(e.value)
        if e.op == "=" and self.a.is_checked(e):
            bounds, self_expr = self._target_bounds(target)
            tt = self.a.type_of(target)
            name = target.name if isinstance(target, Ident) else None
            value = self.establish(e.value, value, tt, bounds, e, name)
        return Assign(e.op, lowered_target, value)

    def _target_bounds(self, target):
        if isinstance(target, Ident):
            sym = self.a.refs.get(id(target))
            if sym is not None:
                return sym.bounds, Ident(target.name)
        if isinstance(target, Member):
            bt = self.a.env.resolve(self.a.type_of(target.base))
            if target.arrow and isinstance(bt, Pointer):
                bt = self.a.env.resolve(bt.pointee)
            tag = getattr(bt, "tag", None)
            f = self.a.env.field(tag, target.name) if tag else None
            if f is not None and f.bounds is not None:
                mapping = {x.name: Member(strip_spans(target.base), x.name, target.arrow)
                           for x in self.a.env.structs.get(tag, [])}
                b = type(f.bounds)(*[substitute(x, mapping) for x in _bexprs(f.bounds)])
                return b, strip_spans(target)
        return None, None

    def call(self, e):
        args = [self.expr(a) for a in e.args]
        sym = self.a.funcs.get(e.func)
        if sym is None or not self.a.is_checked(e):
            return Call(e.func, args)
        f = sym.func
        checks = []
        temps = []
        mapping = {}
        for k, (arg, low) in enumerate(zip(e.args, args)):
            t = self.temp(self.a.decayed(arg))
            temps.append(t)
            if k < len(f.params) and f.params[k].name:
                mapping[f.params[k].name] = t
        for k, p in enumerate(f.params):
            if k >= len(e.args):
                break
            arg = e.args[k]
            pt = self.a.env.resolve(p.type)
            if not isinstance(pt, Pointer):
                continue
            iface = not pt.kind.checked and (p.bounds is not None or p.itype is not None)
            if not pt.kind.checked and not iface:
                continue
            target = p.itype if p.itype is not None else (
                p.type if pt.kind.checked else Pointer(PtrKind.ARRAY, pt.pointee))
            if iface and p.itype is not None and self.a.env.resolve(p.itype).kind is PtrKind.PTR:
                checks.append(Call("__chk_nn", [self.site("interface-boundary", arg), temps[k]]))
            if _is_null(arg):
                continue
            need = self.need(target, p.bounds, temps[k], mapping)
            src = self.a.known_bounds(arg)
            if need is None or src is None or src.null:
                continue
            checks.append(self.check_call("interface-boundary", arg, temps[k], src, need))
        if not checks:
            # no annotated parameters: keep the call as written
            self.temps = [d for d in self.temps if d.name not in {t.name for t in temps}]
            return Call(e.func, args)
        seq = None
        for t, low in zip(temps, args):
            step = Assign("=", t, low)
            seq = step if seq is None else Comma(seq, step)
        for c in checks:
            seq = c if seq is None else Comma(seq, c)
        return Comma(seq, Call(e.func, [clone(t) for t in temps]))


def _bexprs(b):
    return bounds_exprs(b)


def _is_null(e) -> bool:
    if isinstance(e, Cast):
        return _is_null(e.expr)
    return isinstance(e, IntLit) and e.value == 0


def _bytes(x, unit):
    return strip_spans(mul(x, unit))


def _signed(parts):
    for p in parts:
        if isinstance(p, tuple):
            yield -1, p[1]
        else:
            yield 1, p


def _combine(acc, sign, x):
    if isinstance(acc, IntLit) and acc.value == 0:
        return x if sign > 0 else Unary("-", x)
    return Binary("+" if sign > 0 else "-", acc, x)


def _element(e, root, idx):
    if isinstance(e, Member):
        return Member(Index(root, idx), e.name, False)
    return Index(root, idx)


def instrument_unit(unit: SourceUnit, analysis: Analysis | None = None) -> Instrumented:
    """Instrumented legacy C for an accepted unit plus its check sites."""
    u = resolve_conditionals(unit, defined=True)
    a = analysis if analysis is not None else analyze(u)
    if not a.ok:
        raise CompileError(a.errors)
    ins = Instrumenter(u, a)
    lowered = strip_unit(ins.run())
    # a unit without checks needs no runtime support
    code = (PRELUDE if ins.sites else "") + render(lowered, "legacy")
    return Instrumented(code, ins.sites, lowered)
