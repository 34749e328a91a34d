"""Checked-scope rules, bounds validation and expression typing.

``analyze`` walks a unit once, records the type of every expression, the
scope (checked or not) of every node and the symbol each identifier
resolves to. The resulting :class:`Analysis` also answers bounds queries
(``known_bounds``, ``resolve_bounds``) for the instrumenter.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .diagnostics import Diagnostic, error, warning
from .nodes import (
    Array, Assign, Base, Binary, Block, Break, ByteCount, Call, Cast, CharLit, Comma, Cond,
    Conditional, Continue, Count, Directive, DoWhile, Empty, ExprStmt, For, FuncDecl, Ident,
    If, Index, InitList, IntLit, Member, Param, Pointer, Postfix, PtrKind, Range, Return,
    ScopePragma, SizeofExpr, SizeofType, SourceUnit, StrLit, StructDef, StructRef, Typedef,
    Unary, VarDecl, While, clone, strip_spans, walk,
)
from .types import TypeEnv, same_type

CHECKED_MACRO = "USE_CHECKEDC"
INT = Base("int")
UINT = Base("unsigned int")
SIZE_T = Base("unsigned int")
VOID = Base("void")

BUILTIN_FUNCS = {
    "print_int": FuncDecl(VOID, "print_int", [Param(INT, "v")]),
    "__checked_trap": FuncDecl(VOID, "__checked_trap", [Param(INT, "id")]),
}


@dataclass(eq=False)
class Symbol:
    name: str
    kind: str  # var | param | global | func
    type: object
    bounds: object = None
    itype: object = None
    decl: object = None
    uid: int = 0
    func: FuncDecl | None = None
    bounded_by: list = field(default_factory=list)  # symbols whose bounds mention this one
    nt_terminator: int | None = None  # for arrays underlying an nt_array_ptr

    def view_type(self, checked: bool):
        t = self.type
        if checked and self.itype is not None:
            return self.itype
        if checked and isinstance(t, Pointer) and t.kind is PtrKind.PLAIN and self.bounds is not None:
            return Pointer(PtrKind.ARRAY, t.pointee, t.const)
        return t


@dataclass
class Known:
    """Bounds of a pointer value: [lo, hi) in units of ``unit`` bytes, relative to the value."""

    lo: object
    hi: object
    unit: int
    nt: bool = False
    null: bool = False


NULL_KNOWN = Known(IntLit(0), IntLit(0), 1, null=True)


def lit(n: int):
    if n < 0:
        return Unary("-", IntLit(-n))
    return IntLit(n)


def const_value(e):
    """Fold literal arithmetic; None when not a compile-time constant."""
    if isinstance(e, (IntLit, CharLit)):
        return e.value
    if isinstance(e, Unary) and e.op in ("-", "+", "~", "!"):
        v = const_value(e.operand)
        if v is None:
            return None
        return {"-": -v, "+": v, "~": ~v, "!": int(not v)}[e.op]
    if isinstance(e, Binary):
        a, b = const_value(e.left), const_value(e.right)
        if a is None or b is None:
            return None
        try:
            return _fold(e.op, a, b)
        except ZeroDivisionError:
            return None
    if isinstance(e, Cond):
        t = const_value(e.test)
        if t is None:
            return None
        return const_value(e.then if t else e.orelse)
    return None


def _fold(op, a, b):
    if op == "/":
        q = abs(a) // abs(b)
        return q if (a >= 0) == (b >= 0) else -q
    if op == "%":
        return a - b * _fold("/", a, b)
    return {
        "+": lambda: a + b, "-": lambda: a - b, "*": lambda: a * b,
        "<<": lambda: a << b, ">>": lambda: a >> b, "&": lambda: a & b, "|": lambda: a | b,
        "^": lambda: a ^ b, "==": lambda: int(a == b), "!=": lambda: int(a != b),
        "<": lambda: int(a < b), ">": lambda: int(a > b), "<=": lambda: int(a <= b),
        ">=": lambda: int(a >= b), "&&": lambda: int(bool(a and b)), "||": lambda: int(bool(a or b)),
    }[op]()


def add(a, b):
    va, vb = const_value(a), const_value(b)
    if va is not None and vb is not None:
        return lit(va + vb)
    if va == 0:
        return b
    if vb == 0:
        return a
    if isinstance(b, Binary) and b.op == "-" and b.right == a:
        return b.left
    return Binary("+", a, b)


def sub(a, b):
    va, vb = const_value(a), const_value(b)
    if va is not None and vb is not None:
        return lit(va - vb)
    if vb == 0:
        return a
    if a == b:
        return IntLit(0)
    if isinstance(a, Binary) and a.op == "+" and a.left == b:
        return a.right
    return Binary("-", a, b)


def mul(a, k: int):
    va = const_value(a)
    if va is not None:
        return lit(va * k)
    if k == 1:
        return a
    return Binary("*", a, IntLit(k))


def div(a, k: int):
    va = const_value(a)
    if va is not None:
        return lit(_fold("/", va, k))
    if k == 1:
        return a
    return Binary("/", a, IntLit(k))


def is_pure(e) -> bool:
    for n in walk(e):
        if isinstance(n, (Call, Assign, Postfix, Comma)):
            return False
        if isinstance(n, Unary) and n.op in ("++", "--"):
            return False
    return True


def bounds_well_formed(b) -> bool:
    exprs = [b.lo, b.hi] if isinstance(b, Range) else [b.expr]
    return all(is_pure(e) for e in exprs)


def bounds_exprs(b):
    if b is None:
        return []
    return [b.lo, b.hi] if isinstance(b, Range) else [b.expr]


def substitute(e, mapping):
    """Replace identifiers by expressions (fresh copies each time)."""
    if isinstance(e, Ident) and e.name in mapping:
        return strip_spans(mapping[e.name])
    if isinstance(e, list):
        return [substitute(x, mapping) for x in e]
    if not hasattr(e, "__dataclass_fields__"):
        return e
    kwargs = {}
    for name in e.__dataclass_fields__:
        v = getattr(e, name)
        if name == "span":
            kwargs[name] = None
        elif hasattr(v, "__dataclass_fields__") or isinstance(v, list):
            kwargs[name] = substitute(v, mapping)
        else:
            kwargs[name] = v
    return type(e)(**kwargs)


class Analysis:
    """Result of :func:`analyze`."""

    def __init__(self, unit: SourceUnit):
        self.unit = unit
        self.env = TypeEnv()
        self.diagnostics: list[Diagnostic] = []
        self.types: dict[int, object] = {}
        self.checked: dict[int, bool] = {}
        self.refs: dict[int, Symbol] = {}
        self.funcs: dict[str, Symbol] = {}
        self.globals: dict[str, Symbol] = {}
        self.decl_symbols: dict[int, Symbol] = {}
        self.func_of_return: dict[int, FuncDecl] = {}

    @property
    def errors(self) -> list[Diagnostic]:
        return [d for d in self.diagnostics if d.is_error]

    @property
    def ok(self) -> bool:
        return not self.errors

    def type_of(self, e):
        return self.types.get(id(e))

    def is_checked(self, node) -> bool:
        return self.checked.get(id(node), False)

    def const_eval(self, e, names=None):
        """Constant value of ``e``; ``names`` maps identifiers to known constants."""
        if isinstance(e, Ident) and names is not None:
            return names.get(e.name)
        if isinstance(e, (IntLit, CharLit)):
            return e.value
        if isinstance(e, SizeofType):
            try:
                return self.env.sizeof(e.type, self.const_eval)
            except TypeError:
                return None
        if isinstance(e, SizeofExpr):
            t = self.type_of(e.expr)
            if t is None:
                return None
            try:
                return self.env.sizeof(t, self.const_eval)
            except TypeError:
                return None
        if isinstance(e, Unary) and e.op in ("-", "+", "~", "!"):
            v = self.const_eval(e.operand, names)
            if v is None:
                return None
            return {"-": -v, "+": v, "~": ~v, "!": int(not v)}[e.op]
        if isinstance(e, Binary):
            a, b = self.const_eval(e.left, names), self.const_eval(e.right, names)
            if a is not None and b is not None:
                try:
                    return _fold(e.op, a, b)
                except ZeroDivisionError:
                    return None
            return None
        if isinstance(e, Cond):
            t = self.const_eval(e.test, names)
            if t is None:
                return None
            return self.const_eval(e.then if t else e.orelse, names)
        if isinstance(e, Cast):
            return self.const_eval(e.expr, names)
        return None

    def elem_size(self, ptr_type) -> int:
        t = self.env.resolve(ptr_type)
        if isinstance(t, (Pointer, Array)):
            inner = t.pointee if isinstance(t, Pointer) else t.elem
            if self.env.is_void(inner):
                return 1
            try:
                return self.env.sizeof(inner, self.const_eval)
            except TypeError:
                return 1
        return 1

    def decayed(self, e):
        t = self.env.resolve(self.type_of(e))
        if isinstance(t, Array):
            kind = PtrKind.ARRAY if self.is_checked(e) else PtrKind.PLAIN
            return Pointer(kind, t.elem)
        return t

    def is_checked_access(self, e) -> bool:
        """A dereference in checked scope through a checked pointer or an array."""
        if not self.is_checked(e):
            return False
        if isinstance(e, Index):
            base = e.base
        elif isinstance(e, Unary) and e.op == "*":
            base = e.operand
        elif isinstance(e, Member) and e.arrow:
            base = e.base
        else:
            return False
        t = self.decayed(base)
        return isinstance(t, Pointer) and t.kind.checked

    # -- bounds queries -----------------------------------------------------------

    def declared_known(self, bounds, self_expr, ptr_type, nt: bool):
        esz = self.elem_size(ptr_type)
        if bounds is None:
            if nt:
                return Known(IntLit(0), IntLit(0), esz, nt=True)
            return None
        if isinstance(bounds, Count):
            return Known(IntLit(0), strip_spans(bounds.expr), esz, nt)
        if isinstance(bounds, ByteCount):
            return Known(IntLit(0), strip_spans(bounds.expr), 1, nt)
        lo = strip_spans(bounds.lo)
        hi = strip_spans(bounds.hi)
        return Known(sub(lo, self_expr), sub(hi, self_expr), esz, nt)

    def known_bounds(self, e):
        """Bounds of the pointer value of ``e`` in checked scope, or None."""
        t = self.env.resolve(self.type_of(e))
        if isinstance(e, IntLit) and e.value == 0:
            return NULL_KNOWN
        if isinstance(e, Cast) and const_value(e.expr) == 0:
            return NULL_KNOWN
        if isinstance(t, Array):
            n = self.const_eval(t.size) if t.size is not None else None
            if n is None:
                return None
            return Known(IntLit(0), IntLit(n), self.elem_size(t))
        if not isinstance(t, Pointer):
            return None
        esz = self.elem_size(t)
        if isinstance(e, Ident):
            sym = self.refs.get(id(e))
            if sym is None:
                return None
            vt = self.env.resolve(sym.view_type(True))
            if isinstance(vt, Array):
                return self.known_bounds_array(vt)
            if isinstance(vt, Pointer) and vt.kind is PtrKind.PTR:
                return Known(IntLit(0), IntLit(1), esz)
            if isinstance(vt, Pointer) and vt.kind in (PtrKind.ARRAY, PtrKind.NT_ARRAY):
                return self.declared_known(sym.bounds, Ident(e.name), vt, vt.kind is PtrKind.NT_ARRAY)
            return None
        if isinstance(e, Binary) and e.op in ("+", "-"):
            lt = self.env.resolve(self.type_of(e.left))
            if isinstance(lt, (Pointer, Array)) and self.env.is_integer(self.type_of(e.right)):
                p, k = e.left, e.right
            elif e.op == "+" and isinstance(self.env.resolve(self.type_of(e.right)), (Pointer, Array)):
                p, k = e.right, e.left
            else:
                return None
            if not is_pure(k):
                return None
            kb = self.known_bounds(p)
            if kb is None or kb.null:
                return None
            k = strip_spans(k)
            if e.op == "-":
                k = Unary("-", k) if const_value(k) is None else lit(-const_value(k))
            return self.shift(kb, k, esz)
        if isinstance(e, Unary) and e.op == "&":
            inner = e.operand
            if isinstance(inner, Index):
                base = self.known_bounds(inner.base)
                if base is None or not is_pure(inner.index):
                    return None
                return self.shift(base, strip_spans(inner.index), esz)
            if isinstance(inner, Unary) and inner.op == "*":
                return self.known_bounds(inner.operand)
            return Known(IntLit(0), IntLit(1), esz)
        if isinstance(e, Member):
            base_t = self.env.resolve(self.type_of(e.base))
            if e.arrow:
                base_t = self.env.resolve(base_t.pointee) if isinstance(base_t, Pointer) else None
            if not isinstance(base_t, StructRef):
                return None
            fdecl = self.env.field(base_t.tag, e.name)
            if fdecl is None:
                return None
            ft = self.env.resolve(fdecl.itype if fdecl.itype is not None else fdecl.type)
            if isinstance(ft, Pointer) and ft.kind is PtrKind.PTR:
                return Known(IntLit(0), IntLit(1), esz)
            kind = ft.kind if isinstance(ft, Pointer) else None
            if kind is PtrKind.PLAIN and fdecl.bounds is not None:
                kind = PtrKind.ARRAY
            if kind in (PtrKind.ARRAY, PtrKind.NT_ARRAY):
                if not is_pure(e.base):
                    return None
                mapping = {f.name: Member(strip_spans(e.base), f.name, e.arrow)
                           for f in self.env.structs.get(base_t.tag, [])}
                b = fdecl.bounds
                if b is not None:
                    b = type(b)(*[substitute(x, mapping) for x in bounds_exprs(b)])
                return self.declared_known(b, strip_spans(e), Pointer(kind, ft.pointee),
                                           kind is PtrKind.NT_ARRAY)
            return None
        if isinstance(e, StrLit):
            return Known(IntLit(0), IntLit(len(string_bytes(e.text))), 1, nt=True)
        if isinstance(e, Call) and e.func in self.funcs:
            f = self.funcs[e.func].func
            if f.ret_bounds is not None and all(is_pure(x) for x in e.args):
                rt = self.env.resolve(f.ret_itype if f.ret_itype is not None else f.ret)
                if isinstance(rt, Pointer) and rt.kind in (PtrKind.ARRAY, PtrKind.NT_ARRAY) \
                        and not isinstance(f.ret_bounds, Range):
                    mapping = {p.name: strip_spans(x) for p, x in zip(f.params, e.args) if p.name}
                    b = type(f.ret_bounds)(*[substitute(x, mapping) for x in bounds_exprs(f.ret_bounds)])
                    return self.declared_known(b, None, rt, rt.kind is PtrKind.NT_ARRAY)
        if t.kind is PtrKind.PTR:
            return Known(IntLit(0), IntLit(1), esz)
        if t.kind is PtrKind.NT_ARRAY:
            return Known(IntLit(0), IntLit(0), esz, nt=True)
        return None

    def known_bounds_array(self, t):
        n = self.const_eval(t.size) if t.size is not None else None
        if n is None:
            return None
        return Known(IntLit(0), IntLit(n), self.elem_size(t))

    def shift(self, kb: Known, k, esz: int) -> Known:
        """Bounds relative to ``value + k`` (k in elements of size esz)."""
        if kb.unit == esz:
            delta = k
        elif kb.unit == 1:
            delta = mul(k, esz)
        else:
            return Known(sub(mul(kb.lo, kb.unit), mul(k, esz)), sub(mul(kb.hi, kb.unit), mul(k, esz)), 1, kb.nt)
        return Known(sub(kb.lo, delta), sub(kb.hi, delta), kb.unit, kb.nt)

    def access_parts(self, e):
        """Split an access (``b[i]``, ``*p``, ``p->f``) into (root, index expression)."""
        if isinstance(e, Index):
            ptr, idx = e.base, e.index
        elif isinstance(e, Unary) and e.op == "*":
            ptr, idx = e.operand, IntLit(0)
        elif isinstance(e, Member) and e.arrow:
            ptr, idx = e.base, IntLit(0)
        else:
            raise ValueError("not an access")
        root, off = self.peel(ptr)
        return root, add(off, idx)

    def peel(self, p):
        if isinstance(p, Binary) and p.op in ("+", "-"):
            lt = self.env.resolve(self.type_of(p.left))
            if isinstance(lt, (Pointer, Array)) and is_pure(p.right):
                root, off = self.peel(p.left)
                k = p.right if p.op == "+" else Unary("-", p.right)
                return root, add(off, k)
            rt = self.env.resolve(self.type_of(p.right))
            if p.op == "+" and isinstance(rt, (Pointer, Array)) and is_pure(p.left):
                root, off = self.peel(p.right)
                return root, add(off, p.left)
        return p, IntLit(0)

    def element_bounds(self, kb: Known, esz: int):
        """(lo, hi) of ``kb`` in elements of size esz."""
        if kb.unit == esz:
            return kb.lo, kb.hi
        if kb.unit == 1:
            return div(kb.lo, esz), div(kb.hi, esz)
        if kb.unit % esz == 0:
            k = kb.unit // esz
            return mul(kb.lo, k), mul(kb.hi, k)
        return div(mul(kb.lo, kb.unit), esz), div(mul(kb.hi, kb.unit), esz)

    def resolve_bounds(self, access):
        """Normalized ``Range(lo_ptr, hi_ptr)`` guarding an access expression."""
        root, _ = self.access_parts(access)
        kb = self.known_bounds(root)
        if kb is None or kb.null:
            return None
        lo, hi = self.element_bounds(kb, self.elem_size(self.decayed(root)))
        r = strip_spans(root)
        return Range(add(r, lo) if const_value(lo) != 0 else r, add(strip_spans(root), hi))


def string_bytes(text: str) -> bytes:
    body = text[1:-1]
    out = bytearray()
    i = 0
    from .parser import char_value
    while i < len(body):
        if body[i] == "\\":
            j = i + 2
            if body[i + 1] == "x":
                while j < len(body) and body[j] in "0123456789abcdefABCDEF":
                    j += 1
            elif body[i + 1].isdigit():
                while j < len(body) and j < i + 4 and body[j].isdigit():
                    j += 1
            out.append(char_value("'" + body[i:j] + "'"))
            i = j
        else:
            out.extend(body[i].encode("utf-8"))
            i += 1
    return bytes(out)


# -- the analyzer -------------------------------------------------------------


class Analyzer:
    def __init__(self, unit: SourceUnit):
        self.a = Analysis(unit)
        self.env = self.a.env
        self.scopes: list[dict] = [{}]
        self.in_checked = False
        self.file_checked = False
        self.func: FuncDecl | None = None
        self.uid = 0
        self.deferred_nt: list = []
        self.sizeof_depth = 0
        self.reported: set = set()
        self.discarded = None

    # -- helpers ----------------------------------------------------------------

    def diag(self, code, message, node=None, severity="error"):
        span = getattr(node, "span", None)
        key = (code, span, message)
        if key in self.reported:
            return
        self.reported.add(key)
        d = error(code, message, span) if severity == "error" else warning(code, message, span)
        self.a.diagnostics.append(d)

    def lookup(self, name):
        for scope in reversed(self.scopes):
            if name in scope:
                return scope[name]
        return None

    def new_symbol(self, name, kind, t, node, bounds=None, itype=None):
        self.uid += 1
        return Symbol(name, kind, t, bounds, itype, node, self.uid)

    def declare(self, sym: Symbol, node):
        scope = self.scopes[-1]
        prev = scope.get(sym.name)
        if prev is not None and not (prev.kind == "func" and sym.kind == "func") \
                and not ("extern" in getattr(prev.decl, "storage", ()) or
                         "extern" in getattr(sym.decl, "storage", ())):
            self.diag("E-REDECL", f"redeclaration of '{sym.name}'", node)
        scope[sym.name] = sym
        self.a.decl_symbols[id(node)] = sym
        return sym

    def resolve(self, t):
        return self.env.resolve(t)

    def contains_raw(self, t) -> bool:
        t = self.resolve(t)
        if isinstance(t, Pointer):
            return t.kind is PtrKind.PLAIN or self.contains_raw(t.pointee)
        if isinstance(t, Array):
            return self.contains_raw(t.elem)
        return False

    def is_null_const(self, e) -> bool:
        if isinstance(e, Cast):
            return self.is_null_const(e.expr)
        return isinstance(e, IntLit) and e.value == 0

    # -- items --------------------------------------------------------------------

    def run(self) -> Analysis:
        self.items(self.a.unit.items)
        self.flush_deferred()
        return self.a

    def items(self, items):
        for item in items:
            self.item(item)

    def branches(self, cond: Conditional, visit):
        saved = self.in_checked
        before = dict(self.scopes[-1])
        branches = [(cond.then, cond.name == CHECKED_MACRO and cond.negated)]
        if cond.orelse is not None:
            branches.append((cond.orelse, cond.name == CHECKED_MACRO and not cond.negated))
        merged = {}
        for body, legacy_only in branches:
            self.scopes[-1] = dict(before)
            if legacy_only:
                self.in_checked = False
            for x in body:
                visit(x)
            self.in_checked = saved
            merged.update({k: v for k, v in self.scopes[-1].items() if before.get(k) is not v})
        self.scopes[-1] = dict(before)
        self.scopes[-1].update(merged)

    def item(self, item):
        self.a.checked[id(item)] = self.file_checked
        self.in_checked = self.file_checked
        if isinstance(item, Directive):
            return
        if isinstance(item, ScopePragma):
            self.file_checked = item.on
            return
        if isinstance(item, Conditional):
            self.branches(item, self.item)
            return
        if isinstance(item, StructDef):
            self.struct_def(item)
            return
        if isinstance(item, Typedef):
            if item.struct is not None:
                self.struct_def(item.struct)
            self.env.typedefs[item.name] = item.type
            self.env._layouts.clear()
            return
        if isinstance(item, VarDecl):
            self.var_decl(item, "global")
            return
        if isinstance(item, FuncDecl):
            self.function(item)
            return

    def struct_def(self, sd: StructDef):
        self.env.structs[sd.tag] = sd.fields
        self.env._layouts.clear()
        names = {f.name for f in sd.fields}
        for f in sd.fields:
            self.check_annotation(f, f.type, f.bounds, f.itype, checked=self.in_checked,
                                  visible=lambda n: n in names, is_field=True)
            if self.in_checked and self.contains_raw(f.type) and f.itype is None and f.bounds is None:
                self.diag("E-SCOPE-RAWPTR", f"unchecked pointer field '{f.name}' in checked scope", f)

    def check_annotation(self, node, t, bounds, itype, checked, visible, is_field=False):
        rt = self.resolve(t)
        if bounds is not None:
            if not bounds_well_formed(bounds):
                self.diag("E-BOUNDS-ILLFORMED",
                          "bounds expressions may not contain assignments, calls, increments or commas", node)
            if isinstance(rt, Pointer) and rt.kind is PtrKind.PTR:
                self.diag("E-BOUNDS-PTR", "_Ptr declarations carry no bounds", node)
            if isinstance(bounds, ByteCount) and isinstance(rt, Pointer):
                nbytes = self.a.const_eval(bounds.expr)
                esz = self.a.elem_size(rt)
                if nbytes is not None and esz > 1 and nbytes % esz:
                    self.diag("E-BOUNDS-BYTES", f"byte_count({nbytes}) is not a multiple of the "
                              f"element size {esz}; checks use byte granularity", node, "warning")
            for e in bounds_exprs(bounds):
                for n in walk(e):
                    if isinstance(n, Ident) and not visible(n.name):
                        self.diag("E-BOUNDS-UNRESOLVED",
                                  f"bounds refer to '{n.name}', which is not visible here", node)
        if itype is not None and isinstance(rt, Pointer) and rt.kind.checked:
            self.diag("E-ITYPE-CHECKED", "itype annotations apply only to unchecked declarations", node)
        if itype is not None and isinstance(rt, Pointer):
            it = self.resolve(itype)
            if not isinstance(it, Pointer) or not it.kind.checked:
                self.diag("E-TYPE", "itype must name a checked pointer type", node)

    def type_bounds_exprs(self, bounds):
        saved = self.in_checked
        self.in_checked = False
        self.sizeof_depth += 1
        for e in bounds_exprs(bounds):
            for n in walk(e):
                if isinstance(n, Ident) and self.lookup(n.name) is None:
                    self.reported.add(("E-UNDECLARED", n.span, f"use of undeclared identifier '{n.name}'"))
            self.expr(e)
        self.sizeof_depth -= 1
        self.in_checked = saved

    def function(self, f: FuncDecl):
        prev = self.lookup(f.name) if len(self.scopes) == 1 else None
        sym = self.new_symbol(f.name, "func", f.ret, f)
        sym.func = f
        if prev is not None and prev.kind == "func" and prev.func.body is not None and f.body is None:
            sym.func = prev.func
        if prev is not None and prev.kind == "func" and len(prev.func.params) != len(f.params):
            self.diag("E-REDECL", f"conflicting declaration of '{f.name}'", f)
        self.declare(sym, f)
        self.a.funcs[f.name] = sym
        checked = self.in_checked
        names = {p.name for p in f.params if p.name}
        glob = self.scopes[0]
        visible = lambda n: n in names or n in glob
        self.scopes.append({})
        for p in f.params:
            self.a.checked[id(p)] = checked
            psym = self.new_symbol(p.name or "", "param", p.type, p, p.bounds, p.itype)
            if p.name:
                self.declare(psym, p)
            self.check_annotation(p, p.type, p.bounds, p.itype, checked, visible)
            if checked and self.contains_raw(p.type) and p.itype is None and p.bounds is None:
                self.diag("E-SCOPE-RAWPTR",
                          f"parameter '{p.name or '?'}' has an unchecked pointer type in checked scope", p)
        self.link_bounds_deps([(p.bounds, self.scopes[-1].get(p.name)) for p in f.params if p.name])
        for p in f.params:
            self.type_bounds_exprs(p.bounds)
        self.type_bounds_exprs(f.ret_bounds)
        if checked and self.contains_raw(f.ret) and f.ret_itype is None and f.ret_bounds is None:
            self.diag("E-SCOPE-RAWPTR", f"function '{f.name}' returns an unchecked pointer in checked scope", f)
        if f.ret_itype is not None or f.ret_bounds is not None:
            self.check_annotation(f, f.ret, f.ret_bounds, f.ret_itype, checked, visible)
        if f.body is not None:
            self.func = f
            self.stmt(f.body)
            self.func = None
        self.scopes.pop()
        self.in_checked = checked

    def link_bounds_deps(self, pairs):
        for bounds, sym in pairs:
            if bounds is None or sym is None:
                continue
            for e in bounds_exprs(bounds):
                for n in walk(e):
                    if isinstance(n, Ident):
                        dep = self.lookup(n.name)
                        if dep is not None and dep is not sym:
                            dep.bounded_by.append(sym)

    def var_decl(self, d: VarDecl, kind: str):
        self.a.checked[id(d)] = self.in_checked
        t = self.resolve(d.type)
        if self.in_checked and self.contains_raw(d.type) and d.itype is None:
            self.diag("E-SCOPE-RAWPTR", f"'{d.name}' has an unchecked pointer type in checked scope", d)
        if isinstance(t, Array) and t.size is not None:
            self.expr(t.size)
            if self.a.const_eval(t.size) is None:
                self.diag("E-TYPE", "array size must be a constant", d)
        elif isinstance(t, Array) and t.size is None and isinstance(d.init, InitList):
            d_size = len(d.init.items)
            d.type = Array(t.elem, IntLit(d_size))
        elif isinstance(t, Array) and t.size is None and isinstance(d.init, StrLit):
            d.type = Array(t.elem, IntLit(len(string_bytes(d.init.text)) + 1))
        sym = self.new_symbol(d.name, kind, d.type, d, d.bounds, d.itype)
        visible = lambda n: self.lookup(n) is not None or n == d.name
        self.declare(sym, d)
        self.check_annotation(d, d.type, d.bounds, d.itype, self.in_checked, visible)
        self.link_bounds_deps([(d.bounds, sym)])
        self.type_bounds_exprs(d.bounds)
        if d.init is not None:
            if isinstance(d.init, InitList):
                self.init_list(d.init)
                if self.in_checked and isinstance(t, StructRef):
                    self.check_struct_init(t, d.init)
            else:
                vt = self.expr(d.init)
                target = sym.view_type(self.in_checked)
                self.check_assignable(target, d.init, vt, d)
                if self.in_checked:
                    self.establishment(d.init, target, d.bounds, Ident(d.name), d, static=(kind == "global"))
                self.note_nt_link(target, d.bounds, d.init)

    def check_struct_init(self, t: StructRef, il: InitList):
        # bounded fields would need establishment against sibling initializers; only null is allowed
        for f, x in zip(self.env.structs.get(t.tag, []), il.items):
            ft = self.resolve(f.type)
            bounded = f.bounds is not None or (isinstance(ft, Pointer) and ft.kind.checked)
            if bounded and not self.is_null_const(x):
                self.diag("E-BOUNDS-UNRESOLVED",
                          f"initializer of field '{f.name}' cannot be checked against its bounds; "
                          "assign the field instead", x)

    def init_list(self, il: InitList):
        self.a.checked[id(il)] = self.in_checked
        for x in il.items:
            if isinstance(x, InitList):
                self.init_list(x)
            else:
                self.expr(x)

    def note_nt_link(self, target, bounds, value):
        t = self.resolve(target)
        if not (isinstance(t, Pointer) and t.kind is PtrKind.NT_ARRAY):
            return
        arr = value
        if isinstance(arr, Unary) and arr.op == "&" and isinstance(arr.operand, Index) \
                and const_value(arr.operand.index) == 0:
            arr = arr.operand.base
        if not isinstance(arr, Ident):
            return
        sym = self.a.refs.get(id(arr))
        if sym is None or not isinstance(self.resolve(sym.type), Array):
            return
        term = 0
        if isinstance(bounds, Count):
            term = self.a.const_eval(bounds.expr)
        elif bounds is not None:
            term = None
        if term is None:
            n = self.a.const_eval(self.resolve(sym.type).size)
            term = None if n is None else n - 1
        sym.nt_terminator = term

    # -- establishment (binding a value to declared bounds) -------------------------

    def need_known(self, target, bounds, self_expr, iface=False):
        t = self.resolve(target)
        if not isinstance(t, Pointer) or not t.kind.checked:
            return None
        esz = self.a.elem_size(t)
        nt = t.kind is PtrKind.NT_ARRAY
        if t.kind is PtrKind.PTR:
            return Known(IntLit(0), IntLit(1), esz)
        if bounds is None and not nt:
            return None
        kb = self.a.declared_known(bounds, self_expr, t, nt)
        if nt:
            extra = 1 if kb.unit == esz else esz
            kb = Known(kb.lo, add(kb.hi, IntLit(extra)), kb.unit, nt)
        return kb

    def establishment(self, value, target, bounds, self_expr, node, static=False, iface_ptr=False):
        need = self.need_known(target, bounds, self_expr)
        if need is None:
            return
        if self.is_null_const(value):
            if iface_ptr:
                self.diag("E-IFACE-NULL", "null passed where the interface requires a non-null pointer",
                          node, severity="warning")
            return
        src = self.a.known_bounds(value)
        if src is None:
            vt = self.resolve(self.a.type_of(value))
            if isinstance(vt, Pointer) and vt.kind is PtrKind.ARRAY:
                self.diag("E-BOUNDS-MISSING", "source pointer has no bounds", value)
            else:
                self.diag("E-BOUNDS-UNRESOLVED", "cannot determine the bounds of this expression", value)
            return
        if static:
            src_hi = add(src.hi, IntLit(1)) if src.nt and need.nt else src.hi
            checks = [(mul(src.lo, src.unit), mul(need.lo, need.unit)),
                      (mul(need.hi, need.unit), mul(src_hi, src.unit))]
            vals = [(self.a.const_eval(a), self.a.const_eval(b)) for a, b in checks]
            if any(a is None or b is None for a, b in vals):
                self.diag("E-BOUNDS-UNRESOLVED", "static initializer bounds must be constant", node)
            elif any(a > b for a, b in vals):
                self.diag("E-BOUNDS-STATIC", "initializer does not satisfy the declared bounds", node)

    # -- statements --------------------------------------------------------------

    def stmt(self, s):
        self.a.checked[id(s)] = self.in_checked
        if isinstance(s, VarDecl):
            self.var_decl(s, "var")
        elif isinstance(s, Block):
            saved = self.in_checked
            if s.scope is not None:
                self.in_checked = s.scope == "checked"
            self.scopes.append({})
            for x in s.items:
                self.stmt(x)
            self.scopes.pop()
            self.in_checked = saved
        elif isinstance(s, Conditional):
            self.branches(s, self.stmt)
        elif isinstance(s, Directive):
            pass
        elif isinstance(s, ExprStmt):
            self.discarded = id(s.expr)
            self.expr(s.expr)
        elif isinstance(s, If):
            self.expr(s.test)
            self.stmt(s.then)
            if s.orelse is not None:
                self.stmt(s.orelse)
        elif isinstance(s, While):
            self.expr(s.test)
            self.stmt(s.body)
        elif isinstance(s, DoWhile):
            self.stmt(s.body)
            self.expr(s.test)
        elif isinstance(s, For):
            self.scopes.append({})
            if isinstance(s.init, VarDecl):
                self.var_decl(s.init, "var")
            elif s.init is not None:
                self.expr(s.init)
            if s.test is not None:
                self.expr(s.test)
            if s.step is not None:
                self.expr(s.step)
            self.stmt(s.body)
            self.scopes.pop()
        elif isinstance(s, Return):
            self.a.func_of_return[id(s)] = self.func
            if s.value is not None:
                vt = self.expr(s.value)
                f = self.func
                if f is not None:
                    ret = f.ret_itype if (self.in_checked and f.ret_itype is not None) else f.ret
                    self.check_assignable(ret, s.value, vt, s)
                    if self.in_checked:
                        self.establishment(s.value, ret, f.ret_bounds, None, s)
        elif isinstance(s, (Break, Continue, Empty)):
            pass
        else:
            self.diag("E-SYNTAX", f"unsupported statement {type(s).__name__}", s)

    # -- expressions ---------------------------------------------------------------

    def record(self, e, t):
        self.a.types[id(e)] = t
        self.a.checked[id(e)] = self.in_checked
        return t

    def decay(self, t, checked=None):
        t = self.resolve(t)
        if isinstance(t, Array):
            checked = self.in_checked if checked is None else checked
            return Pointer(PtrKind.ARRAY if checked else PtrKind.PLAIN, t.elem)
        return t

    def flag_raw(self, e, t):
        if self.in_checked and self.sizeof_depth == 0:
            rt = self.resolve(t)
            if isinstance(rt, Pointer) and rt.kind is PtrKind.PLAIN:
                self.diag("E-SCOPE-RAWPTR", "unchecked pointer used in checked scope", e)

    def arith(self, a, b):
        wa, sa = self.env.int_props(a)
        wb, sb = self.env.int_props(b)
        w = max(wa, wb, 4)
        if w == 8:
            signed = not ((wa == 8 and not sa) or (wb == 8 and not sb))
            return Base("long long" if signed else "unsigned long long")
        if (wa == 4 and not sa) or (wb == 4 and not sb):
            return UINT
        return INT

    def expr(self, e):
        t = self._expr(e)
        return self.record(e, t)

    def _expr(self, e):
        if isinstance(e, IntLit):
            text = (e.text or "").lower()
            if "u" in text or 0x7FFFFFFF < e.value <= 0xFFFFFFFF:
                return UINT
            if e.value > 0xFFFFFFFF:
                return Base("long long")
            return INT
        if isinstance(e, CharLit):
            return INT
        if isinstance(e, StrLit):
            n = len(string_bytes(e.text)) + 1
            return Array(Base("char"), IntLit(n))
        if isinstance(e, Ident):
            sym = self.lookup(e.name)
            if sym is None:
                self.diag("E-UNDECLARED", f"use of undeclared identifier '{e.name}'", e)
                return INT
            if sym.kind == "func":
                self.diag("E-TYPE", "function designators are outside the subset", e)
                return INT
            self.a.refs[id(e)] = sym
            t = sym.view_type(self.in_checked)
            self.flag_raw(e, t)
            return t
        if isinstance(e, SizeofType):
            return SIZE_T
        if isinstance(e, SizeofExpr):
            self.sizeof_depth += 1
            self.expr(e.expr)
            self.sizeof_depth -= 1
            return SIZE_T
        if isinstance(e, Cast):
            inner = self.decay(self.expr(e.expr))
            target = self.resolve(e.type)
            if self.in_checked and self.sizeof_depth == 0 and isinstance(target, Pointer):
                if target.kind is PtrKind.PLAIN:
                    self.diag("E-SCOPE-RAWPTR", "cast to an unchecked pointer in checked scope", e)
                elif not self.is_null_const(e.expr) and not (
                        isinstance(inner, Pointer) and inner.kind.checked
                        and same_type(self.env, inner, target)):
                    self.diag("E-CAST-CHECKED", "casts to checked pointer types need dynamic bounds casts, "
                              "which are not supported", e)
            return e.type
        if isinstance(e, Unary):
            return self.unary(e)
        if isinstance(e, Postfix):
            t = self.decay(self.expr(e.operand))
            self.check_lvalue(e.operand)
            self.check_modify(e.operand, e)
            if isinstance(t, Pointer) and t.kind is PtrKind.PTR:
                self.diag("E-PTR-ARITH", "arithmetic on a _Ptr value", e)
            return t
        if isinstance(e, Binary):
            return self.binary(e)
        if isinstance(e, Assign):
            return self.assign(e)
        if isinstance(e, Cond):
            self.expr(e.test)
            a = self.decay(self.expr(e.then))
            b = self.decay(self.expr(e.orelse))
            if isinstance(a, Pointer):
                return a
            if isinstance(b, Pointer):
                return b
            return self.arith(a, b)
        if isinstance(e, Comma):
            self.expr(e.left)
            return self.decay(self.expr(e.right))
        if isinstance(e, Call):
            return self.call(e)
        if isinstance(e, Index):
            return self.index(e)
        if isinstance(e, Member):
            return self.member(e)
        self.diag("E-SYNTAX", f"unsupported expression {type(e).__name__}", e)
        return INT

    def unary(self, e):
        op = e.op
        if op == "&":
            t = self.expr(e.operand)
            self.check_lvalue(e.operand)
            if self.in_checked:
                inner = e.operand
                if isinstance(inner, Index) or (isinstance(inner, Unary) and inner.op == "*"):
                    base_t = self.a.decayed(inner.base if isinstance(inner, Index) else inner.operand)
                    if isinstance(base_t, Pointer) and base_t.kind is PtrKind.PTR:
                        return Pointer(PtrKind.PTR, t)
                    return Pointer(PtrKind.ARRAY, t)
                return Pointer(PtrKind.PTR, t)
            return Pointer(PtrKind.PLAIN, t)
        if op == "*":
            t = self.decay(self.expr(e.operand))
            if not isinstance(t, Pointer):
                self.diag("E-TYPE", "dereference of a non-pointer", e)
                return INT
            if self.env.is_void(t.pointee) and self.sizeof_depth == 0:
                self.diag("E-TYPE", "dereference of a void pointer", e)
            self.check_access(e, t)
            res = t.pointee
            self.flag_raw(e, res)
            return res
        if op in ("++", "--"):
            t = self.decay(self.expr(e.operand))
            self.check_lvalue(e.operand)
            self.check_modify(e.operand, e)
            if isinstance(t, Pointer) and t.kind is PtrKind.PTR:
                self.diag("E-PTR-ARITH", "arithmetic on a _Ptr value", e)
            return t
        t = self.decay(self.expr(e.operand))
        if op == "!":
            return INT
        if isinstance(t, Pointer):
            self.diag("E-TYPE", f"invalid operand to unary '{op}'", e)
            return INT
        return self.arith(t, INT)

    def binary(self, e):
        lt = self.decay(self.expr(e.left))
        rt = self.decay(self.expr(e.right))
        op = e.op
        lp, rp = isinstance(lt, Pointer), isinstance(rt, Pointer)
        if op in ("+", "-") and (lp or rp):
            for t in (lt, rt):
                if isinstance(t, Pointer) and t.kind is PtrKind.PTR:
                    self.diag("E-PTR-ARITH", "arithmetic on a _Ptr value", e)
            if lp and rp:
                if op == "+":
                    self.diag("E-TYPE", "cannot add two pointers", e)
                return INT
            if rp and op == "-":
                self.diag("E-TYPE", "cannot subtract a pointer from an integer", e)
            return lt if lp else rt
        if op in ("==", "!=", "<", ">", "<=", ">=", "&&", "||"):
            return INT
        if lp or rp:
            self.diag("E-TYPE", f"invalid pointer operand to '{op}'", e)
            return INT
        if op in ("<<", ">>"):
            return self.arith(lt, INT)
        return self.arith(lt, rt)

    def check_lvalue(self, e):
        if not isinstance(e, (Ident, Index, Member, Unary)) or (isinstance(e, Unary) and e.op != "*"):
            if self.sizeof_depth == 0:
                self.diag("E-TYPE", "expression is not assignable", e)

    def check_modify(self, target, node):
        """Checked-scope writes must not invalidate declared bounds."""
        if not self.in_checked or self.sizeof_depth:
            return
        if isinstance(target, Ident):
            sym = self.a.refs.get(id(target))
            if sym is not None and sym.bounded_by:
                names = ", ".join(sorted({s.name for s in sym.bounded_by}))
                self.diag("E-BOUNDS-MODIFIED",
                          f"'{sym.name}' appears in the declared bounds of {names}", node)
        elif isinstance(target, Member):
            bt = self.resolve(self.a.type_of(target.base))
            if target.arrow and isinstance(bt, Pointer):
                bt = self.resolve(bt.pointee)
            if isinstance(bt, StructRef):
                for f in self.env.structs.get(bt.tag, []):
                    if f.name != target.name and any(
                            isinstance(n, Ident) and n.name == target.name
                            for e in bounds_exprs(f.bounds) for n in walk(e)):
                        self.diag("E-BOUNDS-MODIFIED",
                                  f"field '{target.name}' appears in the declared bounds of '{f.name}'", node)

    def assign(self, e):
        tt = self.expr(e.target)
        self.check_lvalue(e.target)
        vt = self.expr(e.value)
        rt = self.resolve(tt)
        if isinstance(rt, Array):
            self.diag("E-TYPE", "cannot assign to an array", e)
        self.check_modify(e.target, e)
        if e.op == "=":
            self.check_assignable(tt, e.value, vt, e)
            if self.in_checked:
                bounds, self_expr = self.target_bounds(e.target)
                self.establishment(e.value, tt, bounds, self_expr, e)
            self.note_nt_link(tt, self.target_bounds(e.target)[0], e.value)
            self.check_nt_write(e)
        else:
            if isinstance(rt, Pointer):
                if e.op not in ("+=", "-="):
                    self.diag("E-TYPE", f"invalid pointer operand to '{e.op}'", e)
                if rt.kind is PtrKind.PTR:
                    self.diag("E-PTR-ARITH", "arithmetic on a _Ptr value", e)
                elif rt.kind.checked and self.in_checked and self.target_bounds(e.target)[0] is not None:
                    self.diag("E-BOUNDS-MODIFIED", "pointer arithmetic assignment on a bounded pointer; "
                              "declare bounds(lo, hi) to walk a buffer", e)
        return tt

    def target_bounds(self, target):
        if isinstance(target, Ident):
            sym = self.a.refs.get(id(target))
            if sym is not None:
                return sym.bounds, Ident(target.name)
        if isinstance(target, Member):
            bt = self.resolve(self.a.type_of(target.base))
            if target.arrow and isinstance(bt, Pointer):
                bt = self.resolve(bt.pointee)
            if isinstance(bt, StructRef):
                f = self.env.field(bt.tag, target.name)
                if f is not None and f.bounds is not None:
                    mapping = {x.name: Member(strip_spans(target.base), x.name, target.arrow)
                               for x in self.env.structs.get(bt.tag, [])}
                    b = type(f.bounds)(*[substitute(x, mapping) for x in bounds_exprs(f.bounds)])
                    return b, strip_spans(target)
        return None, None

    def check_assignable(self, target, value, vt, node):
        tt = self.resolve(target)
        vt = self.decay(vt)
        if isinstance(tt, Pointer):
            if self.is_null_const(value):
                return
            if not isinstance(vt, Pointer):
                if self.env.is_integer(vt) and not self.in_checked:
                    return
                self.diag("E-TYPE", "incompatible integer to pointer conversion", node)
                return
            if self.in_checked and not tt.kind.checked:
                self.diag("E-SCOPE-RAWPTR", "conversion to an unchecked pointer in checked scope", node)
                return
            if self.in_checked and tt.kind.checked and not vt.kind.checked:
                self.diag("E-SCOPE-RAWPTR", "unchecked pointer used in checked scope", node)
                return
            pt, pv = self.resolve(tt.pointee), self.resolve(vt.pointee)
            if not (self.env.is_void(pt) or self.env.is_void(pv) or same_type(self.env, pt, pv)):
                if not (isinstance(pv, Array) and same_type(self.env, pt, pv.elem)):
                    if self.in_checked or tt.kind.checked:
                        self.diag("E-TYPE", "incompatible pointer types", node)
            if tt.kind is PtrKind.NT_ARRAY and vt.kind is PtrKind.ARRAY and self.in_checked:
                src_is_array = isinstance(self.resolve(self.a.type_of(value)), Array)
                if not src_is_array:
                    self.diag("E-TYPE", "array_ptr cannot be converted to nt_array_ptr", node)
        elif isinstance(tt, (Base, StructRef)) and isinstance(vt, Pointer) and not self.env.is_void(tt):
            if self.env.is_integer(tt) and not self.in_checked:
                return
            self.diag("E-TYPE", "incompatible pointer to integer conversion", node)

    def check_access(self, e, ptr_t):
        """Bounds must be reachable for every checked-scope dereference."""
        if not self.in_checked or self.sizeof_depth:
            return
        if not ptr_t.kind.checked:
            return
        root, _ = self.a.access_parts(e)
        kb = self.a.known_bounds(root)
        if kb is None:
            rt = self.a.decayed(root)
            if isinstance(rt, Pointer) and rt.kind is PtrKind.ARRAY and self.declared_unbounded(root):
                self.diag("E-BOUNDS-MISSING", "dereference of an _Array_ptr without declared bounds", e)
            else:
                self.diag("E-BOUNDS-UNRESOLVED", "cannot determine the bounds of this access", e)
            return
        if kb.null:
            self.diag("E-TYPE", "dereference of a null pointer constant", e)
            return
        self.check_bounds_visible(kb, e)

    def declared_unbounded(self, root) -> bool:
        if isinstance(root, Ident):
            sym = self.a.refs.get(id(root))
            return sym is not None and sym.bounds is None
        return isinstance(root, (Member, Call, Index))

    def check_bounds_visible(self, kb, node):
        """Identifiers in resolved bounds must mean the same thing at the use site."""
        for ex in (kb.lo, kb.hi):
            for n in walk(ex):
                if isinstance(n, Ident) and self.lookup(n.name) is None:
                    self.diag("E-BOUNDS-UNRESOLVED",
                              f"bounds refer to '{n.name}', which is not in scope here", node)

    def check_shadowing(self, sym: Symbol, node):
        for ex in bounds_exprs(sym.bounds):
            for n in walk(ex):
                if isinstance(n, Ident):
                    cur = self.lookup(n.name)
                    if cur is None:
                        self.diag("E-BOUNDS-UNRESOLVED",
                                  f"bounds refer to '{n.name}', which is not in scope here", node)

    def index(self, e):
        bt = self.decay(self.expr(e.base))
        it = self.decay(self.expr(e.index))
        if isinstance(it, Pointer) and not isinstance(bt, Pointer):
            self.diag("E-TYPE", "index operand order 'i[p]' is outside the subset", e)
            return INT
        if not isinstance(bt, Pointer):
            self.diag("E-TYPE", "subscript of a non-pointer", e)
            return INT
        if bt.kind is PtrKind.PTR:
            self.diag("E-PTR-ARITH", "_Ptr values cannot be indexed", e)
        self.check_access(e, bt)
        self.check_ident_shadow(e.base, e)
        res = bt.pointee
        self.flag_raw(e, res)
        return res

    def check_ident_shadow(self, base, node):
        root, _ = self.a.peel(base) if self.a.type_of(base) is not None else (base, None)
        if isinstance(root, Ident) and self.in_checked:
            sym = self.a.refs.get(id(root))
            if sym is not None and sym.bounds is not None:
                for ex in bounds_exprs(sym.bounds):
                    for n in walk(ex):
                        if isinstance(n, Ident) and n.name != root.name:
                            cur = self.lookup(n.name)
                            decl_scope_sym = self.bound_symbol(sym, n.name)
                            if cur is None or (decl_scope_sym is not None and cur is not decl_scope_sym):
                                self.diag("E-BOUNDS-UNRESOLVED",
                                          f"bounds of '{sym.name}' refer to '{n.name}', "
                                          "which is shadowed or out of scope here", node)

    def bound_symbol(self, sym, name):
        for dep in self._all_symbols():
            if dep.name == name and sym in dep.bounded_by:
                return dep
        return None

    def _all_symbols(self):
        for scope in self.scopes:
            yield from scope.values()

    def member(self, e):
        bt = self.expr(e.base)
        rt = self.decay(bt)
        if e.arrow:
            if not isinstance(rt, Pointer):
                self.diag("E-TYPE", "'->' on a non-pointer", e)
                return INT
            self.check_access(e, rt)
            st = self.resolve(rt.pointee)
        else:
            st = self.resolve(bt)
        if not isinstance(st, StructRef) or st.tag not in self.env.structs:
            self.diag("E-TYPE", "member access on a non-struct", e)
            return INT
        f = self.env.field(st.tag, e.name)
        if f is None:
            self.diag("E-TYPE", f"no field '{e.name}' in struct {st.tag}", e)
            return INT
        t = f.type
        if self.in_checked:
            if f.itype is not None:
                t = f.itype
            elif isinstance(self.resolve(t), Pointer) and self.resolve(t).kind is PtrKind.PLAIN \
                    and f.bounds is not None:
                t = Pointer(PtrKind.ARRAY, self.resolve(t).pointee)
        self.flag_raw(e, t)
        return t

    def call(self, e):
        sym = self.lookup(e.func)
        if sym is not None and sym.kind == "func":
            f = sym.func
        elif e.func in BUILTIN_FUNCS:
            f = BUILTIN_FUNCS[e.func]
        else:
            self.diag("E-UNDECLARED", f"call to undeclared function '{e.func}'", e)
            for a in e.args:
                self.expr(a)
            return INT
        for a in e.args:
            self.expr(a)
        if len(e.args) < len(f.params) or (len(e.args) > len(f.params) and not f.variadic):
            self.diag("E-ARGS", f"'{f.name}' expects {len(f.params)} argument(s), got {len(e.args)}", e)
            return f.ret
        names = {p.name: a for p, a in zip(f.params, e.args) if p.name}
        for p, a in zip(f.params, e.args):
            at = self.a.type_of(a)
            ptype = p.type
            iface = isinstance(self.resolve(p.type), Pointer) and not self.resolve(p.type).kind.checked \
                and (p.bounds is not None or p.itype is not None)
            if self.in_checked and iface:
                ptype = p.itype if p.itype is not None else Pointer(PtrKind.ARRAY, self.resolve(p.type).pointee)
            self.check_assignable(ptype, a, at, a)
            if self.in_checked:
                bounds = substitute_bounds(p.bounds, names)
                unevaluable = p.bounds is not None and any(
                    isinstance(n, Ident) and n.name not in names and self.lookup(n.name) is None
                    for ex in bounds_exprs(p.bounds) for n in walk(ex))
                if unevaluable:
                    self.diag("E-IFACE-UNEVAL", f"bounds of parameter '{p.name}' cannot be evaluated "
                              "at this call", a)
                    continue
                need_t = self.resolve(ptype)
                if isinstance(need_t, Pointer) and need_t.kind.checked and not self.is_null_const(a):
                    if self.a.known_bounds(a) is None:
                        code = "E-IFACE-UNEVAL" if iface else "E-BOUNDS-UNRESOLVED"
                        self.diag(code, f"bounds of the argument for '{p.name}' cannot be determined", a)
                        continue
                self.establishment(a, ptype, bounds, a, a,
                                   iface_ptr=iface and p.itype is not None)
                if p.bounds is not None:
                    consts = {q.name: self.a.const_eval(x) for q, x in zip(f.params, e.args) if q.name}
                    self.deferred_nt.append(("call", a, p.bounds, consts, self.func))
        ret = f.ret
        if self.in_checked and f.ret_itype is not None:
            ret = f.ret_itype
        if self.discarded != id(e):
            self.flag_raw(e, ret)
        return ret

    # -- nt terminator rules -----------------------------------------------------------

    def check_nt_write(self, e: Assign):
        if not self.in_checked:
            return
        value = self.a.const_eval(e.value)
        if value is None or value == 0:
            return
        target = e.target
        if not (isinstance(target, Index) or (isinstance(target, Unary) and target.op == "*")):
            return
        root, idx = self.a.access_parts(target)
        rt = self.a.decayed(root)
        if isinstance(rt, Pointer) and rt.kind is PtrKind.NT_ARRAY:
            kb = self.a.known_bounds(root)
            if kb is None:
                return
            lo, hi = self.a.element_bounds(kb, self.a.elem_size(rt))
            ci, ch = self.a.const_eval(idx), self.a.const_eval(hi)
            if idx == hi or (ci is not None and ch is not None and ci == ch):
                self.diag("E-NT-OVERWRITE", "write of a non-zero value over the null terminator", e)
        elif isinstance(root, Ident):
            self.deferred_nt.append(("index", e, root, self.a.const_eval(idx), self.func))

    def flush_deferred(self):
        for entry in self.deferred_nt:
            if entry[0] == "index":
                _, node, root, idx, _ = entry
                sym = self.a.refs.get(id(root))
                if sym is not None and sym.nt_terminator is not None and idx == sym.nt_terminator:
                    self.diag("E-NT-OVERWRITE", "write of a non-zero value over the null terminator "
                              f"of the array underlying an nt_array_ptr", node)
            else:
                _, arg, bounds, consts, _ = entry
                arr = arg.operand if isinstance(arg, Unary) and arg.op == "&" else arg
                if not isinstance(arr, Ident):
                    continue
                sym = self.a.refs.get(id(arr))
                if sym is None or sym.nt_terminator is None:
                    continue
                at = self.resolve(sym.type)
                esz = self.a.elem_size(at)
                need = self.need_bytes(bounds, arg, consts)
                if need is not None and need > sym.nt_terminator * esz:
                    self.diag("E-NT-OVERWRITE", f"call may overwrite the null terminator of '{sym.name}'; "
                              "guard it with #ifndef USE_CHECKEDC", arg)

    def need_bytes(self, bounds, arg, consts):
        t = self.resolve(self.a.type_of(arg))
        if isinstance(bounds, ByteCount):
            return self.a.const_eval(bounds.expr, consts)
        if isinstance(bounds, Count):
            n = self.a.const_eval(bounds.expr, consts)
            if n is None:
                return None
            return n * self.a.elem_size(self.decay(t))
        return None


def substitute_bounds(bounds, mapping):
    if bounds is None:
        return None
    return type(bounds)(*[substitute(x, mapping) for x in bounds_exprs(bounds)])


def analyze(unit: SourceUnit) -> Analysis:
    return Analyzer(unit).run()


def check_unit(unit: SourceUnit) -> list[Diagnostic]:
    """Diagnostics for ``unit``; an empty list means accepted."""
    return analyze(unit).diagnostics


def resolve_bounds(expr, analysis: Analysis):
    return analysis.resolve_bounds(expr)
