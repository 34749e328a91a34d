"""Reference interpreter for the subset.

Memory is a set of byte-addressed objects; pointers are (object, byte
offset) pairs. In oracle mode a pointer produced in checked scope also
carries a *view*: the byte range its declared bounds grant, fixed when
the value is loaded from a bounded declaration, decays from an array or
is taken with ``&``. Checked accesses are validated against the view;
every access is validated against its object. Literal mode ignores views
and just runs the program, turning ``__checked_trap(k)`` into a trap.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .diagnostics import CompileError
from .emitters import CHECKED_MACRO
from .nodes import (
    Array, Assign, Base, Binary, Block, Break, ByteCount, Call, Cast, CharLit, Comma, Cond,
    Conditional, Continue, Count, Directive, DoWhile, Empty, ExprStmt, For, FuncDecl, Ident, If,
    Index, InitList, IntLit, Member, Pointer, Postfix, PtrKind, Range, Return, ScopePragma,
    SizeofExpr, SizeofType, SourceUnit, StrLit, StructDef, StructRef, Typedef, Unary, VarDecl,
    While, clone,
)
from .sema import Analysis, analyze, string_bytes
from .types import POINTER_SIZE

DEFAULT_FUEL = 1_000_000
MAX_DEPTH = 200


class OracleError(Exception):
    """The program left the interpretable subset (unknown function, bad pointer use, ...)."""


class _Trap(Exception):
    def __init__(self, site: int):
        self.site = site


class _Violation(Exception):
    def __init__(self, obj: int, offset: int, access: str, span, checked: bool):
        self.obj, self.offset, self.access, self.span, self.checked = obj, offset, access, span, checked


class _Fuel(Exception):
    pass


class _Return(Exception):
    def __init__(self, value):
        self.value = value


class _Break(Exception):
    pass


class _Continue(Exception):
    pass


@dataclass
class ExecOutcome:
    kind: str  # normal | trap | violation | fuel
    value: int | None = None
    log: list = field(default_factory=list)
    trap_id: int | None = None
    obj: int | None = None
    offset: int | None = None
    access: str | None = None
    span: tuple | None = None
    checked: bool = True
    steps: int = 0
    calls: dict = field(default_factory=dict)

    def line(self) -> str:
        if self.kind == "normal":
            return f"NORMAL {self.value}"
        if self.kind == "trap":
            return f"TRAP {self.trap_id}"
        if self.kind == "violation":
            return f"VIOLATION {self.obj}:{self.offset}"
        return f"FUEL {self.steps}"


@dataclass(eq=False)
class MemObject:
    id: int
    name: str
    size: int
    data: bytearray
    ptrs: dict = field(default_factory=dict)  # byte offset -> PtrVal
    live: bool = True


@dataclass(frozen=True)
class View:
    lo: int
    hi: int
    nt: bool = False
    tsize: int = 1  # size of the terminator slot for nt views


@dataclass(frozen=True)
class PtrVal:
    obj: MemObject | None
    off: int
    esz: int  # pointee size used for arithmetic
    view: View | None = None

    @property
    def is_null(self) -> bool:
        return self.obj is None

    def with_view(self, view):
        return PtrVal(self.obj, self.off, self.esz, view)


NULL = PtrVal(None, 0, 1)


@dataclass
class LValue:
    ptr: PtrVal
    type: object


def wrap(v: int, size: int, signed: bool) -> int:
    bits = size * 8
    v &= (1 << bits) - 1
    if signed and v >= 1 << (bits - 1):
        v -= 1 << bits
    return v


class Interpreter:
    def __init__(self, unit: SourceUnit, mode: str = "oracle", fuel: int = DEFAULT_FUEL,
                 analysis: Analysis | None = None):
        if mode not in ("oracle", "literal"):
            raise ValueError(f"unknown mode {mode!r}")
        self.mode = mode
        self.oracle = mode == "oracle"
        defines = {CHECKED_MACRO} if self.oracle else set()
        self.unit = _resolve_all(unit, defines)
        self.a = analysis if analysis is not None else analyze(self.unit)
        if self.oracle and not self.a.ok:
            raise CompileError(self.a.errors)
        self.env = self.a.env
        self.fuel = fuel
        self.steps = 0
        self.log: list[int] = []
        self.calls: dict[str, int] = {}
        self.next_obj = 1
        self.globals: dict[int, MemObject] = {}
        self.frames: list[dict[int, MemObject]] = []
        self.strings: dict[int, MemObject] = {}
        self.overrides: dict[str, object] = {}
        self.no_views = 0
        self.bodies: dict[str, FuncDecl] = {}
        for item in self.unit.items:
            if isinstance(item, FuncDecl) and item.body is not None:
                self.bodies[item.name] = item

    # -- entry ----------------------------------------------------------------------

    def run(self, entry: str = "main", args=()) -> ExecOutcome:
        try:
            self.init_globals()
            f = self.bodies.get(entry)
            if f is None:
                raise OracleError(f"no function named '{entry}'")
            value = self.invoke(f, [self.convert(a, p.type) for a, p in zip(args, f.params)])
            if isinstance(value, PtrVal):
                raise OracleError("entry function returned a pointer")
            return self.outcome("normal", value=0 if value is None else value)
        except _Trap as t:
            return self.outcome("trap", trap_id=t.site)
        except _Violation as v:
            return self.outcome("violation", obj=v.obj, offset=v.offset, access=v.access,
                                span=v.span, checked=v.checked)
        except _Fuel:
            return self.outcome("fuel")
        except RecursionError:
            raise OracleError("interpreter recursion limit reached") from None

    def outcome(self, kind, **kw) -> ExecOutcome:
        return ExecOutcome(kind, log=list(self.log), steps=self.steps, calls=dict(self.calls), **kw)

    def tick(self):
        self.steps += 1
        if self.steps > self.fuel:
            raise _Fuel()

    # -- memory -----------------------------------------------------------------------

    def alloc(self, name: str, size: int) -> MemObject:
        obj = MemObject(self.next_obj, name, size, bytearray(size))
        self.next_obj += 1
        return obj

    def sizeof(self, t) -> int:
        return self.env.sizeof(t, self.a.const_eval)

    def pointee_size(self, t) -> int:
        t = self.env.resolve(t)
        inner = t.pointee if isinstance(t, Pointer) else t.elem
        if self.env.is_void(inner):
            return 1
        try:
            return self.sizeof(inner)
        except TypeError:
            return 1

    def check_object(self, p: PtrVal, size: int, access: str, node, checked: bool):
        if p.obj is None:
            raise _Violation(0, 0, access, getattr(node, "span", None), checked)
        if not p.obj.live or p.off < 0 or p.off + size > p.obj.size:
            raise _Violation(p.obj.id, p.off // max(size, 1), access, getattr(node, "span", None), checked)

    def load(self, p: PtrVal, t):
        t = self.env.resolve(t)
        if isinstance(t, Pointer):
            q = p.obj.ptrs.get(p.off)
            if q is not None:
                return PtrVal(q.obj, q.off, self.pointee_size(t))
            if any(p.obj.data[p.off:p.off + POINTER_SIZE]):
                raise OracleError("load of a pointer from non-pointer bytes")
            return PtrVal(None, 0, self.pointee_size(t))
        if isinstance(t, Array):
            return PtrVal(p.obj, p.off, self.pointee_size(t), View(p.off, p.off + self.sizeof(t)))
        if isinstance(t, StructRef):
            size = self.sizeof(t)
            data = bytes(p.obj.data[p.off:p.off + size])
            ptrs = {k - p.off: v for k, v in p.obj.ptrs.items() if p.off <= k < p.off + size}
            return ("struct", data, ptrs)
        size, signed = self.env.int_props(t)
        raw = int.from_bytes(p.obj.data[p.off:p.off + size], "little")
        return wrap(raw, size, signed)

    def store(self, p: PtrVal, t, value):
        t = self.env.resolve(t)
        obj = p.obj
        if isinstance(t, StructRef):
            _, data, ptrs = value
            self._clear_ptrs(obj, p.off, len(data))
            obj.data[p.off:p.off + len(data)] = data
            for k, v in ptrs.items():
                obj.ptrs[p.off + k] = v
            return
        if isinstance(t, Pointer):
            self._clear_ptrs(obj, p.off, POINTER_SIZE)
            if not isinstance(value, PtrVal):
                if value != 0:
                    raise OracleError("integer stored into a pointer")
                value = NULL
            if value.obj is None:
                obj.data[p.off:p.off + POINTER_SIZE] = bytes(POINTER_SIZE)
            else:
                token = (value.obj.id << 16 | (value.off & 0xFFFF)) | 1
                obj.data[p.off:p.off + POINTER_SIZE] = (token & 0xFFFFFFFF).to_bytes(4, "little")
                obj.ptrs[p.off] = PtrVal(value.obj, value.off, value.esz)
            return
        size, signed = self.env.int_props(t)
        if isinstance(value, PtrVal):
            raise OracleError("pointer stored into an integer")
        self._clear_ptrs(obj, p.off, size)
        obj.data[p.off:p.off + size] = (value & ((1 << (size * 8)) - 1)).to_bytes(size, "little")

    @staticmethod
    def _clear_ptrs(obj, off, size):
        for k in [k for k in obj.ptrs if off - POINTER_SIZE < k < off + size]:
            del obj.ptrs[k]

    # -- globals, frames, calls ----------------------------------------------------------

    def init_globals(self):
        for item in self.unit.items:
            if isinstance(item, VarDecl):
                sym = self.a.decl_symbols.get(id(item))
                if sym is None or sym.uid in self.globals and item.init is None:
                    continue
                obj = self.globals.get(sym.uid) or self.alloc(item.name, self.sizeof(item.type))
                self.globals[sym.uid] = obj
                if item.init is not None:
                    self.initialize(PtrVal(obj, 0, 1), item.type, item.init)

    def storage(self, sym) -> MemObject:
        if self.frames and sym.uid in self.frames[-1]:
            return self.frames[-1][sym.uid]
        if sym.uid in self.globals:
            return self.globals[sym.uid]
        raise OracleError(f"'{sym.name}' has no storage here")

    def convert(self, value, t):
        t = self.env.resolve(t)
        if isinstance(t, Pointer):
            if isinstance(value, PtrVal):
                return PtrVal(value.obj, value.off, self.pointee_size(t), value.view)
            if value == 0:
                return PtrVal(None, 0, self.pointee_size(t))
            raise OracleError("integer converted to a pointer")
        if isinstance(t, Base) and self.env.is_integer(t):
            if isinstance(value, PtrVal):
                raise OracleError("pointer converted to an integer")
            size, signed = self.env.int_props(t)
            if t.name == "_Bool":
                return int(value != 0)
            return wrap(value, size, signed)
        return value

    def invoke(self, f: FuncDecl, args: list):
        if len(self.frames) >= MAX_DEPTH:
            raise OracleError("call depth limit exceeded")
        frame: dict[int, MemObject] = {}
        for p, v in zip(f.params, args):
            sym = self.a.decl_symbols.get(id(p))
            obj = self.alloc(p.name or "", self.sizeof(p.type))
            self.store(PtrVal(obj, 0, 1), p.type, self.convert(v, p.type))
            if sym is not None:
                frame[sym.uid] = obj
        self.frames.append(frame)
        try:
            self.exec_stmt(f.body)
            result = None
        except _Return as r:
            result = r.value
        finally:
            for obj in self.frames.pop().values():
                obj.live = False
        if self.env.is_void(f.ret):
            return None
        if result is None:
            return 0
        return self.convert(result, f.ret)

    # -- statements -------------------------------------------------------------------------

    def exec_stmt(self, s):
        self.tick()
        if isinstance(s, Block):
            for x in s.items:
                self.exec_stmt(x)
        elif isinstance(s, VarDecl):
            self.exec_decl(s)
        elif isinstance(s, ExprStmt):
            self.eval(s.expr)
        elif isinstance(s, If):
            if self.truth(self.eval(s.test)):
                self.exec_stmt(s.then)
            elif s.orelse is not None:
                self.exec_stmt(s.orelse)
        elif isinstance(s, While):
            while self.truth(self.eval(s.test)):
                try:
                    self.exec_stmt(s.body)
                except _Break:
                    break
                except _Continue:
                    pass
        elif isinstance(s, DoWhile):
            while True:
                try:
                    self.exec_stmt(s.body)
                except _Break:
                    break
                except _Continue:
                    pass
                if not self.truth(self.eval(s.test)):
                    break
        elif isinstance(s, For):
            if isinstance(s.init, VarDecl):
                self.exec_decl(s.init)
            elif s.init is not None:
                self.eval(s.init)
            while s.test is None or self.truth(self.eval(s.test)):
                try:
                    self.exec_stmt(s.body)
                except _Break:
                    break
                except _Continue:
                    pass
                if s.step is not None:
                    self.eval(s.step)
        elif isinstance(s, Return):
            value = None
            if s.value is not None:
                value = self.eval(s.value)
                f = self.a.func_of_return.get(id(s))
                if f is not None and self.oracle and self.a.is_checked(s):
                    ret = f.ret_itype if f.ret_itype is not None else f.ret
                    self.establish(s, value, ret, f.ret_bounds, {})
            raise _Return(value)
        elif isinstance(s, Break):
            raise _Break()
        elif isinstance(s, Continue):
            raise _Continue()
        elif isinstance(s, (Empty, Directive)):
            pass
        else:
            raise OracleError(f"cannot execute {type(s).__name__}")

    def exec_decl(self, d: VarDecl):
        sym = self.a.decl_symbols.get(id(d))
        if "extern" in d.storage:
            return
        obj = self.alloc(d.name, self.sizeof(d.type))
        self.frames[-1][sym.uid] = obj
        if d.init is None:
            return
        if isinstance(d.init, InitList) or (isinstance(d.init, StrLit)
                                             and isinstance(self.env.resolve(d.type), Array)):
            self.initialize(PtrVal(obj, 0, 1), d.type, d.init)
            return
        value = self.eval(d.init)
        if self.oracle and self.a.is_checked(d):
            self.establish(d, value, sym.view_type(True), d.bounds, {d.name: value})
        self.store(PtrVal(obj, 0, 1), d.type, self.convert(value, d.type))

    def initialize(self, p: PtrVal, t, init):
        t = self.env.resolve(t)
        if isinstance(init, InitList):
            if isinstance(t, Array):
                esz = self.sizeof(t.elem)
                for k, x in enumerate(init.items):
                    self.initialize(PtrVal(p.obj, p.off + k * esz, 1), t.elem, x)
            elif isinstance(t, StructRef):
                offsets = self.env.struct_layout(t.tag, self.a.const_eval)[0]
                for f, x in zip(self.env.structs[t.tag], init.items):
                    self.initialize(PtrVal(p.obj, p.off + offsets[f.name], 1), f.type, x)
            else:
                if init.items:
                    self.initialize(p, t, init.items[0])
            return
        if isinstance(init, StrLit) and isinstance(t, Array):
            data = string_bytes(init.text) + b"\0"
            n = min(len(data), self.sizeof(t))
            p.obj.data[p.off:p.off + n] = data[:n]
            return
        self.store(p, t, self.convert(self.eval(init), t))

    # -- views and establishment ------------------------------------------------------------

    def declared_view(self, p: PtrVal, t, bounds, overrides) -> View | None:
        """The view a declaration of type ``t`` with ``bounds`` grants to value ``p``."""
        t = self.env.resolve(t)
        if p.obj is None or not isinstance(t, Pointer) or not t.kind.checked:
            return None
        esz = self.pointee_size(t)
        nt = t.kind is PtrKind.NT_ARRAY
        if t.kind is PtrKind.PTR:
            return View(p.off, p.off + esz)
        if bounds is None:
            return View(p.off, p.off, True, esz) if nt else None
        saved = self.overrides
        self.overrides = {**saved, **overrides}
        self.no_views += 1
        try:
            if isinstance(bounds, Count):
                n = self.eval(bounds.expr)
                return View(p.off, p.off + n * esz, nt, esz)
            if isinstance(bounds, ByteCount):
                return View(p.off, p.off + self.eval(bounds.expr), nt, esz)
            lo, hi = self.eval(bounds.lo), self.eval(bounds.hi)
            if not (isinstance(lo, PtrVal) and isinstance(hi, PtrVal)) or lo.obj is not p.obj \
                    or hi.obj is not p.obj:
                return View(p.off, p.off, nt, esz)
            return View(lo.off, hi.off, nt, esz)
        finally:
            self.no_views -= 1
            self.overrides = saved

    def type_view(self, p: PtrVal, t) -> View | None:
        t = self.env.resolve(t)
        if p.obj is None or not isinstance(t, Pointer):
            return None
        if t.kind is PtrKind.PTR:
            return View(p.off, p.off + p.esz)
        if t.kind is PtrKind.NT_ARRAY:
            return View(p.off, p.off, True, p.esz)
        return None

    def establish(self, node, value, target, bounds, overrides, iface_ptr=False):
        """Binding ``value`` to declared bounds: the value's view must cover them."""
        t = self.env.resolve(target)
        if not isinstance(t, Pointer) or not t.kind.checked or not isinstance(value, PtrVal):
            return
        if value.obj is None:
            if iface_ptr:
                raise _Violation(0, 0, "interface", node.span, True)
            return
        value = PtrVal(value.obj, value.off, self.pointee_size(t), value.view)
        need = self.declared_view(value, t, bounds, overrides)
        if need is None:
            return
        need_hi = need.hi + (need.tsize if need.nt else 0)
        src = value.view
        if src is None:
            raise _Violation(value.obj.id, 0, "bounds", node.span, True)
        src_hi = src.hi + (src.tsize if src.nt and need.nt else 0)
        if need.lo < src.lo or need_hi > src_hi:
            raise _Violation(value.obj.id, (value.off - src.lo) // max(value.esz, 1), "bounds",
                             node.span, True)

    def member_overrides(self, base_ptr: PtrVal, tag: str, exprs) -> dict:
        """Values of sibling fields referenced by a field's bounds."""
        offsets = self.env.struct_layout(tag, self.a.const_eval)[0]
        names = {f.name: f for f in self.env.structs[tag]}
        out = {}
        from .nodes import walk
        for e in exprs:
            for n in walk(e):
                if isinstance(n, Ident) and n.name in names:
                    f = names[n.name]
                    fp = PtrVal(base_ptr.obj, base_ptr.off + offsets[f.name], 1)
                    self.check_object(fp, self.sizeof(f.type), "read", n, False)
                    out[n.name] = self.load(fp, f.type)
        return out

    # -- lvalues and accesses ----------------------------------------------------------------

    def lvalue(self, e, mode: str = "read") -> LValue:
        self.tick()
        t = self.a.type_of(e)
        if isinstance(e, Ident):
            sym = self.a.refs.get(id(e))
            if sym is None:
                raise OracleError(f"unresolved identifier '{e.name}'")
            obj = self.storage(sym)
            return LValue(PtrVal(obj, 0, 1), sym.type)
        if isinstance(e, StrLit):
            obj = self.string(e)
            return LValue(PtrVal(obj, 0, 1), Array(Base("char"), IntLit(obj.size)))
        if isinstance(e, Index):
            base = self.eval(e.base)
            idx = self.eval(e.index)
            if isinstance(idx, PtrVal):
                raise OracleError("index operand order 'i[p]' is outside the subset")
            p = self.offset(base, idx)
            return self.deref(e, p, t, mode)
        if isinstance(e, Unary) and e.op == "*":
            p = self.eval(e.operand)
            return self.deref(e, p, t, mode)
        if isinstance(e, Member):
            if e.arrow:
                p = self.eval(e.base)
                st = self.env.resolve(self.env.resolve(self.a.decayed(e.base)).pointee)
                lv = self.deref(e, p, st, mode)
            else:
                lv = self.lvalue(e.base, mode)
                st = self.env.resolve(lv.type)
            offsets = self.env.struct_layout(st.tag, self.a.const_eval)[0]

            f = self.env.field(st.tag, e.name)
            p = lv.ptr
            return LValue(PtrVal(p.obj, p.off + offsets[e.name], 1, p.view), f.type)
        raise OracleError(f"not an lvalue: {type(e).__name__}")

    def deref(self, node, p, t, mode) -> LValue:
        if not isinstance(p, PtrVal):
            raise OracleError("dereference of an integer")
        if mode == "addr":
            return LValue(p, t)
        size = self.sizeof(t) if not self.env.is_void(t) else 1
        checked = self.oracle and self.a.is_checked_access(node)
        if checked:
            if p.obj is None:
                raise _Violation(0, 0, mode, node.span, True)
            v = p.view
            if v is None:
                raise _Violation(p.obj.id, 0, mode, node.span, True)
            upper = v.hi + (v.tsize if v.nt and mode in ("read", "ntwrite") else 0)
            if p.off < v.lo or p.off + size > upper:
                raise _Violation(p.obj.id, (p.off - v.lo) // max(size, 1), mode, node.span, True)
        self.check_object(p, size, mode, node, checked)
        return LValue(p, t)

    def offset(self, p, k):
        if not isinstance(p, PtrVal):
            raise OracleError("pointer arithmetic on an integer")
        return PtrVal(p.obj, p.off + k * p.esz, p.esz, p.view)

    def string(self, e: StrLit) -> MemObject:
        obj = self.strings.get(id(e))
        if obj is None:
            data = string_bytes(e.text) + b"\0"
            obj = self.alloc("<string>", len(data))
            obj.data[:] = data
            self.strings[id(e)] = obj
        return obj

    # -- expressions -------------------------------------------------------------------------------

    def truth(self, v) -> bool:
        if isinstance(v, PtrVal):
            return v.obj is not None
        return v != 0

    def rtype(self, e):
        return self.env.resolve(self.a.type_of(e)) if self.a.type_of(e) is not None else Base("int")

    def eval(self, e):
        self.tick()
        if isinstance(e, Ident) and e.name in self.overrides:
            return self.overrides[e.name]
        if isinstance(e, (IntLit, CharLit)):
            t = self.a.type_of(e)
            if t is None:
                return wrap(e.value, 4, True)
            size, signed = self.env.int_props(t)
            return wrap(e.value, size, signed)
        if isinstance(e, StrLit):
            obj = self.string(e)
            return PtrVal(obj, 0, 1, View(0, obj.size - 1, True, 1))
        if isinstance(e, Ident):
            lv = self.lvalue(e)
            value = self.load(lv.ptr, lv.type)
            if isinstance(value, PtrVal) and self.oracle and self.a.is_checked(e) and not self.no_views:
                sym = self.a.refs[id(e)]
                if isinstance(self.env.resolve(sym.type), Array):
                    return value
                vt = sym.view_type(True)
                return value.with_view(self.declared_view(value, vt, sym.bounds, {}))
            return value
        if isinstance(e, (Index, Member)) or (isinstance(e, Unary) and e.op == "*"):
            lv = self.lvalue(e, "read")
            if self.env.is_void(lv.type):
                raise OracleError("load through a void pointer")
            value = self.load(lv.ptr, lv.type)
            if isinstance(value, PtrVal) and self.oracle and self.a.is_checked(e) and not self.no_views:
                if isinstance(self.env.resolve(lv.type), Array):
                    return value
                if isinstance(e, Member):
                    return value.with_view(self.field_view(e, lv, value))
                return value.with_view(self.type_view(value, self.a.type_of(e)))
            return value
        if isinstance(e, SizeofType):
            return self.sizeof(e.type)
        if isinstance(e, SizeofExpr):
            return self.sizeof(self.a.type_of(e.expr))
        if isinstance(e, Unary):
            return self.unary(e)
        if isinstance(e, Postfix):
            lv = self.lvalue(e.operand, "modify")
            old = self.load(lv.ptr, lv.type)
            delta = 1 if e.op == "++" else -1
            new = self.offset(old, delta) if isinstance(old, PtrVal) else self.convert(old + delta, lv.type)
            self.store(lv.ptr, lv.type, new)
            return old
        if isinstance(e, Binary):
            return self.binary(e)
        if isinstance(e, Assign):
            return self.assign(e)
        if isinstance(e, Cond):
            if self.truth(self.eval(e.test)):
                return self.eval(e.then)
            return self.eval(e.orelse)
        if isinstance(e, Comma):
            self.eval(e.left)
            return self.eval(e.right)
        if isinstance(e, Cast):
            v = self.eval(e.expr)
            t = self.env.resolve(e.type)
            if self.env.is_void(t):
                return 0
            return self.convert(v, t)
        if isinstance(e, Call):
            return self.call(e)
        raise OracleError(f"cannot evaluate {type(e).__name__}")

    def field_view(self, e: Member, lv: LValue, value: PtrVal):
        base_t = self.env.resolve(self.a.type_of(e.base))
        if e.arrow:
            base_t = self.env.resolve(self.env.resolve(self.a.decayed(e.base)).pointee)
        f = self.env.field(base_t.tag, e.name)
        vt = self.a.type_of(e)
        if f.bounds is None:
            return self.type_view(value, vt)
        offsets = self.env.struct_layout(base_t.tag, self.a.const_eval)[0]
        struct_ptr = PtrVal(lv.ptr.obj, lv.ptr.off - offsets[e.name], 1)
        from .sema import bounds_exprs
        sib = self.member_overrides(struct_ptr, base_t.tag, bounds_exprs(f.bounds))
        return self.declared_view(value, vt, f.bounds, sib)

    def unary(self, e):
        op = e.op
        if op == "&":
            lv = self.lvalue(e.operand, "addr")
            t = self.env.resolve(lv.type)
            esz = self.sizeof(t) if not self.env.is_void(t) else 1
            p = PtrVal(lv.ptr.obj, lv.ptr.off, esz, lv.ptr.view)
            inner = e.operand
            if isinstance(inner, Index) or (isinstance(inner, Unary) and inner.op == "*"):
                return p
            return p.with_view(View(p.off, p.off + esz))
        if op in ("++", "--"):
            lv = self.lvalue(e.operand, "modify")
            old = self.load(lv.ptr, lv.type)
            delta = 1 if op == "++" else -1
            new = self.offset(old, delta) if isinstance(old, PtrVal) else self.convert(old + delta, lv.type)
            self.store(lv.ptr, lv.type, new)
            return new
        v = self.eval(e.operand)
        if op == "!":
            return int(not self.truth(v))
        if isinstance(v, PtrVal):
            raise OracleError(f"unary '{op}' on a pointer")
        t = self.rtype(e)
        if op == "-":
            return self.convert(-v, t)
        if op == "+":
            return self.convert(v, t)
        if op == "~":
            return self.convert(~v, t)
        raise OracleError(f"unknown unary operator {op}")

    def common(self, lt, rt):
        lw, ls = self.env.int_props(lt) if self.env.is_integer(lt) else (4, True)
        rw, rs = self.env.int_props(rt) if self.env.is_integer(rt) else (4, True)
        w = max(lw, rw, 4)
        if w == 8:
            unsigned = (lw == 8 and not ls) or (rw == 8 and not rs)
            return 8, not unsigned
        unsigned = (lw == 4 and not ls) or (rw == 4 and not rs)
        return 4, not unsigned

    def binary(self, e):
        op = e.op
        if op == "&&":
            return int(self.truth(self.eval(e.left)) and self.truth(self.eval(e.right)))
        if op == "||":
            return int(self.truth(self.eval(e.left)) or self.truth(self.eval(e.right)))
        a = self.eval(e.left)
        b = self.eval(e.right)
        if isinstance(a, PtrVal) or isinstance(b, PtrVal):
            return self.pointer_binary(e, a, b)
        lt = self.a.type_of(e.left) or Base("int")
        rt = self.a.type_of(e.right) or Base("int")
        if op in ("<<", ">>"):
            w, signed = self.common(lt, Base("int"))
            a = wrap(a, w, signed)
            if b < 0 or b >= w * 8:
                raise OracleError("shift count out of range")
            return wrap(a << b if op == "<<" else a >> b, w, signed)
        w, signed = self.common(lt, rt)
        a, b = wrap(a, w, signed), wrap(b, w, signed)
        if op in ("/", "%") and b == 0:
            raise OracleError("division by zero")
        if op == "/":
            q = abs(a) // abs(b)
            return wrap(q if (a >= 0) == (b >= 0) else -q, w, signed)
        if op == "%":
            q = abs(a) // abs(b)
            q = q if (a >= 0) == (b >= 0) else -q
            return wrap(a - b * q, w, signed)
        cmp = {"==": a == b, "!=": a != b, "<": a < b, ">": a > b, "<=": a <= b, ">=": a >= b}
        if op in cmp:
            return int(cmp[op])
        r = {"+": a + b, "-": a - b, "*": a * b, "&": a & b, "|": a | b, "^": a ^ b}[op]
        return wrap(r, w, signed)

    def pointer_binary(self, e, a, b):
        op = e.op
        if op in ("+", "-") and isinstance(a, PtrVal) and not isinstance(b, PtrVal):
            return self.offset(a, b if op == "+" else -b)
        if op == "+" and isinstance(b, PtrVal) and not isinstance(a, PtrVal):
            return self.offset(b, a)
        if op in ("==", "!="):
            if not isinstance(a, PtrVal):
                a = self._null_or_fail(a)
            if not isinstance(b, PtrVal):
                b = self._null_or_fail(b)
            same = a.obj is b.obj and (a.obj is None or a.off == b.off)
            return int(same if op == "==" else not same)
        if isinstance(a, PtrVal) and isinstance(b, PtrVal) and op in ("-", "<", ">", "<=", ">="):
            if a.obj is not b.obj:
                if self.oracle:
                    raise _Violation(a.obj.id if a.obj else 0, 0, "compare", e.span, True)
                raise OracleError("comparison of pointers into different objects")
            if op == "-":
                return (a.off - b.off) // max(a.esz, 1)
            return int({"<": a.off < b.off, ">": a.off > b.off,
                        "<=": a.off <= b.off, ">=": a.off >= b.off}[op])
        raise OracleError(f"invalid pointer operands to '{op}'")

    @staticmethod
    def _null_or_fail(v):
        if v == 0:
            return NULL
        raise OracleError("pointer compared with a non-zero integer")

    def assign(self, e):
        target = e.target
        if e.op == "=":
            nt_store = False
            if self.oracle and self.a.is_checked_access(target):
                nt_store = self._nt_target(target)
            lv = self.lvalue(target, "ntwrite" if nt_store else "write")
            value = self.eval(e.value)
            value = self.convert(value, lv.type) if not isinstance(self.env.resolve(lv.type), StructRef) \
                else value
            if nt_store:
                v = lv.ptr.view
                if v is not None and lv.ptr.off >= v.hi and value != 0:
                    raise _Violation(lv.ptr.obj.id, (lv.ptr.off - v.lo) // max(v.tsize, 1),
                                     "nt-write", target.span, True)
            if self.oracle and self.a.is_checked(e) and isinstance(value, PtrVal):
                bounds, overrides = self.target_bounds(target, lv, value)
                self.establish(e, value, self.a.type_of(target), bounds, overrides)
            self.store(lv.ptr, lv.type, value)
            return value
        lv = self.lvalue(target, "modify")
        old = self.load(lv.ptr, lv.type)
        rhs = self.eval(e.value)
        op = e.op[:-1]
        if isinstance(old, PtrVal):
            if op not in ("+", "-"):
                raise OracleError(f"invalid pointer operator '{e.op}'")
            new = self.offset(old, rhs if op == "+" else -rhs)
        else:
            lt = self.a.type_of(target) or Base("int")
            rt = self.a.type_of(e.value) or Base("int")
            w, signed = self.common(lt, rt)
            a, b = wrap(old, w, signed), wrap(rhs, w, signed)
            if op in ("/", "%") and b == 0:
                raise OracleError("division by zero")
            if op in ("<<", ">>"):
                if b < 0 or b >= w * 8:
                    raise OracleError("shift count out of range")
                r = a << b if op == "<<" else a >> b
            elif op == "/":
                q = abs(a) // abs(b)
                r = q if (a >= 0) == (b >= 0) else -q
            elif op == "%":
                q = abs(a) // abs(b)
                q = q if (a >= 0) == (b >= 0) else -q
                r = a - b * q
            else:
                r = {"+": a + b, "-": a - b, "*": a * b, "&": a & b, "|": a | b, "^": a ^ b}[op]
            new = self.convert(wrap(r, w, signed), lv.type)
        self.store(lv.ptr, lv.type, new)
        return new

    def _nt_target(self, target) -> bool:
        if isinstance(target, Index):
            base = target.base
        elif isinstance(target, Unary):
            base = target.operand
        else:
            return False
        t = self.a.decayed(self.a.peel(base)[0])
        return isinstance(t, Pointer) and t.kind is PtrKind.NT_ARRAY

    def target_bounds(self, target, lv: LValue, value):
        if isinstance(target, Ident):
            sym = self.a.refs.get(id(target))
            if sym is not None:
                return sym.bounds, {target.name: value}
        if isinstance(target, Member):
            base_t = self.env.resolve(self.a.type_of(target.base))
            if target.arrow:
                base_t = self.env.resolve(self.env.resolve(self.a.decayed(target.base)).pointee)
            f = self.env.field(base_t.tag, target.name)
            if f is not None and f.bounds is not None:
                offsets = self.env.struct_layout(base_t.tag, self.a.const_eval)[0]
                struct_ptr = PtrVal(lv.ptr.obj, lv.ptr.off - offsets[target.name], 1)
                from .sema import bounds_exprs
                sib = self.member_overrides(struct_ptr, base_t.tag, bounds_exprs(f.bounds))
                sib[target.name] = value
                return f.bounds, sib
        return None, {}

    def call(self, e: Call):
        args = [self.eval(a) for a in e.args]
        self.calls[e.func] = self.calls.get(e.func, 0) + 1
        if e.func == "__checked_trap":
            raise _Trap(args[0] if args else -1)
        if e.func == "print_int":
            self.log.append(args[0])
            return None
        f = self.bodies.get(e.func)
        sym = self.a.funcs.get(e.func)
        decl = sym.func if sym is not None else f
        if self.oracle and self.a.is_checked(e) and decl is not None:
            self.boundary(e, decl, args)
        if f is None:
            raise OracleError(f"call to unknown external function '{e.func}'")
        value = self.invoke(f, args)
        if isinstance(value, PtrVal) and self.oracle and self.a.is_checked(e) and not self.no_views:
            rt = decl.ret_itype if decl.ret_itype is not None else decl.ret
            if decl.ret_bounds is not None and not isinstance(decl.ret_bounds, Range):
                names = {p.name: self.convert(v, p.type) for p, v in zip(decl.params, args) if p.name}
                return value.with_view(self.declared_view(value, rt, decl.ret_bounds, names))
            return value.with_view(self.type_view(value, rt))
        return value

    def boundary(self, e: Call, f: FuncDecl, args):
        """Interface and checked-parameter contracts, checked before control transfers."""
        names = {p.name: self.convert(v, p.type) for p, v in zip(f.params, args) if p.name}
        for p, arg, value in zip(f.params, e.args, args):
            pt = self.env.resolve(p.type)
            if not isinstance(pt, Pointer):
                continue
            value = self.convert(value, pt)
            iface = not pt.kind.checked and (p.bounds is not None or p.itype is not None)
            if not pt.kind.checked and not iface:
                continue
            target = p.itype if p.itype is not None else (
                p.type if pt.kind.checked else Pointer(PtrKind.ARRAY, pt.pointee))
            iface_ptr = iface and p.itype is not None and self.env.resolve(p.itype).kind is PtrKind.PTR
            if iface_ptr and isinstance(value, PtrVal) and value.obj is None:
                raise _Violation(0, 0, "interface", arg.span, True)
            self.establish(arg, value, target, p.bounds, names)


def _resolve_all(unit: SourceUnit, defines: set) -> SourceUnit:
    """Resolve every ``#ifdef`` region given the set of defined names."""
    def splice(items):
        out = []
        for item in items:
            if isinstance(item, Conditional):
                out.extend(splice(item.active_branch(item.name in defines)))
                continue
            inside(item)
            out.append(item)
        return out

    def inside(node):
        if isinstance(node, Block):
            node.items = splice(node.items)
        elif isinstance(node, FuncDecl) and node.body is not None:
            inside(node.body)
        elif isinstance(node, If):
            inside(node.then)
            if node.orelse is not None:
                inside(node.orelse)
        elif isinstance(node, (While, DoWhile, For)):
            inside(node.body)

    u = clone(unit)
    return SourceUnit(splice(u.items), unit.source_name)


def execute(unit: SourceUnit, entry: str = "main", args=(), mode: str = "oracle",
            fuel: int = DEFAULT_FUEL) -> ExecOutcome:
    """Run ``entry`` and summarize the outcome."""
    return Interpreter(unit, mode, fuel).run(entry, list(args))
