"""Type utilities: builtin typedefs, sizes and integer properties.

Sizes model a 32-bit target (ILP32): ``int``, ``long``, ``size_t`` and
pointers are 4 bytes.
"""

from __future__ import annotations

from .nodes import Array, Base, Pointer, PtrKind, StructRef

POINTER_SIZE = 4

# name -> (size, signed)
INTEGER_TYPES = {
    "_Bool": (1, False),
    "char": (1, True),
    "signed char": (1, True),
    "unsigned char": (1, False),
    "short": (2, True),
    "unsigned short": (2, False),
    "int": (4, True),
    "unsigned int": (4, False),
    "long": (4, True),
    "unsigned long": (4, False),
    "long long": (8, True),
    "unsigned long long": (8, False),
}

BUILTIN_TYPEDEFS = {
    "size_t": Base("unsigned int"),
    "ssize_t": Base("int"),
    "ptrdiff_t": Base("int"),
    "uintptr_t": Base("unsigned int"),
    "intptr_t": Base("int"),
    "int8_t": Base("signed char"),
    "uint8_t": Base("unsigned char"),
    "int16_t": Base("short"),
    "uint16_t": Base("unsigned short"),
    "int32_t": Base("int"),
    "uint32_t": Base("unsigned int"),
    "int64_t": Base("long long"),
    "uint64_t": Base("unsigned long long"),
    "FILE": StructRef("__FILE"),
}


class TypeEnv:
    """Typedef and struct tables for one unit."""

    def __init__(self):
        self.typedefs = dict(BUILTIN_TYPEDEFS)
        self.structs: dict[str, list] = {}  # tag -> list of Field
        self._layouts: dict[str, tuple] = {}

    def resolve(self, t):
        seen = 0
        while isinstance(t, Base) and t.name in self.typedefs and seen < 64:
            nxt = self.typedefs[t.name]
            const = t.const
            t = nxt
            if const and not getattr(t, "const", False):
                t = _with_const(t)
            seen += 1
        return t

    def is_integer(self, t) -> bool:
        t = self.resolve(t)
        return isinstance(t, Base) and t.name in INTEGER_TYPES

    def is_void(self, t) -> bool:
        t = self.resolve(t)
        return isinstance(t, Base) and t.name == "void"

    def int_props(self, t) -> tuple[int, bool]:
        t = self.resolve(t)
        if isinstance(t, Base) and t.name in INTEGER_TYPES:
            return INTEGER_TYPES[t.name]
        return 4, True

    def is_scalar(self, t) -> bool:
        t = self.resolve(t)
        return self.is_integer(t) or isinstance(t, Pointer)

    def sizeof(self, t, const_eval=None) -> int:
        t = self.resolve(t)
        if isinstance(t, Pointer):
            return POINTER_SIZE
        if isinstance(t, Base):
            if t.name in INTEGER_TYPES:
                return INTEGER_TYPES[t.name][0]
            if t.name == "void":
                return 1
            raise TypeError(f"unknown type '{t.name}'")
        if isinstance(t, Array):
            if t.size is None:
                return 0
            n = const_eval(t.size) if const_eval else None
            if n is None:
                raise TypeError("array size is not a constant")
            return n * self.sizeof(t.elem, const_eval)
        if isinstance(t, StructRef):
            return self.struct_layout(t.tag, const_eval)[1]
        raise TypeError(f"cannot size {t!r}")

    def alignof(self, t, const_eval=None) -> int:
        t = self.resolve(t)
        if isinstance(t, Array):
            return self.alignof(t.elem, const_eval)
        if isinstance(t, StructRef):
            return self.struct_layout(t.tag, const_eval)[2]
        return max(1, min(self.sizeof(t, const_eval), 4))

    def struct_layout(self, tag: str, const_eval=None):
        """Returns ({field: offset}, size, align)."""
        if tag in self._layouts:
            return self._layouts[tag]
        if tag not in self.structs:
            raise TypeError(f"incomplete type 'struct {tag}'")
        offsets = {}
        off = 0
        align = 1
        for f in self.structs[tag]:
            a = self.alignof(f.type, const_eval)
            off = (off + a - 1) // a * a
            offsets[f.name] = off
            off += self.sizeof(f.type, const_eval)
            align = max(align, a)
        size = max(1, (off + align - 1) // align * align)
        self._layouts[tag] = (offsets, size, align)
        return self._layouts[tag]

    def field(self, tag: str, name: str):
        for f in self.structs.get(tag, []):
            if f.name == name:
                return f
        return None


def _with_const(t):
    from .nodes import clone
    c = clone(t)
    c.const = True
    return c


def same_type(env: TypeEnv, a, b, ignore_const: bool = True) -> bool:
    a = env.resolve(a)
    b = env.resolve(b)
    if type(a) is not type(b):
        return False
    if isinstance(a, Base):
        return a.name == b.name
    if isinstance(a, StructRef):
        return a.tag == b.tag
    if isinstance(a, Pointer):
        return a.kind is b.kind and same_type(env, a.pointee, b.pointee)
    if isinstance(a, Array):
        return same_type(env, a.elem, b.elem)
    return False


def lower_type(t):
    """Checked pointer kinds become plain ``T *`` (recursively)."""
    from .nodes import clone
    if isinstance(t, Pointer):
        return Pointer(PtrKind.PLAIN, lower_type(t.pointee), t.const)
    if isinstance(t, Array):
        return Array(lower_type(t.elem), clone(t.size))
    return clone(t)
