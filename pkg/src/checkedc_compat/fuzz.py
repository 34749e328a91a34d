"""Seeded generator of small annotated programs for differential testing.

Programs are assembled from templates with randomized sizes, indices and
bounds, then kept only if they parse and pass sema. A small fraction of
checked accesses and bindings are steered just past their bounds, so
about half of the programs violate spatial safety at run time. Unchecked
code only ever touches memory in range.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .diagnostics import CompileError
from .nodes import SourceUnit
from .parser import parse_source
from .sema import analyze


@dataclass
class Generated:
    seed: int
    source: str
    unit: SourceUnit


HELPERS = {
    "rd": "int rd(_Array_ptr<int> b : count(n), int n, int i) _Checked {\n"
          "  return b[i] * {k} + {c};\n}\n",
    "wr": "void wr(_Array_ptr<int> b : count(n), int n, int i, int v) _Checked {\n"
          "  b[i] = v;\n}\n",
    "sum": "int sum(_Array_ptr<int> b : count(n), int n, int lim) _Checked {\n"
           "  int s = 0;\n"
           "  for (int k = 0; k < lim; k++) {\n    s += b[k];\n  }\n"
           "  return s;\n}\n",
    "span": "int span(_Array_ptr<int> lo : bounds(lo, hi), _Array_ptr<int> hi, int i) _Checked {\n"
            "  return *(lo + i);\n}\n",
    "bget": "int bget(_Array_ptr<char> p : byte_count(m), int m, int i) _Checked {\n"
            "  return p[i];\n}\n",
    "ntput": "void ntput(_Nt_array_ptr<char> s : count(n), int n, int i, char c) _Checked {\n"
             "  s[i] = c;\n}\n",
    "ntget": "int ntget(_Nt_array_ptr<char> s : count(n), int n, int i) _Checked {\n"
             "  return s[i];\n}\n",
    "get": "int get(int *b : count(n), int n, int i) {\n"
           "  if (i >= 0 && i < n) {\n    return b[i];\n  }\n  return -1;\n}\n",
    "deref": "int deref(int *q : itype(_Ptr<int>)) {\n  return *q + 1;\n}\n",
    "bump": "void bump(_Ptr<int> q, int d) _Checked {\n  *q += d;\n}\n",
    "first": "_Array_ptr<int> first(_Array_ptr<int> b : count(n), int n) : count(n) _Checked {\n"
             "  return b;\n}\n",
}

STRUCT = "struct vec {\n  _Array_ptr<int> d : count(n);\n  int n;\n};\n"


class ProgramGen:
    """Builds one program per call from a ``random.Random``."""

    def __init__(self, rng: random.Random):
        self.r = rng
        self.lines: list[str] = []
        self.arrays: dict[str, int] = {}  # int arrays
        self.chars: dict[str, int] = {}  # char arrays holding a string
        self.ints: list[str] = []
        self.nvars = 0
        self.helpers: set[str] = set()

    def fresh(self, stem: str) -> str:
        self.nvars += 1
        return f"{stem}{self.nvars}"

    def index(self, n: int) -> int:
        """An index into n elements; just outside them about one time in ten."""
        if self.r.random() < 0.1:
            return self.r.choice([-1, n, n + 1])
        return self.r.randrange(n)

    def count(self, n: int) -> int:
        """A claimed element count for an n-element object, sometimes too large."""
        if self.r.random() < 0.08:
            return n + self.r.choice([1, 2])
        return self.r.randint(1, n)

    def small(self) -> str:
        if self.ints and self.r.random() < 0.4:
            return self.r.choice(self.ints)
        return str(self.r.randint(-9, 30))

    def dyn(self, value: int) -> str:
        """Hide a constant behind a local so it is only known at run time."""
        if self.r.random() < 0.5:
            return str(value)
        name = self.fresh("v")
        self.emit(f"int {name} = {value};")
        return name

    def emit(self, line: str):
        self.lines.append("  " + line)

    def use(self, helper: str) -> str:
        self.helpers.add(helper)
        return helper

    # -- statement templates ------------------------------------------------------------

    def decl_array(self):
        n = self.r.randint(1, 6)
        name = self.fresh("a")
        init = ", ".join(str(self.r.randint(-20, 50)) for _ in range(n))
        self.emit(f"int {name}[{n}] = {{{init}}};")
        self.arrays[name] = n

    def decl_string(self):
        n = self.r.randint(2, 6)
        name = self.fresh("s")
        text = "".join(self.r.choice("abcdefxyz") for _ in range(n - 1))
        self.emit(f'char {name}[{n}] = "{text}";')
        self.chars[name] = n

    def decl_int(self):
        name = self.fresh("x")
        self.emit(f"int {name} = {self.small()};")
        self.ints.append(name)

    def arr(self):
        name = self.r.choice(sorted(self.arrays))
        return name, self.arrays[name]

    def s_index_read(self):
        a, n = self.arr()
        self.emit(f"print_int({a}[{self.dyn(self.index(n))}]);")

    def s_index_write(self):
        a, n = self.arr()
        self.emit(f"{a}[{self.dyn(self.index(n))}] = {self.small()};")

    def s_compound(self):
        a, n = self.arr()
        op = self.r.choice(["+=", "-=", "*=", "^="])
        self.emit(f"{a}[{self.index(n)}] {op} {self.r.randint(1, 5)};")

    def s_ptr_view(self):
        a, n = self.arr()
        off = self.r.randrange(n)
        cnt = self.count(n - off)
        p = self.fresh("p")
        self.emit(f"_Array_ptr<int> {p} : count({self.dyn(cnt)}) = {a} + {off};")
        i = self.index(cnt)
        if self.r.random() < 0.5:
            self.emit(f"print_int({p}[{i}]);")
        else:
            self.emit(f"*({p} + {i}) = {self.small()};")

    def s_range(self):
        a, n = self.arr()
        hi = self.count(n)
        p = self.fresh("r")
        self.emit(f"_Array_ptr<int> {p} : bounds({a}, {a} + {hi}) = {a};")
        self.emit(f"print_int({p}[{self.dyn(self.index(hi))}]);")

    def s_ptr(self):
        x = self.fresh("x")
        self.emit(f"int {x} = {self.small()};")
        q = self.fresh("q")
        self.emit(f"_Ptr<int> {q} = &{x};")
        if self.r.random() < 0.5:
            self.emit(f"{self.use('bump')}({q}, {self.r.randint(1, 9)});")
        else:
            self.emit(f"*{q} = *{q} * 2 + 1;")
        self.emit(f"print_int({x});")

    def s_call_rd(self):
        a, n = self.arr()
        cnt = self.count(n)
        self.emit(f"print_int({self.use('rd')}({a}, {self.dyn(cnt)}, {self.dyn(self.index(cnt))}));")

    def s_call_wr(self):
        a, n = self.arr()
        cnt = self.count(n)
        self.emit(f"{self.use('wr')}({a}, {self.dyn(cnt)}, {self.index(cnt)}, {self.small()});")

    def s_call_sum(self):
        a, n = self.arr()
        cnt = self.count(n)
        lim = cnt + 1 if self.r.random() < 0.15 else self.r.randint(0, cnt)
        self.emit(f"print_int({self.use('sum')}({a}, {cnt}, {self.dyn(lim)}));")

    def s_call_span(self):
        a, n = self.arr()
        hi = self.count(n)
        self.emit(f"print_int({self.use('span')}({a}, {a} + {hi}, {self.index(hi)}));")

    def s_call_get(self):
        a, n = self.arr()
        cnt = self.count(n)
        self.emit(f"print_int({self.use('get')}({a}, {cnt}, {self.r.randrange(cnt)}));")

    def s_call_deref(self):
        if self.r.random() < 0.2:
            self.emit(f"print_int({self.use('deref')}(0));")
            return
        x = self.fresh("x")
        self.emit(f"int {x} = {self.small()};")
        self.emit(f"print_int({self.use('deref')}(&{x}));")

    def s_call_bget(self):
        a = self.r.choice(sorted(self.chars))
        m = self.count(self.chars[a])
        self.emit(f"print_int({self.use('bget')}({a}, {self.dyn(m)}, {self.index(m)}));")

    def s_first(self):
        a, n = self.arr()
        cnt = self.count(n)
        p = self.fresh("f")
        self.emit(f"_Array_ptr<int> {p} : count({cnt}) = {self.use('first')}({a}, {cnt});")
        self.emit(f"print_int({p}[{self.index(cnt)}]);")

    def s_nt(self):
        s = self.r.choice(sorted(self.chars))
        n = self.chars[s]
        cnt = self.r.randint(0, n - 1) if self.r.random() < 0.85 else n
        i = self.index(cnt + 1)
        if self.r.random() < 0.5:
            self.emit(f"print_int({self.use('ntget')}({s}, {cnt}, {self.dyn(i)}));")
        else:
            c = 0 if self.r.random() < 0.3 else self.r.randint(65, 90)
            self.emit(f"{self.use('ntput')}({s}, {cnt}, {i}, {c});")
            self.emit(f"print_int({s}[0]);")

    def s_struct(self):
        a, n = self.arr()
        v = self.fresh("w")
        cnt = self.count(n)
        # set up in unchecked code, which must leave the bounds invariant intact
        cnt = min(cnt, n)
        self.emit(f"struct vec {v};")
        self.emit(f"_Unchecked {{ {v}.n = {cnt}; {v}.d = {a}; }}")
        self.emit(f"print_int({v}.d[{self.index(cnt)}]);")
        self.helpers.add("struct")

    def s_loop(self):
        a, n = self.arr()
        lim = n + 1 if self.r.random() < 0.1 else n
        k = self.fresh("k")
        self.emit(f"for (int {k} = 0; {k} < {lim}; {k}++) {{")
        self.emit(f"  {a}[{k}] = {a}[{k}] + {k} * {self.r.randint(1, 4)};")
        self.emit("}")

    def s_if(self):
        x = self.small()
        a, n = self.arr()
        self.emit(f"if ({x} > {self.r.randint(0, 20)}) {{")
        self.emit(f"  print_int({a}[{self.index(n)}]);")
        self.emit("} else {")
        self.emit(f"  {a}[{self.r.randrange(n)}] = {x};")
        self.emit("}")

    STATEMENTS = [
        (s_index_read, 3), (s_index_write, 3), (s_compound, 1), (s_ptr_view, 3), (s_range, 2),
        (s_ptr, 2), (s_call_rd, 3), (s_call_wr, 2), (s_call_sum, 2), (s_call_span, 1),
        (s_call_get, 2), (s_call_deref, 1), (s_call_bget, 1), (s_first, 1), (s_nt, 2),
        (s_struct, 2), (s_loop, 2), (s_if, 2),
    ]

    def build(self, checked_fraction: float = 0.2) -> str:
        for _ in range(self.r.randint(1, 3)):
            self.decl_array()
        for _ in range(self.r.randint(1, 2)):
            self.decl_string()
        for _ in range(self.r.randint(0, 2)):
            self.decl_int()
        fns, weights = zip(*self.STATEMENTS)
        for _ in range(self.r.randint(2, 7)):
            self.r.choices(fns, weights)[0](self)
        a, n = self.arr()
        self.emit(f"return {a}[{self.r.randrange(n)}] + {self.small()};")
        parts = []
        if "struct" in self.helpers:
            parts.append(STRUCT)
        for name, text in HELPERS.items():
            if name in self.helpers:
                parts.append(text.replace("{k}", str(self.r.randint(1, 3)))
                             .replace("{c}", str(self.r.randint(0, 9))))
        parts.append("int main(void) _Checked {\n" + "\n".join(self.lines) + "\n}\n")
        return "\n".join(parts)


def accepted(source: str) -> SourceUnit | None:
    try:
        unit = parse_source(source)
    except CompileError:
        return None
    return unit if analyze(unit).ok else None


def gen_programs(count: int, seed: int = 0) -> list[Generated]:
    """``count`` sema-clean programs with ``int main(void)``; deterministic in ``seed``."""
    out: list[Generated] = []
    k = 0
    while len(out) < count:
        s = seed * 1_000_003 + k
        k += 1
        src = ProgramGen(random.Random(s)).build()
        unit = accepted(src)
        if unit is not None:
            out.append(Generated(s, src, unit))
        if k > count * 20:
            raise RuntimeError("generator rejected too many programs")
    return out


# -- declaration-heavy units for the textual round trips -----------------------------------

SCALARS = ["int", "char", "unsigned int", "long", "size_t", "short", "unsigned char"]


class UnitGen:
    """Random prototypes, structs and globals covering every annotation form."""

    def __init__(self, rng: random.Random):
        self.r = rng
        self.n = 0

    def name(self, stem):
        self.n += 1
        return f"{stem}{self.n}"

    def scalar(self):
        return self.r.choice(SCALARS)

    def param(self, idx, sizes):
        r = self.r.random()
        t = self.scalar()
        nm = f"p{idx}"
        if r < 0.2 or not sizes:
            return f"{t} {nm}"
        n = self.r.choice(sizes)
        forms = [
            f"_Array_ptr<{t}> {nm} : count({n})",
            f"_Array_ptr<{t}> {nm} : byte_count({n} * 2)",
            f"_Nt_array_ptr<char> {nm} : count({n})",
            f"_Nt_array_ptr<char> {nm}",
            f"_Ptr<{t}> {nm}",
            f"_Ptr<_Ptr<{t}>> {nm}",
            f"{t} *{nm} : count({n})",
            f"void *{nm} : byte_count({n})",
            f"{t} *{nm} : itype(_Ptr<{t}>)",
            f"struct __FILE *{nm} : itype(_Ptr<struct __FILE>)",
            f"_Array_ptr<{t}> {nm} : bounds({nm}, {nm} + {n})",
        ]
        return self.r.choice(forms)

    def prototype(self):
        k = self.r.randint(0, 4)
        sizes = [f"n{j}" for j in range(self.r.randint(0, 2))]
        params = [f"int {s}" for s in sizes]
        params += [self.param(j, sizes) for j in range(k)]
        self.r.shuffle(params)
        ret = self.r.choice(["int", "void", "size_t", "_Ptr<int>", "char *: itype(_Ptr<char>)"])
        name = self.name("fn")
        plist = ", ".join(params) or "void"
        if ret.startswith("char *"):
            return f"char *{name}({plist}) : itype(_Ptr<char>);"
        return f"{ret} {name}({plist});"

    def struct(self):
        tag = self.name("rec")
        fields = ["int len;"]
        fields.append(self.r.choice([
            "_Array_ptr<int> data : count(len);",
            "_Nt_array_ptr<char> name : count(len);",
            "int *raw : count(len);",
            "_Ptr<int> one;",
            "char *tag : itype(_Nt_array_ptr<char>);",
        ]))
        self.r.shuffle(fields)
        return f"struct {tag} {{\n  " + "\n  ".join(fields) + "\n};"

    def function(self):
        name = self.name("body")
        scope = self.r.choice(["_Checked ", "", "_Unchecked "])
        inner = self.r.choice([
            "int s = 0;\n  for (int i = 0; i < n; i++) {\n    s += b[i];\n  }\n  return s;",
            "if (n > 0) {\n    return b[n - 1];\n  }\n  return 0;",
            "_Checked {\n    _Array_ptr<int> q : count(n) = b;\n    return n ? q[0] : 0;\n  }",
            "_Unchecked {\n    int *r = (int *)b;\n    return n ? r[0] : 0;\n  }",
        ])
        if scope.startswith("_Unchecked") and inner.startswith("_Unchecked"):
            scope = ""
        return f"int {name}(_Array_ptr<int> b : count(n), int n) {scope}{{\n  {inner}\n}}"

    def glob(self):
        name = self.name("g")
        return self.r.choice([
            f"int {name}[{self.r.randint(1, 9)}];",
            f"_Ptr<int> {name} = 0;",
            f"_Array_ptr<char> {name} : count(0) = 0;",
            f"static int {name} = {self.r.randint(0, 99)};",
        ])

    def guarded(self):
        return ("#ifdef USE_CHECKEDC\n" + self.prototype() + "\n#else\n"
                + f"int legacy{self.r.randint(0, 99)}(int *p, int n);" + "\n#endif")

    def build(self) -> str:
        makers = [self.prototype] * 4 + [self.struct, self.function, self.glob, self.guarded]
        items = [self.r.choice(makers)() for _ in range(self.r.randint(2, 8))]
        head = ["#pragma CHECKED_SCOPE ON"] if self.r.random() < 0.1 else []
        return "\n".join(head + items) + "\n"


def gen_units(count: int, seed: int = 0, programs: bool = True) -> list[Generated]:
    """Annotated units: mixed declaration units, plus every other one a runnable program."""
    out: list[Generated] = []
    k = 0
    while len(out) < count:
        s = seed * 1_000_003 + k
        k += 1
        rng = random.Random(s)
        if programs and k % 2 == 0:
            src = ProgramGen(rng).build()
        else:
            src = UnitGen(rng).build()
        unit = accepted(src)
        if unit is not None:
            out.append(Generated(s, src, unit))
        if k > count * 20:
            raise RuntimeError("generator rejected too many units")
    return out
