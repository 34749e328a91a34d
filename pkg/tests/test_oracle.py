from __future__ import annotations

import pytest

from checkedc_compat.diagnostics import CompileError
from checkedc_compat.oracle import ExecOutcome, OracleError, execute
from checkedc_compat.parser import parse_source


def run(src, entry="main", args=(), mode="oracle", fuel=1_000_000):
    return execute(parse_source(src), entry, args, mode, fuel)


def test_arithmetic():
    out = run("int main(void) { return 2 + 3; }")
    assert out.line() == "NORMAL 5"


READ = """int get(_Array_ptr<int> b : count(len), int len) _Checked {
  return b[len];
}
int main(void) _Checked {
  int a[3] = {1, 2, 3};
  return get(a, 3);
}"""


def test_read_past_count_is_violation():
    out = run(READ)
    assert out.kind == "violation"
    assert out.offset == 3
    assert out.access == "read"
    assert out.line() == f"VIOLATION {out.obj}:3"


@pytest.mark.parametrize("expr,value", [
    ("-7 / 2", -3),
    ("-7 % 2", -1),
    ("2147483647 + 1", -2147483648),
    ("(unsigned int)0 - 1 > 0", 1),
    ("(char)200", -56),
    ("1 << 31", -2147483648),
])
def test_integer_semantics(expr, value):
    assert run(f"int main(void) {{ return {expr}; }}").value == value


def test_print_log_and_determinism():
    src = "int main(void) { for (int i = 0; i < 3; i++) { print_int(i * i); } return 0; }"
    a, b = run(src), run(src)
    assert a.log == [0, 1, 4]
    assert a == b and a.steps == b.steps


def test_fuel_exhaustion():
    out = run("int main(void) { while (1) { } return 0; }", fuel=500)
    assert out.kind == "fuel"
    assert out.steps == 501


def test_unknown_external_is_an_error():
    with pytest.raises(OracleError):
        run("int ext(int x);\nint main(void) { return ext(1); }")


def test_oracle_mode_requires_accepted_unit():
    with pytest.raises(CompileError):
        run("int f(_Ptr<int> p) _Checked { return *(p + 1); }\nint main(void) { return 0; }")


def test_literal_mode_turns_trap_calls_into_traps():
    out = run("void __checked_trap(int id);\nint main(void) { __checked_trap(7); return 0; }", mode="literal")
    assert out.line() == "TRAP 7"


NT = """int main(int v) _Checked {
  char buf[4] = "abc";
  _Nt_array_ptr<char> s : count(3) = buf;
  s[3] = v;
  return s[3];
}"""


@pytest.mark.parametrize("v,kind", [(0, "normal"), (1, "violation"), (120, "violation")])
def test_terminator_rule(v, kind):
    out = run(NT, args=[v])
    assert out.kind == kind


def test_nt_read_at_hi_allowed():
    src = 'int main(void) _Checked { _Nt_array_ptr<char> s : count(0) = "x"; return s[0]; }'
    assert run(src).value == ord("x")


def test_inter_object_comparison_is_violation():
    src = """int main(void) _Checked {
  int a[2];
  int b[2];
  _Array_ptr<int> p : count(2) = a;
  _Array_ptr<int> q : count(2) = b;
  return p < q;
}"""
    assert run(src).kind == "violation"


def test_unchecked_out_of_bounds_is_caught_by_safety_net():
    src = "int get(int *p, int i) { return p[i]; }\nint main(void) { int a[2] = {1, 2}; return get(a, 2); }"
    out = run(src)
    assert out.kind == "violation" and out.checked is False


def test_dangling_local_is_violation():
    src = """int *leak(void) {
  int x = 1;
  return &x;
}
int main(void) {
  int *p = leak();
  return *p;
}"""
    assert run(src).kind == "violation"


def test_struct_copy_and_members():
    src = """struct pt { int x; int y; };
int main(void) {
  struct pt a = {3, 4};
  struct pt b;
  b = a;
  b.y += 10;
  return a.y * 100 + b.y;
}"""
    assert run(src).value == 414


def test_pointer_stored_in_memory_round_trips():
    src = """int main(void) _Checked {
  int a[3] = {7, 8, 9};
  _Array_ptr<int> ps[2] = {0, 0};
  ps[1] = a;
  _Array_ptr<int> p : count(3) = a;
  return p[2];
}"""
    assert run(src).value == 9


def test_outcome_line_formats():
    assert ExecOutcome("trap", trap_id=3).line() == "TRAP 3"
    assert ExecOutcome("violation", obj=2, offset=5).line() == "VIOLATION 2:5"
