"""Bounds-annotated C: checking, macro-compatible emission, instrumentation and tooling."""

from __future__ import annotations

from .bench import SizeReport, SizeRow, compute_overhead, measure_module, render_report
from .diagnostics import CompileError, Diagnostic
from .emitters import emit_macro, emit_native, emit_strip, expand_macros, gen_compat_header
from .ifacegen import generate_stubs
from .instrument import instrument_unit
from .oracle import ExecOutcome, execute
from .parser import parse_source
from .printer import render
from .sema import analyze, check_unit, resolve_bounds

__version__ = "0.1.0"
GRAMMAR_VERSION = "1"

__all__ = [
    "CompileError", "Diagnostic", "ExecOutcome", "SizeReport", "SizeRow", "analyze", "check_unit",
    "compute_overhead", "emit_macro", "emit_native", "emit_strip", "execute", "expand_macros",
    "gen_compat_header", "generate_stubs", "instrument_unit", "measure_module", "parse_source",
    "render", "render_report", "resolve_bounds",
]
