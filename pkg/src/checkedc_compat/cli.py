"""``checkedc-compat`` command line."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import GRAMMAR_VERSION, __version__
from .bench import BenchError, SizeReport, ToolchainConfig, load_fixture, render_report, run_bench
from .diagnostics import CompileError, InternalError
from .emitters import emit_macro, emit_strip, expand_macros, gen_compat_header
from .ifacegen import generate_stubs
from .instrument import instrument_unit
from .oracle import DEFAULT_FUEL, OracleError, execute
from .parser import parse_source
from .sema import analyze

EXIT_OK, EXIT_TOOL, EXIT_TRAP, EXIT_VIOLATION, EXIT_FUEL, EXIT_USAGE = 0, 1, 2, 3, 4, 64
OUTCOME_EXIT = {"normal": EXIT_OK, "trap": EXIT_TRAP, "violation": EXIT_VIOLATION, "fuel": EXIT_FUEL}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="checkedc-compat", description="Check, convert and instrument bounds-annotated C.")
    p.add_argument("--version", action="version",
                   version=f"checkedc-compat {__version__} (dialect grammar {GRAMMAR_VERSION})")
    sub = p.add_subparsers(dest="command", metavar="command", parser_class=_Parser)
    sub.required = True

    def cmd(name, help_text, inputs=1):
        sp = sub.add_parser(name, help=help_text, description=help_text)
        if inputs == 1:
            sp.add_argument("input", help="source file")
        sp.add_argument("--out", help="output path (default: standard output)")
        return sp

    cmd("check", "run the checker; exit 0 iff there are no errors")
    cmd("strip", "emit legacy C with all annotations erased")
    cmd("macro", "emit the macro-compatible spelling")
    cmd("gen-header", "emit the compat header", inputs=0)
    sp = cmd("instrument", "emit C with run-time bounds checks")
    sp.add_argument("--sites", help="check-site map path (default: <out>.sites when --out is given)")
    sp = cmd("expand", "expand the compat macro family")
    g = sp.add_mutually_exclusive_group(required=True)
    g.add_argument("--checked", dest="checked", action="store_true", help="USE_CHECKEDC defined")
    g.add_argument("--legacy", dest="checked", action="store_false", help="USE_CHECKEDC undefined")
    sp = cmd("stubs", "annotate the prototypes of a legacy header")
    sp.add_argument("--review", help="review file path (default: <name>.stubs.txt)")
    sp = cmd("run", "execute a function and print its outcome")
    sp.add_argument("--mode", choices=["oracle", "literal"], default="oracle")
    sp.add_argument("--entry", default="main")
    sp.add_argument("--fuel", type=int, default=DEFAULT_FUEL)
    sp.add_argument("--arg", type=int, action="append", default=[], help="integer argument (repeatable)")
    sp = cmd("bench", "measure size overhead and print a report", inputs=0)
    sp.add_argument("modules", nargs="*", help="module sources to measure")
    sp.add_argument("--config", help="toolchain config (default: source-bytes fallback)")
    sp.add_argument("--fixture", help="CSV of module,lc_bytes,cc_bytes rows to include")
    sp.add_argument("--format", choices=["table", "csv"], default="table")
    sp.add_argument("--jobs", type=int, default=4)
    return p


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _write(text: str | bytes, out: str | None):
    if isinstance(text, str):
        text = text.encode()
    if out is None:
        sys.stdout.buffer.write(text)
        sys.stdout.flush()
    else:
        Path(out).write_bytes(text)


def _report(diags, name, source):
    for d in diags:
        print(d.format(name, source), file=sys.stderr)


def dispatch(args) -> int:
    c = args.command
    if c == "gen-header":
        _write(gen_compat_header(), args.out)
        return EXIT_OK
    if c == "bench":
        return _bench(args)
    source = _read(args.input)
    name = args.input
    if c == "expand":
        _write(expand_macros(source, args.checked), args.out)
        return EXIT_OK
    unit = parse_source(source, name)
    if c == "check":
        a = analyze(unit)
        _report(a.diagnostics, name, source)
        return EXIT_OK if a.ok else EXIT_TOOL
    if c == "strip":
        _write(emit_strip(unit), args.out)
    elif c == "macro":
        _write(emit_macro(unit), args.out)
    elif c == "instrument":
        a = analyze(unit)
        _report([d for d in a.diagnostics if not d.is_error], name, source)
        ins = instrument_unit(unit)
        _write(ins.code, args.out)
        sites = args.sites or (args.out + ".sites" if args.out else None)
        if sites:
            Path(sites).write_text(ins.site_map(source))
    elif c == "stubs":
        result = generate_stubs(unit)
        _write(result.code, args.out)
        review = args.review
        if review is None:
            folder = Path(args.out).parent if args.out else Path(".")
            review = folder / f"{Path(args.input).stem}.stubs.txt"
        Path(review).write_text(result.review())
    elif c == "run":
        outcome = execute(unit, args.entry, args.arg, args.mode, args.fuel)
        for v in outcome.log:
            print(v)
        print(outcome.line())
        return OUTCOME_EXIT[outcome.kind]
    return EXIT_OK


def _bench(args) -> int:
    config = ToolchainConfig.load(args.config) if args.config else None
    report = load_fixture(args.fixture) if args.fixture else SizeReport()
    if args.modules:
        for p in args.modules:
            if not Path(p).is_file():
                raise UsageError(f"cannot read {p}")
        measured = run_bench(args.modules, config, args.jobs)
        report.rows += measured.rows
        report.query = measured.query
    _write(render_report(report, args.format), args.out)
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return dispatch(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"checkedc-compat: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CompileError as exc:
        name = getattr(args, "input", "<input>")
        src = Path(name).read_text() if name and Path(name).is_file() else None
        _report(exc.diagnostics, name, src)
        return EXIT_TOOL
    except (BenchError, OracleError, InternalError, ValueError) as exc:
        print(f"checkedc-compat: {exc}", file=sys.stderr)
        return EXIT_TOOL


if __name__ == "__main__":
    sys.exit(main())
