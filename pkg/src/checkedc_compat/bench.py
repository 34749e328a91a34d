"""Executable-size overhead of instrumentation, per module.

LC is the size of a module's stripped (legacy) emission, CC the size of
its instrumented emission. Sizes come from an external toolchain
described by a small ``key = value`` config, or, without one, from the
length of the normalized emitted source.
"""

from __future__ import annotations

import csv
import io
import shlex
import subprocess
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .diagnostics import CompileError
from .emitters import emit_strip
from .instrument import instrument_unit
from .lexer import significant
from .parser import parse_source
from .sema import analyze

CSV_COLUMNS = ["module", "lc_bytes", "cc_bytes", "es_percent", "method"]
TABLE_HEADER = ["Module", "LC (B)", "CC (B)", "ES (%)", "Method"]
TOTAL = "Total"


class BenchError(Exception):
    """A measurement could not be taken; the message carries any captured tool output."""


def compute_overhead(lc: int, cc: int) -> int:
    """Percent increase from lc to cc, rounded to nearest with ties away from zero."""
    if lc <= 0:
        raise ValueError("LC must be positive")
    x = Fraction(100 * (cc - lc), lc)
    mag = int(abs(x) + Fraction(1, 2))
    return mag if x >= 0 else -mag


@dataclass
class SizeRow:
    module: str
    lc: int
    cc: int
    method: str = "fixture"

    @property
    def es(self) -> int:
        return compute_overhead(self.lc, self.cc)


@dataclass
class SizeReport:
    rows: list = field(default_factory=list)
    query: str = ""  # the size query used, for the record

    @property
    def total(self) -> SizeRow:
        lc = sum(r.lc for r in self.rows)
        cc = sum(r.cc for r in self.rows)
        return SizeRow(TOTAL, lc, cc, "total")

    @property
    def total_es(self) -> int:
        t = self.total
        return t.es if t.lc else 0

    def __eq__(self, other):
        return isinstance(other, SizeReport) and self.rows == other.rows


# -- rendering and parsing -------------------------------------------------------------


def _cells(report: SizeReport) -> list[list[str]]:
    rows = [[r.module, str(r.lc), str(r.cc), str(r.es), r.method] for r in report.rows]
    t = report.total
    rows.append([TOTAL, str(t.lc), str(t.cc), str(report.total_es), "total"])
    return rows


def render_report(report: SizeReport, fmt: str = "table") -> bytes:
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        w.writerows(_cells(report))
        return buf.getvalue().encode()
    if fmt != "table":
        raise ValueError(f"unknown report format {fmt!r}")
    rows = [TABLE_HEADER] + _cells(report)
    widths = [max(len(r[k]) for r in rows) for k in range(len(TABLE_HEADER))]
    lines = []
    for r in rows:
        cells = [r[0].ljust(widths[0])] + [c.rjust(w) for c, w in zip(r[1:4], widths[1:4])]
        cells.append(r[4].ljust(widths[4]))
        lines.append("  ".join(cells).rstrip())
    if report.query:
        lines.append(f"# size query: {report.query}")
    return ("\n".join(lines) + "\n").encode()


def _from_cells(cells: list[list[str]]) -> SizeReport:
    rows = []
    for module, lc, cc, es, method in cells:
        if module == TOTAL and method == "total":
            continue
        row = SizeRow(module, int(lc), int(cc), method)
        if row.es != int(es):
            raise ValueError(f"ES for {module} is {es}, expected {row.es}")
        rows.append(row)
    return SizeReport(rows)


def parse_report(data: bytes | str, fmt: str = "table") -> SizeReport:
    """Inverse of :func:`render_report` (the size-query note is not restored)."""
    text = data.decode() if isinstance(data, bytes) else data
    if fmt == "csv":
        r = list(csv.reader(io.StringIO(text)))
        if r[0] != CSV_COLUMNS:
            raise ValueError("unexpected CSV header")
        return _from_cells(r[1:])
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    cells = []
    for ln in lines[1:]:
        # the module name may contain spaces; the four other columns cannot
        head, *rest = ln.rsplit(None, 4)
        cells.append([head.strip()] + rest)
    return _from_cells(cells)


def load_fixture(path: str | Path) -> SizeReport:
    """Rows of ``module,lc_bytes,cc_bytes`` (extra columns ignored)."""
    rows = []
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            if rec["module"] == TOTAL:
                continue
            rows.append(SizeRow(rec["module"], int(rec["lc_bytes"]), int(rec["cc_bytes"]),
                                rec.get("method") or "fixture"))
    return SizeReport(rows)


# -- measurement ------------------------------------------------------------------------------


@dataclass
class ToolchainConfig:
    compile_cmd: str
    size_cmd: str
    workdir: str | None = None

    @classmethod
    def parse(cls, text: str) -> "ToolchainConfig":
        values = {}
        for n, line in enumerate(text.splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ValueError(f"line {n}: expected 'key = value'")
            values[key.strip()] = value.strip()
        unknown = set(values) - {"compile_cmd", "size_cmd", "workdir"}
        if unknown:
            raise ValueError(f"unknown config key(s): {', '.join(sorted(unknown))}")
        for key in ("compile_cmd", "size_cmd"):
            if key not in values:
                raise ValueError(f"missing config key '{key}'")
        return cls(values["compile_cmd"], values["size_cmd"], values.get("workdir"))

    @classmethod
    def load(cls, path: str | Path) -> "ToolchainConfig":
        return cls.parse(Path(path).read_text())


def text_size(output: str) -> int:
    """The text-section size in the output of ``size -A``, ``size`` (Berkeley) or a bare number."""
    lines = [ln.split() for ln in output.splitlines() if ln.strip()]
    for parts in lines:
        if parts[0] == ".text" and len(parts) > 1 and parts[1].isdigit():
            return int(parts[1])
    for k, parts in enumerate(lines[:-1]):
        if parts and parts[0] == "text" and lines[k + 1] and lines[k + 1][0].isdigit():
            return int(lines[k + 1][0])
    if len(lines) == 1 and len(lines[0]) == 1 and lines[0][0].isdigit():
        return int(lines[0][0])
    raise BenchError(f"no text section in size output:\n{output}")


def _run(template: str, src: Path, out: Path, cwd: Path) -> str:
    cmd = [a.replace("{in}", str(src)).replace("{out}", str(out)) for a in shlex.split(template)]
    try:
        proc = subprocess.run(cmd, cwd=cwd, capture_output=True, text=True)
    except OSError as exc:
        raise BenchError(f"cannot run {cmd[0]}: {exc}") from None
    if proc.returncode != 0:
        raise BenchError(f"command failed ({proc.returncode}): {' '.join(cmd)}\n{proc.stdout}{proc.stderr}")
    return proc.stdout


def toolchain_size(code: str, name: str, cfg: ToolchainConfig) -> int:
    with tempfile.TemporaryDirectory(prefix=f"bench-{name}-", dir=cfg.workdir) as d:
        d = Path(d)
        src, obj = d / f"{name}.c", d / f"{name}.o"
        src.write_text(code)
        _run(cfg.compile_cmd, src, obj, d)
        return text_size(_run(cfg.size_cmd, obj, obj, d))


def source_bytes(code: str) -> int:
    """Length of ``code`` with comments dropped and whitespace collapsed."""
    return len(" ".join(significant(code)).encode())


def emissions(source: str, name: str = "<module>") -> tuple[str, str]:
    """(stripped, instrumented) C for one module."""
    unit = parse_source(source, name)
    a = analyze(unit)
    if not a.ok:
        raise CompileError(a.errors)
    return emit_strip(unit), instrument_unit(unit).code


def measure_module(source: str, name: str, config: ToolchainConfig | None = None) -> SizeRow:
    legacy, checked = emissions(source, name)
    if config is None:
        return SizeRow(name, source_bytes(legacy), source_bytes(checked), "source-bytes")
    lc = toolchain_size(legacy, f"{name}.lc", config)
    cc = toolchain_size(checked, f"{name}.cc", config)
    return SizeRow(name, lc, cc, "toolchain")


def run_bench(paths, config: ToolchainConfig | None = None, jobs: int = 4) -> SizeReport:
    """Measure each module file; rows keep the order of ``paths``."""
    paths = [Path(p) for p in paths]

    def one(p: Path) -> SizeRow:
        return measure_module(p.read_text(), p.stem, config)

    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        rows = list(pool.map(one, paths))
    query = config.size_cmd if config is not None else "source-bytes"
    return SizeReport(rows, query)
