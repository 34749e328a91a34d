"""Diagnostics shared by every stage of the pipeline."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" | "warning"
    code: str
    message: str
    span: tuple[int, int] | None = None

    @property
    def is_error(self) -> bool:
        return self.severity == "error"

    def format(self, filename: str = "<input>", source: bytes | str | None = None) -> str:
        line, col = position(source, self.span[0]) if self.span and source is not None else (0, 0)
        return f"{filename}:{line}:{col}: {self.severity}[{self.code}]: {self.message}"


def error(code: str, message: str, span=None) -> Diagnostic:
    return Diagnostic("error", code, message, span)


def warning(code: str, message: str, span=None) -> Diagnostic:
    return Diagnostic("warning", code, message, span)


def position(source: bytes | str | None, offset: int) -> tuple[int, int]:
    """1-based (line, column) of a byte offset."""
    if source is None:
        return 0, 0
    if isinstance(source, str):
        source = source.encode("utf-8")
    offset = max(0, min(offset, len(source)))
    line = source.count(b"\n", 0, offset) + 1
    col = offset - (source.rfind(b"\n", 0, offset) + 1) + 1
    return line, col


@dataclass
class CompileError(Exception):
    """Raised when a stage cannot produce a result; carries the diagnostics."""

    diagnostics: list[Diagnostic] = field(default_factory=list)

    def __str__(self) -> str:
        return "; ".join(f"{d.severity}[{d.code}]: {d.message}" for d in self.diagnostics)


class InternalError(Exception):
    """A pipeline contract was violated (e.g. rendering unlowered checked code as legacy C)."""
