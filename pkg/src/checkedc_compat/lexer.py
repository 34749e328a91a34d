"""Lossless tokenizer for the annotated C subset.

Every token keeps the whitespace/comments that precede it in ``pre``, so
``detokenize(tokenize(src)) == src`` byte for byte.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .diagnostics import CompileError, error

KEYWORDS = frozenset(
    """
    void char short int long signed unsigned const volatile struct typedef
    static extern inline if else while do for return break continue sizeof
    _Bool
    """.split()
)

CHECKED_KEYWORDS = frozenset(["_Ptr", "_Array_ptr", "_Nt_array_ptr", "_Checked", "_Unchecked"])

PUNCTUATORS = sorted(
    """
    ... <<= >>= -> ++ -- << >> <= >= == != && || += -= *= /= %= &= |= ^= ##
    { } [ ] ( ) < > ; : , . ? + - * / % & | ^ ! ~ = #
    """.split(),
    key=len,
    reverse=True,
)

_TRIVIA = re.compile(rb"(?:[ \t\r\n\f\v]+|\\\r?\n|//[^\n]*|/\*.*?\*/)+", re.S)
_IDENT = re.compile(rb"[A-Za-z_][A-Za-z_0-9]*")
_NUMBER = re.compile(rb"(?:0[xX][0-9a-fA-F]+|[0-9]+)[uUlL]*")
_CHAR = re.compile(rb"'(?:\\.|[^\\'\n])+'")
_STRING = re.compile(rb'"(?:\\.|[^\\"\n])*"')
_PUNCT = re.compile(b"|".join(re.escape(p.encode()) for p in PUNCTUATORS))


@dataclass(frozen=True)
class Token:
    kind: str  # identifier | keyword | checked-keyword | punctuation | literal | eof
    text: str
    span: tuple[int, int]
    pre: str = ""
    bol: bool = False  # first token on its source line

    def __repr__(self) -> str:
        return f"Token({self.kind}, {self.text!r})"


def tokenize(source: bytes | str) -> list[Token]:
    """Split ``source`` into tokens; the last token is always ``eof``.

    Raises CompileError on unterminated comments/literals and illegal characters.
    """
    if isinstance(source, str):
        source = source.encode("utf-8")
    tokens: list[Token] = []
    diags = []
    pos = 0
    n = len(source)
    at_line_start = True
    while True:
        start_trivia = pos
        m = _TRIVIA.match(source, pos)
        if m:
            pos = m.end()
        pre = source[start_trivia:pos]
        bol = at_line_start or b"\n" in pre
        if pos >= n:
            tokens.append(Token("eof", "", (pos, pos), pre.decode("utf-8"), bol))
            break
        if source.startswith(b"/*", pos):
            diags.append(error("E-LEX-COMMENT", "unterminated comment", (pos, n)))
            break
        for kind, rx in (("identifier", _IDENT), ("literal", _NUMBER), ("literal", _CHAR),
                         ("literal", _STRING), ("punctuation", _PUNCT)):
            m = rx.match(source, pos)
            if m:
                break
        else:
            m = None
        if m is None:
            ch = source[pos:pos + 1]
            if ch in (b'"', b"'"):
                end = source.find(b"\n", pos)
                end = n if end < 0 else end
                diags.append(error("E-LEX-LITERAL", "unterminated literal", (pos, end)))
                break
            diags.append(error("E-LEX-CHAR", f"illegal character {ch!r}", (pos, pos + 1)))
            pos += 1
            at_line_start = False
            continue
        text = m.group().decode("utf-8")
        if kind == "identifier":
            if text in CHECKED_KEYWORDS:
                kind = "checked-keyword"
            elif text in KEYWORDS:
                kind = "keyword"
        tokens.append(Token(kind, text, (pos, m.end()), pre.decode("utf-8"), bol))
        pos = m.end()
        at_line_start = False
    if diags:
        raise CompileError(diags)
    return tokens


def detokenize(tokens: list[Token]) -> str:
    return "".join(t.pre + t.text for t in tokens)


def significant(source: bytes | str) -> list[str]:
    """Token texts without trivia; the basis of token-equality comparisons."""
    return [t.text for t in tokenize(source) if t.kind != "eof"]


def tokens_equal(a: bytes | str, b: bytes | str) -> bool:
    return significant(a) == significant(b)


def would_merge(left: str, right: str) -> bool:
    """True if writing ``left`` directly before ``right`` would lex differently."""
    if not left or not right:
        return False
    try:
        toks = tokenize(left + right)
    except CompileError:
        return True
    return len(toks) - 1 != len(tokenize(left)) - 1 + len(tokenize(right)) - 1
