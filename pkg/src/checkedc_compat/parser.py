"""Recursive-descent parser for the annotated C subset.

Native Checked C spellings (``_Ptr<T>``, ``x : count(n)``), the ``ptr<T>``
aliases and the compat-macro spellings (``ptr(T)``, ``x acount(n)``) all
parse to the same nodes.
"""

from __future__ import annotations

from .diagnostics import CompileError, error
from .lexer import Token, tokenize
from .nodes import (
    Array, Assign, Base, Binary, Block, Break, ByteCount, Call, Cast, CharLit, Comma, Cond,
    Conditional, Continue, Count, Directive, DoWhile, Empty, ExprStmt, Field, For, FuncDecl,
    Ident, If, Index, InitList, IntLit, Member, Param, Pointer, Postfix, PtrKind, Range,
    Return, ScopePragma, SizeofExpr, SizeofType, SourceUnit, StrLit, StructDef, StructRef,
    Typedef, Unary, VarDecl, While,
)
from .types import BUILTIN_TYPEDEFS

CHECKED_TYPE_WORDS = {
    "_Ptr": PtrKind.PTR,
    "_Array_ptr": PtrKind.ARRAY,
    "_Nt_array_ptr": PtrKind.NT_ARRAY,
    "ptr": PtrKind.PTR,
    "array_ptr": PtrKind.ARRAY,
    "nt_array_ptr": PtrKind.NT_ARRAY,
}
NATIVE_CLAUSES = {"count", "byte_count", "bounds", "itype"}
MACRO_CLAUSES = {"acount": "count", "abyte_count": "byte_count", "abounds": "bounds", "atype": "itype"}
SCOPE_WORDS = {"_Checked": "checked", "_Unchecked": "unchecked",
               "checked_scope": "checked", "unchecked_scope": "unchecked"}

INT_WORDS = {"char", "short", "int", "long", "signed", "unsigned"}
TYPE_WORDS = INT_WORDS | {"void", "_Bool", "struct", "const", "volatile"}
STORAGE_WORDS = {"static", "extern", "inline"}

ASSIGN_OPS = {"=", "+=", "-=", "*=", "/=", "%=", "<<=", ">>=", "&=", "|=", "^="}
BINARY_PREC = {
    "||": 1, "&&": 2, "|": 3, "^": 4, "&": 5, "==": 6, "!=": 6,
    "<": 7, ">": 7, "<=": 7, ">=": 7, "<<": 8, ">>": 8, "+": 9, "-": 9,
    "*": 10, "/": 10, "%": 10,
}

_ESCAPES = {"n": 10, "t": 9, "r": 13, "0": 0, "\\": 92, "'": 39, '"': 34, "a": 7, "b": 8,
            "f": 12, "v": 11, "?": 63}


def char_value(text: str) -> int:
    body = text[1:-1]
    if not body.startswith("\\"):
        return ord(body[0])
    esc = body[1:]
    if esc[0] == "x":
        return int(esc[1:], 16) & 0xFF
    if esc[0].isdigit() and esc != "0":
        return int(esc, 8) & 0xFF
    return _ESCAPES.get(esc[0], ord(esc[0]))


def int_value(text: str) -> int:
    digits = text.rstrip("uUlL")
    if digits.lower().startswith("0x"):
        return int(digits, 16)
    if len(digits) > 1 and digits.startswith("0"):
        return int(digits, 8)
    return int(digits)


def canonical_int_name(words: list[str]) -> str:
    unsigned = "unsigned" in words
    signed = "signed" in words
    longs = words.count("long")
    if "char" in words:
        return "unsigned char" if unsigned else ("signed char" if signed else "char")
    if "short" in words:
        return "unsigned short" if unsigned else "short"
    if longs >= 2:
        return "unsigned long long" if unsigned else "long long"
    if longs == 1:
        return "unsigned long" if unsigned else "long"
    return "unsigned int" if unsigned else "int"


class ParseError(Exception):
    def __init__(self, diag):
        super().__init__(diag.message)
        self.diag = diag


class Parser:
    def __init__(self, tokens: list[Token], source_name: str = "<input>"):
        self.toks = list(tokens)
        self.i = 0
        self.source_name = source_name
        self.typedefs = dict(BUILTIN_TYPEDEFS)
        self.diags = []

    # -- token helpers -------------------------------------------------------

    def peek(self, k: int = 0) -> Token:
        j = min(self.i + k, len(self.toks) - 1)
        return self.toks[j]

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def at(self, *texts: str) -> bool:
        t = self.tok
        return t.kind != "eof" and t.text in texts and t.kind != "literal"

    def advance(self) -> Token:
        t = self.toks[self.i]
        if t.kind != "eof":
            self.i += 1
        return t

    def accept(self, text: str) -> Token | None:
        if self.at(text):
            return self.advance()
        if text == ">" and self.at(">>", ">=", ">>="):
            self._split_angle()
            return self.advance()
        return None

    def expect(self, text: str) -> Token:
        t = self.accept(text)
        if t is None:
            self.fail("E-SYNTAX", f"expected '{text}' but found '{self.tok.text or 'end of file'}'")
        return t

    def _split_angle(self):
        t = self.tok
        a, b = t.span
        first = Token("punctuation", ">", (a, a + 1), t.pre, t.bol)
        rest = Token("punctuation", t.text[1:], (a + 1, b), "", False)
        self.toks[self.i:self.i + 1] = [first, rest]

    def fail(self, code: str, message: str, span=None):
        raise ParseError(error(code, message, span or self.tok.span))

    def prev_end(self) -> int:
        return self.toks[self.i - 1].span[1] if self.i > 0 else 0

    def span_from(self, start: int) -> tuple[int, int]:
        return (start, max(start, self.prev_end()))

    def ident(self) -> Token:
        t = self.tok
        if t.kind != "identifier":
            self.fail("E-SYNTAX", f"expected identifier but found '{t.text or 'end of file'}'")
        return self.advance()

    # -- directives ------------------------------------------------------------

    def at_directive(self) -> bool:
        return self.tok.kind == "punctuation" and self.tok.text == "#" and self.tok.bol

    def read_directive(self) -> tuple[str, tuple[int, int]]:
        start = self.tok.span[0]
        parts = [self.advance().text]
        while self.tok.kind != "eof" and not self.tok.bol:
            t = self.advance()
            parts.append(t.pre + t.text)
        return "".join(parts).rstrip(), self.span_from(start)

    @staticmethod
    def directive_words(text: str) -> list[str]:
        return text[1:].split()

    def parse_directive(self, parse_one):
        """Parse one directive; conditionals recurse with ``parse_one`` for their bodies."""
        text, span = self.read_directive()
        words = self.directive_words(text)
        head = words[0] if words else ""
        if head == "pragma" and len(words) >= 2 and words[1] == "CHECKED_SCOPE":
            state = words[2].lower() if len(words) > 2 else "on"
            if state not in ("on", "off"):
                self.fail("E-PRAGMA", f"unknown CHECKED_SCOPE state '{words[2]}'", span)
            return ScopePragma(state == "on", span=span)
        if head in ("ifdef", "ifndef"):
            if len(words) != 2:
                self.fail("E-PP-UNSUPPORTED", f"malformed #{head}", span)
            then, orelse = self.parse_conditional_body(parse_one, span)
            node = Conditional(words[1], head == "ifndef", then, orelse, span=span)
            if (node.name == "USE_CHECKEDC" and not node.negated and orelse is None
                    and len(then) == 1 and isinstance(then[0], ScopePragma)):
                return ScopePragma(then[0].on, span=span)
            return node
        if head in ("if", "elif"):
            self.fail("E-PP-UNSUPPORTED", f"#{head} is outside the supported preprocessor subset", span)
        if head in ("else", "endif"):
            self.fail("E-PP-UNBALANCED", f"unmatched #{head}", span)
        return Directive(text, span=span)

    def _peek_directive_head(self) -> str | None:
        if not self.at_directive():
            return None
        nxt = self.peek(1)
        if nxt.bol or nxt.kind == "eof":
            return ""
        return nxt.text

    def parse_conditional_body(self, parse_one, span):
        then: list = []
        orelse = None
        current = then
        while True:
            if self.tok.kind == "eof":
                self.fail("E-PP-UNBALANCED", "unterminated conditional", span)
            head = self._peek_directive_head()
            if head == "else":
                self.read_directive()
                if orelse is not None:
                    self.fail("E-PP-UNBALANCED", "duplicate #else", span)
                orelse = []
                current = orelse
                continue
            if head == "endif":
                self.read_directive()
                return then, orelse
            current.extend(parse_one())

    # -- types -----------------------------------------------------------------

    def is_checked_type_word(self, k: int = 0) -> bool:
        t = self.peek(k)
        if t.text not in CHECKED_TYPE_WORDS or t.kind not in ("identifier", "checked-keyword"):
            return False
        return self.peek(k + 1).text in ("<", "(")

    def starts_type(self, k: int = 0) -> bool:
        t = self.peek(k)
        if t.kind == "keyword" and t.text in TYPE_WORDS:
            return True
        if t.kind == "identifier" and t.text in self.typedefs:
            return True
        return self.is_checked_type_word(k)

    def starts_declaration(self) -> bool:
        t = self.tok
        if t.kind == "keyword" and t.text in STORAGE_WORDS | {"typedef"}:
            return True
        return self.starts_type()

    def parse_storage(self) -> tuple:
        words = []
        while self.tok.kind == "keyword" and self.tok.text in STORAGE_WORDS:
            words.append(self.advance().text)
        return tuple(words)

    def parse_type_spec(self, allow_struct_body: bool = False):
        """Returns (type, struct_def_or_None)."""
        const = False
        words: list[str] = []
        result = None
        struct_def = None
        start = self.tok.span[0]
        while True:
            t = self.tok
            if t.kind == "keyword" and t.text in ("const", "volatile"):
                self.advance()
                const = const or t.text == "const"
            elif result is None and not words and self.is_checked_type_word():
                kind = CHECKED_TYPE_WORDS[self.advance().text]
                close = ">" if self.accept("<") else None
                if close is None:
                    self.expect("(")
                    close = ")"
                inner = self.parse_type_name()
                self.expect(close)
                result = Pointer(kind, inner)
            elif t.kind == "keyword" and t.text in INT_WORDS and result is None:
                words.append(self.advance().text)
            elif t.kind == "keyword" and t.text in ("void", "_Bool") and result is None and not words:
                result = Base(self.advance().text)
            elif t.kind == "keyword" and t.text == "struct" and result is None and not words:
                self.advance()
                tag = self.ident().text
                if self.at("{"):
                    if not allow_struct_body:
                        self.fail("E-SYNTAX", "struct definition not allowed here")
                    struct_def = StructDef(tag, self.parse_struct_fields(), span=self.span_from(start))
                result = StructRef(tag)
            elif (t.kind == "identifier" and t.text in self.typedefs and result is None
                  and not words):
                result = Base(self.advance().text)
            else:
                break
        if words:
            result = Base(canonical_int_name(words))
        if result is None:
            self.fail("E-SYNTAX", f"expected a type but found '{self.tok.text or 'end of file'}'")
        if const:
            result.const = True
        return result, struct_def

    def parse_pointer_stars(self, base):
        t = base
        while self.accept("*"):
            t = Pointer(PtrKind.PLAIN, t)
            if self.at("const"):
                self.advance()
                t.const = True
        return t

    def parse_type_name(self):
        base, _ = self.parse_type_spec()
        return self.parse_pointer_stars(base)

    def resolve(self, t):
        seen = 0
        while isinstance(t, Base) and t.name in self.typedefs and seen < 50:
            nxt = self.typedefs[t.name]
            if nxt is None or nxt == t:
                break
            t = nxt
            seen += 1
        return t

    def parse_array_dims(self, t):
        dims = []
        while self.accept("["):
            dims.append(None if self.at("]") else self.parse_conditional())
            self.expect("]")
        for d in reversed(dims):
            t = Array(t, d)
        return t

    def parse_annotations(self):
        """Native ``: clause clause`` or macro ``aclause(...)`` annotations."""
        bounds = itype = None
        start = self.tok.span[0]
        clauses = []
        if self.at(":"):
            self.advance()
            while self.tok.kind == "identifier" and self.tok.text in NATIVE_CLAUSES \
                    and self.peek(1).text == "(":
                clauses.append(self.advance().text)
                self._parse_clause_body(clauses)
            if not clauses:
                self.fail("E-SYNTAX", "expected bounds or itype after ':'")
        else:
            while self.tok.kind == "identifier" and self.tok.text in MACRO_CLAUSES \
                    and self.peek(1).text == "(":
                clauses.append(MACRO_CLAUSES[self.advance().text])
                self._parse_clause_body(clauses)
        for name, value in clauses:
            if name == "itype":
                if itype is not None:
                    self.fail("E-ANN-DUP", "duplicate itype annotation", self.span_from(start))
                itype = value
            else:
                if bounds is not None:
                    self.fail("E-ANN-DUP", "duplicate bounds annotation", self.span_from(start))
                bounds = value
        return bounds, itype, (self.span_from(start) if clauses else None)

    def _parse_clause_body(self, clauses):
        name = clauses.pop()
        self.expect("(")
        if name == "itype":
            value = self.parse_type_name()
        elif name == "count":
            value = Count(self.parse_assign())
        elif name == "byte_count":
            value = ByteCount(self.parse_assign())
        else:
            lo = self.parse_assign()
            self.expect(",")
            value = Range(lo, self.parse_assign())
        self.expect(")")
        clauses.append((name, value))

    def check_annotation_target(self, t, bounds, itype, span):
        if (bounds is not None or itype is not None) and not isinstance(self.resolve(t), Pointer):
            self.diags.append(error("E-ANN-NONPTR", "bounds or itype annotation on a non-pointer declarator", span))

    # -- items -----------------------------------------------------------------

    def parse_unit(self) -> SourceUnit:
        items = []
        while self.tok.kind != "eof":
            items.extend(self.parse_item())
        return SourceUnit(items, self.source_name)

    def parse_item(self) -> list:
        if self.at_directive():
            return [self.parse_directive(self.parse_item)]
        if self.accept(";"):
            return []
        start = self.tok.span[0]
        if self.at("typedef"):
            return [self.parse_typedef()]
        storage = self.parse_storage()
        if self.at("struct") and self.peek(1).kind == "identifier" and self.peek(2).text == "{":
            base, struct_def = self.parse_type_spec(allow_struct_body=True)
            if self.accept(";"):
                return [struct_def]
            self.fail("E-SYNTAX", "declarations combined with struct definitions are not supported")
        base, _ = self.parse_type_spec()
        if self.accept(";"):
            return []
        t = self.parse_pointer_stars(base)
        name_tok = self.ident()
        if self.at("("):
            return [self.parse_function_rest(t, name_tok.text, storage, start)]
        return self.parse_var_rest(base, t, name_tok, storage, start)

    def parse_typedef(self):
        start = self.advance().span[0]
        base, struct_def = self.parse_type_spec(allow_struct_body=True)
        t = self.parse_pointer_stars(base)
        name = self.ident().text
        t = self.parse_array_dims(t)
        self.expect(";")
        self.typedefs[name] = t
        return Typedef(t, name, struct_def, span=self.span_from(start))

    def parse_struct_fields(self) -> list:
        self.expect("{")
        fields = []
        while not self.accept("}"):
            start = self.tok.span[0]
            base, _ = self.parse_type_spec()
            while True:
                t = self.parse_pointer_stars(base)
                name = self.ident().text
                t = self.parse_array_dims(t)
                bounds, itype, aspan = self.parse_annotations()
                self.check_annotation_target(t, bounds, itype, aspan)
                fields.append(Field(t, name, bounds, itype, span=self.span_from(start)))
                if not self.accept(","):
                    break
            self.expect(";")
        return fields

    def parse_params(self):
        self.expect("(")
        params = []
        variadic = False
        if self.at("void") and self.peek(1).text == ")":
            self.advance()
        while not self.at(")"):
            if self.accept("..."):
                variadic = True
                break
            start = self.tok.span[0]
            base, _ = self.parse_type_spec()
            t = self.parse_pointer_stars(base)
            name = None
            if self.tok.kind == "identifier" and self.tok.text not in MACRO_CLAUSES:
                name = self.advance().text
            t = self.parse_array_dims(t)
            bounds, itype, aspan = self.parse_annotations()
            self.check_annotation_target(t, bounds, itype, aspan)
            params.append(Param(t, name, bounds, itype, span=self.span_from(start)))
            if not self.accept(","):
                break
        self.expect(")")
        return params, variadic

    def parse_function_rest(self, ret, name, storage, start):
        params, variadic = self.parse_params()
        bounds, itype, aspan = self.parse_annotations()
        self.check_annotation_target(ret, bounds, itype, aspan)
        body = None
        if self.at("{"):
            body = self.parse_block()
        elif self.tok.text in SCOPE_WORDS and self.peek(1).text == "{":
            scope = SCOPE_WORDS[self.advance().text]
            body = self.parse_block(scope)
        else:
            self.expect(";")
        return FuncDecl(ret, name, params, variadic, bounds, itype, storage, body,
                        span=self.span_from(start))

    def parse_var_rest(self, base, t, name_tok, storage, start):
        decls = []
        while True:
            t = self.parse_array_dims(t)
            bounds, itype, aspan = self.parse_annotations()
            self.check_annotation_target(t, bounds, itype, aspan)
            init = None
            if self.accept("="):
                init = self.parse_initializer()
            decls.append(VarDecl(t, name_tok.text, bounds, itype, init, storage,
                                 span=(name_tok.span[0] if decls else start, self.prev_end())))
            if not self.accept(","):
                break
            t = self.parse_pointer_stars(_copy_type(base))
            name_tok = self.ident()
        self.expect(";")
        return decls

    def parse_initializer(self):
        if self.at("{"):
            start = self.advance().span[0]
            items = []
            while not self.at("}"):
                items.append(self.parse_initializer())
                if not self.accept(","):
                    break
            self.expect("}")
            return InitList(items, span=self.span_from(start))
        return self.parse_assign()

    # -- statements ------------------------------------------------------------

    def parse_block(self, scope=None) -> Block:
        start = self.expect("{").span[0]
        items = []
        while not self.accept("}"):
            if self.tok.kind == "eof":
                self.fail("E-SYNTAX", "unterminated block")
            items.extend(self.parse_block_item())
        return Block(items, scope, span=self.span_from(start))

    def parse_block_item(self) -> list:
        if self.at_directive():
            return [self.parse_directive(self.parse_block_item)]
        if self.starts_declaration() and not self.at("typedef"):
            start = self.tok.span[0]
            storage = self.parse_storage()
            base, _ = self.parse_type_spec()
            t = self.parse_pointer_stars(base)
            name_tok = self.ident()
            return self.parse_var_rest(base, t, name_tok, storage, start)
        return [self.parse_statement()]

    def parse_statement(self):
        t = self.tok
        start = t.span[0]
        if t.text in SCOPE_WORDS and t.kind in ("checked-keyword", "identifier") \
                and self.peek(1).text == "{":
            self.advance()
            block = self.parse_block(SCOPE_WORDS[t.text])
            block.span = self.span_from(start)
            return block
        if self.at("{"):
            return self.parse_block()
        if self.at(";"):
            self.advance()
            return Empty(span=self.span_from(start))
        if t.kind == "keyword":
            if t.text == "if":
                self.advance()
                self.expect("(")
                test = self.parse_expr()
                self.expect(")")
                then = self.parse_statement()
                orelse = self.parse_statement() if self.accept("else") else None
                return If(test, then, orelse, span=self.span_from(start))
            if t.text == "while":
                self.advance()
                self.expect("(")
                test = self.parse_expr()
                self.expect(")")
                return While(test, self.parse_statement(), span=self.span_from(start))
            if t.text == "do":
                self.advance()
                body = self.parse_statement()
                self.expect("while")
                self.expect("(")
                test = self.parse_expr()
                self.expect(")")
                self.expect(";")
                return DoWhile(body, test, span=self.span_from(start))
            if t.text == "for":
                self.advance()
                self.expect("(")
                init = None
                if self.starts_declaration():
                    dstart = self.tok.span[0]
                    base, _ = self.parse_type_spec()
                    ty = self.parse_pointer_stars(base)
                    name_tok = self.ident()
                    decls = self.parse_var_rest(base, ty, name_tok, (), dstart)
                    if len(decls) != 1:
                        self.fail("E-SYNTAX", "only one declaration is supported in a for initializer")
                    init = decls[0]
                else:
                    if not self.at(";"):
                        init = self.parse_expr()
                    self.expect(";")
                test = None if self.at(";") else self.parse_expr()
                self.expect(";")
                step = None if self.at(")") else self.parse_expr()
                self.expect(")")
                return For(init, test, step, self.parse_statement(), span=self.span_from(start))
            if t.text == "return":
                self.advance()
                value = None if self.at(";") else self.parse_expr()
                self.expect(";")
                return Return(value, span=self.span_from(start))
            if t.text == "break":
                self.advance()
                self.expect(";")
                return Break(span=self.span_from(start))
            if t.text == "continue":
                self.advance()
                self.expect(";")
                return Continue(span=self.span_from(start))
            if t.text == "else":
                self.fail("E-SYNTAX", "'else' without 'if'")
        expr = self.parse_expr()
        self.expect(";")
        return ExprStmt(expr, span=self.span_from(start))

    # -- expressions -----------------------------------------------------------

    def parse_expr(self):
        start = self.tok.span[0]
        e = self.parse_assign()
        while self.at(","):
            self.advance()
            e = Comma(e, self.parse_assign(), span=self.span_from(start))
        return e

    def parse_assign(self):
        start = self.tok.span[0]
        lhs = self.parse_conditional()
        if self.tok.kind == "punctuation" and self.tok.text in ASSIGN_OPS:
            op = self.advance().text
            rhs = self.parse_assign()
            return Assign(op, lhs, rhs, span=self.span_from(start))
        return lhs

    def parse_conditional(self):
        start = self.tok.span[0]
        test = self.parse_binary(1)
        if self.accept("?"):
            then = self.parse_expr()
            self.expect(":")
            orelse = self.parse_conditional()
            return Cond(test, then, orelse, span=self.span_from(start))
        return test

    def parse_binary(self, min_prec):
        start = self.tok.span[0]
        left = self.parse_unary()
        while True:
            t = self.tok
            prec = BINARY_PREC.get(t.text) if t.kind == "punctuation" else None
            if prec is None or prec < min_prec:
                return left
            self.advance()
            right = self.parse_binary(prec + 1)
            left = Binary(t.text, left, right, span=self.span_from(start))

    def parse_unary(self):
        t = self.tok
        start = t.span[0]
        if t.kind == "punctuation" and t.text in ("-", "+", "!", "~", "*", "&"):
            self.advance()
            return Unary(t.text, self.parse_unary(), span=self.span_from(start))
        if t.kind == "punctuation" and t.text in ("++", "--"):
            self.advance()
            return Unary(t.text, self.parse_unary(), span=self.span_from(start))
        if self.at("sizeof"):
            self.advance()
            if self.at("(") and self.starts_type(1):
                self.advance()
                ty = self.parse_type_name()
                self.expect(")")
                return SizeofType(ty, span=self.span_from(start))
            return SizeofExpr(self.parse_unary(), span=self.span_from(start))
        if self.at("(") and self.starts_type(1):
            self.advance()
            ty = self.parse_type_name()
            self.expect(")")
            return Cast(ty, self.parse_unary(), span=self.span_from(start))
        return self.parse_postfix()

    def parse_postfix(self):
        start = self.tok.span[0]
        e = self.parse_primary()
        while True:
            if self.accept("["):
                idx = self.parse_expr()
                self.expect("]")
                e = Index(e, idx, span=self.span_from(start))
            elif self.at("("):
                if not isinstance(e, Ident):
                    self.fail("E-SYNTAX", "only direct calls by name are supported")
                self.advance()
                args = []
                while not self.at(")"):
                    args.append(self.parse_assign())
                    if not self.accept(","):
                        break
                self.expect(")")
                e = Call(e.name, args, span=self.span_from(start))
            elif self.at(".", "->"):
                arrow = self.advance().text == "->"
                e = Member(e, self.ident().text, arrow, span=self.span_from(start))
            elif self.at("++", "--"):
                e = Postfix(self.advance().text, e, span=self.span_from(start))
            else:
                return e

    def parse_primary(self):
        t = self.tok
        start = t.span[0]
        if t.kind == "identifier":
            self.advance()
            return Ident(t.text, span=t.span)
        if t.kind == "literal":
            self.advance()
            if t.text.startswith("'"):
                return CharLit(char_value(t.text), t.text, span=t.span)
            if t.text.startswith('"'):
                return StrLit(t.text, span=t.span)
            return IntLit(int_value(t.text), t.text, span=t.span)
        if self.accept("("):
            e = self.parse_expr()
            self.expect(")")
            return e
        self.fail("E-SYNTAX", f"unexpected '{t.text or 'end of file'}'", (start, t.span[1]))


def _copy_type(t):
    from .nodes import clone
    return clone(t)


def parse(tokens: list[Token], source_name: str = "<input>") -> SourceUnit:
    """Parse a token stream; raises CompileError with diagnostics on failure."""
    p = Parser(tokens, source_name)
    try:
        unit = p.parse_unit()
    except ParseError as exc:
        raise CompileError(p.diags + [exc.diag]) from None
    if p.diags:
        raise CompileError(p.diags)
    return unit


def parse_source(source: bytes | str, source_name: str = "<input>") -> SourceUnit:
    return parse(tokenize(source), source_name)
