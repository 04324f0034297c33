"""Clojure reader.

Turns source text into immutable :class:`Form` trees carrying byte-exact
source spans. Comments are collected side-band. Read errors are returned
as records so a broken form does not hide the rest of the file.

    >>> forms, comments, errors = read_forms("(+ 1 2) ; sum")
    >>> render(forms[0]), comments[0].text
    ('(+ 1 2)', ' sum')
"""

from __future__ import annotations

import re
from bisect import bisect_right
from dataclasses import dataclass
from decimal import Decimal
from enum import Enum
from fractions import Fraction
from functools import cached_property
from itertools import accumulate
from typing import Iterator, NamedTuple


class Kind(str, Enum):
    LIST = "List"
    VECTOR = "Vector"
    MAP = "MapLit"
    SET = "SetLit"
    SYMBOL = "Symbol"
    KEYWORD = "Keyword"
    STRING = "StringLit"
    REGEX = "RegexLit"
    CHAR = "CharLit"
    NUMBER = "NumberLit"
    BOOL = "BoolLit"
    NIL = "NilLit"
    QUOTE = "Quote"
    SYNTAX_QUOTE = "SyntaxQuote"
    UNQUOTE = "Unquote"
    UNQUOTE_SPLICING = "UnquoteSplicing"
    DEREF = "Deref"
    VAR_QUOTE = "VarQuote"
    META = "MetaAnnotated"
    ANON_FN = "AnonFnLit"
    DISCARD = "Discard"
    TAGGED = "TaggedLit"
    READER_COND = "ReaderConditional"
    NS_MAP = "NamespacedMapLit"


COLLECTIONS = frozenset({Kind.LIST, Kind.VECTOR, Kind.MAP, Kind.SET})
ATOMS = frozenset({Kind.SYMBOL, Kind.KEYWORD, Kind.STRING, Kind.REGEX, Kind.CHAR,
                   Kind.NUMBER, Kind.BOOL, Kind.NIL})


@dataclass(frozen=True, slots=True)
class SourcePos:
    line: int  # 1-based
    col: int  # 1-based, in characters
    offset: int  # 0-based, in UTF-8 bytes

    def __reduce__(self):
        # frozen slotted dataclasses do not unpickle on 3.10
        return (SourcePos, (self.line, self.col, self.offset))


@dataclass(frozen=True, slots=True)
class Span:
    start: SourcePos
    end: SourcePos  # exclusive

    def __reduce__(self):
        return (Span, (self.start, self.end))

    def slice(self, data: bytes) -> str:
        return data[self.start.offset:self.end.offset].decode("utf-8")


@dataclass(frozen=True, eq=False)
class Form:
    """One read form.

    Equality is identity; use :func:`forms_equal` for structural comparison.
    Payload fields are only meaningful for the kinds that use them:
    ``ns``/``name`` for symbols and keywords, ``value`` for decoded literals,
    ``auto`` for ``::kw`` and ``#::{}``, ``splicing`` for ``#?@``,
    ``max_arg``/``rest_arg`` for ``#()``.
    """

    kind: Kind
    span: Span
    children: tuple[Form, ...] = ()
    text: str = ""
    ns: str | None = None
    name: str | None = None
    value: object = None
    subtype: str | None = None
    auto: bool = False
    splicing: bool = False
    max_arg: int = 0
    rest_arg: bool = False

    @cached_property
    def items(self) -> tuple[Form, ...]:
        """Children with discarded forms removed."""
        return tuple(c for c in self.children if c.kind is not Kind.DISCARD)

    @property
    def head(self) -> Form | None:
        items = self.items
        return items[0] if items else None

    @property
    def args(self) -> tuple[Form, ...]:
        return self.items[1:]

    @property
    def head_name(self) -> str | None:
        """Unqualified name of a list's head symbol, if any."""
        if self.kind is Kind.LIST:
            items = self.items
            if items and items[0].kind is Kind.SYMBOL:
                return items[0].name
        return None

    @property
    def branches(self) -> list[tuple[Form, Form]]:
        """Feature/form pairs of a reader conditional."""
        items = self.items
        return [(items[i], items[i + 1]) for i in range(0, len(items) - 1, 2)]

    def is_symbol(self, name: str | None = None) -> bool:
        return self.kind is Kind.SYMBOL and (name is None or (self.ns is None and self.name == name))

    def __repr__(self) -> str:
        return f"<{self.kind.value} {render(self)!r} @{self.span.start.line}:{self.span.start.col}>"


class CommentRecord(NamedTuple):
    text: str
    span: Span
    kind: str  # "line-comment" | "shebang"


class Token(NamedTuple):
    kind: str
    text: str
    span: Span


class ReadError(Exception):
    """A problem found while reading; carries the offending span."""

    def __init__(self, message: str, span: Span, recoverable: bool = False):
        super().__init__(message)
        self.message = message
        self.span = span
        self.recoverable = recoverable

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.message!r} at {self.span.start.line}:{self.span.start.col})"


class LexError(ReadError):
    pass


# ---------------------------------------------------------------------------
# Lexing
# ---------------------------------------------------------------------------

_CONSTITUENT = re.compile(r'[^\s,()\[\]{}"\\;@^`~]+')
_WHITESPACE = re.compile(r"[\s,]+")
_LINE_REST = re.compile(r"[^\n]*")

_INT = re.compile(
    r"([-+]?)(?:(0)|([1-9][0-9]*)|0[xX]([0-9A-Fa-f]+)|0([0-7]+)"
    r"|([1-9][0-9]?)[rR]([0-9A-Za-z]+)|(0[0-9]+))(N)?"
)
_FLOAT = re.compile(r"[-+]?[0-9]+(\.[0-9]*)?([eE][-+]?[0-9]+)?(M)?")
_RATIO = re.compile(r"([-+]?[0-9]+)/([0-9]+)")
_ARG = re.compile(r"%(?:([1-9][0-9]*)|(&))?")

_CHAR_NAMES = {
    "newline": "\n", "space": " ", "tab": "\t", "backspace": "\b",
    "formfeed": "\f", "return": "\r",
}
_STRING_ESCAPES = {"t": "\t", "r": "\r", "n": "\n", "\\": "\\", '"': '"', "b": "\b", "f": "\f"}
_SYMBOLIC = {"Inf": float("inf"), "-Inf": float("-inf"), "NaN": float("nan")}

OPENERS = {"(": ")", "[": "]", "{": "}", "#{": "}", "#(": ")", "#?(": ")", "#?@(": ")"}
CLOSERS = frozenset(")]}")


class _Positions:
    """Maps character indices to SourcePos."""

    def __init__(self, source: str):
        self.line_starts = [0] + [m.end() for m in re.finditer("\n", source)]
        if source.isascii():
            self.bytes_at = None
        else:
            self.bytes_at = [0, *accumulate(len(ch.encode("utf-8")) for ch in source)]

    def pos(self, index: int) -> SourcePos:
        line = bisect_right(self.line_starts, index)
        col = index - self.line_starts[line - 1] + 1
        offset = index if self.bytes_at is None else self.bytes_at[index]
        return SourcePos(line, col, offset)

    def span(self, start: int, end: int) -> Span:
        return Span(self.pos(start), self.pos(end))


class _RawToken(NamedTuple):
    kind: str
    text: str
    start: int
    end: int
    value: object = None


class _Lexer:
    def __init__(self, source: str, positions: _Positions):
        self.src = source
        self.n = len(source)
        self.i = 0
        self.positions = positions
        self.comments: list[tuple[int, CommentRecord]] = []

    def error(self, message: str, start: int, end: int, recoverable: bool = False) -> LexError:
        return LexError(message, self.positions.span(start, max(end, start)), recoverable)

    def skip_trivia(self) -> None:
        src, n = self.src, self.n
        while self.i < n:
            start = self.i
            ch = src[start]
            if ch.isspace() or ch == ",":
                self.i = _WHITESPACE.match(src, start).end()
            elif ch == ";" or (ch == "#" and src.startswith("#!", start)):
                end = _LINE_REST.match(src, start).end()
                raw = src[start:end]
                if ch == ";":
                    record = CommentRecord(raw.lstrip(";"), self.positions.span(start, end), "line-comment")
                else:
                    record = CommentRecord(raw[2:], self.positions.span(start, end), "shebang")
                self.comments.append((start, record))
                self.i = end
            else:
                return

    def next(self) -> _RawToken | None:
        self.skip_trivia()
        if self.i >= self.n:
            return None
        src, start = self.src, self.i
        ch = src[start]
        if ch in "()[]{}'@^`":
            self.i += 1
            return _RawToken(ch, ch, start, self.i)
        if ch == "~":
            if src.startswith("~@", start):
                self.i += 2
                return _RawToken("~@", "~@", start, self.i)
            self.i += 1
            return _RawToken("~", "~", start, self.i)
        if ch == '"':
            return self.read_string(start)
        if ch == "\\":
            return self.read_char(start)
        if ch == "#":
            return self.read_dispatch(start)
        if ch == ":":
            return self.read_keyword(start)
        m = _CONSTITUENT.match(src, start)
        text = m.group()
        self.i = m.end()
        if ch.isdigit() or (ch in "+-" and len(text) > 1 and text[1].isdigit()):
            return self.number_token(text, start)
        return self.symbol_token(text, start)

    def read_string(self, start: int, regex: bool = False) -> _RawToken:
        src, n = self.src, self.n
        j = start + (2 if regex else 1)
        chunks: list[str] = []
        bad_escape = None
        while True:
            k = j
            while k < n and src[k] not in '"\\':
                k += 1
            if k >= n:
                what = "regex" if regex else "string"
                raise self.error(f"EOF while reading {what}", start, n)
            if src[k] == '"':
                chunks.append(src[j:k])
                j = k + 1
                break
            # backslash
            if k + 1 >= n:
                raise self.error("EOF while reading string", start, n)
            chunks.append(src[j:k])
            esc = src[k + 1]
            j = k + 2
            if regex:
                chunks.append("\\" + esc)
            elif esc in _STRING_ESCAPES:
                chunks.append(_STRING_ESCAPES[esc])
            elif esc == "u":
                hexdigits = src[j:j + 4]
                if len(hexdigits) == 4 and all(c in "0123456789abcdefABCDEF" for c in hexdigits):
                    chunks.append(chr(int(hexdigits, 16)))
                    j += 4
                else:
                    bad_escape = bad_escape or (k, "Invalid unicode escape: \\u" + hexdigits)
            elif esc in "01234567":
                m = re.compile(r"[0-7]{1,3}").match(src, k + 1)
                code = int(m.group(), 8)
                if code > 0o377:
                    bad_escape = bad_escape or (k, "Octal escape sequence must be in range [0, 377]")
                chunks.append(chr(code))
                j = m.end()
            else:
                bad_escape = bad_escape or (k, f"Unsupported escape character: \\{esc}")
        self.i = j
        text = src[start:j]
        if bad_escape is not None:
            raise self.error(bad_escape[1], start, j, recoverable=True)
        return _RawToken("regex" if regex else "string", text, start, j, "".join(chunks))

    def read_char(self, start: int) -> _RawToken:
        src = self.src
        if start + 1 >= self.n:
            raise self.error("EOF while reading character", start, self.n)
        m = _CONSTITUENT.match(src, start + 2)
        end = m.end() if m else start + 2
        token = src[start + 1:end]
        self.i = end
        value = None
        if len(token) == 1:
            value = token
        elif token in _CHAR_NAMES:
            value = _CHAR_NAMES[token]
        elif token[0] == "u" and len(token) == 5:
            try:
                value = chr(int(token[1:], 16))
            except ValueError:
                pass
        elif token[0] == "o" and 2 <= len(token) <= 4 and all(c in "01234567" for c in token[1:]):
            code = int(token[1:], 8)
            if code <= 0o377:
                value = chr(code)
        if value is None:
            raise self.error(f"Unsupported character: \\{token}", start, end, recoverable=True)
        return _RawToken("char", src[start:end], start, end, value)

    def read_keyword(self, start: int) -> _RawToken:
        m = _CONSTITUENT.match(self.src, start)
        text = m.group()
        self.i = m.end()
        auto = text.startswith("::")
        body = text[2:] if auto else text[1:]
        parts = _split_name(body)
        if parts is None or body.startswith(":"):
            raise self.error(f"Invalid token: {text}", start, self.i, recoverable=True)
        return _RawToken("keyword", text, start, self.i, (parts[0], parts[1], auto))

    def read_dispatch(self, start: int) -> _RawToken:
        src = self.src
        nxt = src[start + 1] if start + 1 < self.n else ""
        two = "#" + nxt
        if nxt in "({_'":
            self.i = start + 2
            return _RawToken(two, two, start, self.i)
        if nxt == '"':
            return self.read_string(start, regex=True)
        if nxt == "^":
            self.i = start + 2
            return _RawToken("^", two, start, self.i)
        if nxt == "?":
            if src.startswith("#?@(", start):
                self.i = start + 4
                return _RawToken("#?@(", "#?@(", start, self.i)
            if src.startswith("#?(", start):
                self.i = start + 3
                return _RawToken("#?(", "#?(", start, self.i)
            self.i = start + 2
            raise self.error("read-cond body must be a list", start, self.i, recoverable=True)
        if nxt == ":":
            m = _CONSTITUENT.match(src, start + 1)
            text = "#" + m.group()
            self.i = m.end()
            body = text[2:]
            if body == ":":
                return _RawToken("#:", text, start, self.i, (None, True))
            if body.startswith(":"):
                alias = body[1:]
                valid = _split_name(alias)
                if valid is None or valid[0] is not None:
                    raise self.error(f"Invalid namespaced map prefix: {text}", start, self.i, recoverable=True)
                return _RawToken("#:", text, start, self.i, (alias, True))
            valid = _split_name(body)
            if not body or valid is None or valid[0] is not None:
                raise self.error(f"Invalid namespaced map prefix: {text}", start, self.i, recoverable=True)
            return _RawToken("#:", text, start, self.i, (body, False))
        if nxt == "#":
            m = _CONSTITUENT.match(src, start + 2)
            name = m.group() if m else ""
            self.i = m.end() if m else start + 2
            if name not in _SYMBOLIC:
                raise self.error(f"Unknown symbolic value: ##{name}", start, self.i, recoverable=True)
            return _RawToken("##", src[start:self.i], start, self.i, _SYMBOLIC[name])
        if nxt and _CONSTITUENT.match(nxt) and nxt not in "#%'":
            m = _CONSTITUENT.match(src, start + 1)
            self.i = m.end()
            tag = m.group()
            parts = _split_name(tag)
            if parts is None or tag[0].isdigit():
                raise self.error(f"Invalid tag: #{tag}", start, self.i, recoverable=True)
            return _RawToken("#tag", "#" + tag, start, self.i, parts)
        self.i = start + (2 if nxt else 1)
        raise self.error(f"No dispatch macro for: #{nxt}", start, self.i, recoverable=True)

    def number_token(self, text: str, start: int) -> _RawToken:
        end = self.i
        m = _INT.fullmatch(text)
        if m:
            sign = -1 if m.group(1) == "-" else 1
            big = m.group(9) is not None
            if m.group(8) is not None:
                raise self.error(f"Invalid number: {text}", start, end, recoverable=True)
            if m.group(2) is not None:
                value, subtype = 0, "int"
            elif m.group(3) is not None:
                value, subtype = int(m.group(3)), "int"
            elif m.group(4) is not None:
                value, subtype = int(m.group(4), 16), "hex"
            elif m.group(5) is not None:
                value, subtype = int(m.group(5), 8), "octal"
            else:
                radix = int(m.group(6))
                try:
                    if not 2 <= radix <= 36:
                        raise ValueError
                    value = int(m.group(7), radix)
                except ValueError:
                    raise self.error(f"Invalid number: {text}", start, end, recoverable=True) from None
                subtype = "radix"
            if big and subtype == "int":
                subtype = "bigint"
            return _RawToken("number", text, start, end, (sign * value, subtype))
        m = _FLOAT.fullmatch(text)
        if m:
            if m.group(3):
                return _RawToken("number", text, start, end, (Decimal(text[:-1]), "decimal"))
            return _RawToken("number", text, start, end, (float(text), "float"))
        m = _RATIO.fullmatch(text)
        if m and int(m.group(2)) != 0:
            return _RawToken("number", text, start, end, (Fraction(int(m.group(1)), int(m.group(2))), "ratio"))
        raise self.error(f"Invalid number: {text}", start, end, recoverable=True)

    def symbol_token(self, text: str, start: int) -> _RawToken:
        if text in ("nil", "true", "false"):
            return _RawToken(text, text, start, self.i)
        parts = _split_name(text)
        if parts is None:
            raise self.error(f"Invalid token: {text}", start, self.i, recoverable=True)
        return _RawToken("symbol", text, start, self.i, parts)


def _split_name(text: str) -> tuple[str | None, str] | None:
    """Split ``ns/name``; returns None for malformed names."""
    if not text:
        return None
    if text == "/":
        return None, "/"
    if text.endswith("//") and len(text) > 2:
        return text[:-2], "/"
    if "/" not in text:
        return None, text
    idx = text.rindex("/")
    ns, name = text[:idx], text[idx + 1:]
    if not ns or not name or ns.endswith("/"):
        return None
    return ns, name


def tokenize(source: str) -> tuple[list[Token], list[CommentRecord]]:
    """Split ``source`` into lexical tokens and side-band comments.

    Raises :class:`LexError` on the first lexical problem, including closing
    delimiters that do not match an opener.
    """
    positions = _Positions(source)
    lexer = _Lexer(source, positions)
    tokens: list[Token] = []
    stack: list[str] = []
    while True:
        raw = lexer.next()
        if raw is None:
            break
        if raw.kind in OPENERS:
            stack.append(OPENERS[raw.kind])
        elif raw.kind in CLOSERS:
            if not stack or stack.pop() != raw.kind:
                raise lexer.error(f"Unmatched delimiter: {raw.kind}", raw.start, raw.end)
        tokens.append(Token(raw.kind, raw.text, positions.span(raw.start, raw.end)))
    return tokens, [c for _, c in lexer.comments]


# ---------------------------------------------------------------------------
# Reading
# ---------------------------------------------------------------------------

_PREFIX_KINDS = {
    "'": Kind.QUOTE, "`": Kind.SYNTAX_QUOTE, "~": Kind.UNQUOTE, "~@": Kind.UNQUOTE_SPLICING,
    "@": Kind.DEREF, "#'": Kind.VAR_QUOTE, "#_": Kind.DISCARD,
}
_COLLECTION_KINDS = {"(": Kind.LIST, "[": Kind.VECTOR, "{": Kind.MAP, "#{": Kind.SET}
_META_KINDS = frozenset({Kind.SYMBOL, Kind.KEYWORD, Kind.STRING, Kind.MAP, Kind.VECTOR})
_RESYNC = re.compile(r"\n(?=\()")


class _Parser:
    def __init__(self, source: str):
        self.src = source
        self.positions = _Positions(source)
        self.lexer = _Lexer(source, self.positions)
        self.soft: list[ReadError] = []
        self.in_anon_fn = False

    def span(self, start: int, end: int) -> Span:
        return self.positions.span(start, end)

    def next_token(self) -> _RawToken | None:
        while True:
            try:
                return self.lexer.next()
            except LexError as e:
                if not e.recoverable:
                    raise
                self.soft.append(e)

    def read_next(self, owner: _RawToken, what: str) -> Form:
        """Read the form following a prefix token."""
        tok = self.next_token()
        if tok is None or tok.kind in CLOSERS:
            end = tok.start if tok is not None else len(self.src)
            raise ReadError(f"{what} with no target", self.span(owner.start, end))
        return self.parse(tok)

    def read_seq(self, open_tok: _RawToken, closer: str) -> tuple[list[Form], int]:
        items: list[Form] = []
        while True:
            tok = self.next_token()
            if tok is None:
                line = self.positions.pos(open_tok.start).line
                raise ReadError(f"EOF while reading, starting at line {line}",
                                self.span(open_tok.start, len(self.src)))
            if tok.kind in CLOSERS:
                if tok.kind != closer:
                    raise ReadError(f"Unmatched delimiter: {tok.kind}", self.span(tok.start, tok.end))
                return items, tok.end
            items.append(self.parse(tok))

    def parse(self, tok: _RawToken) -> Form:
        kind = tok.kind
        if kind in _COLLECTION_KINDS:
            items, end = self.read_seq(tok, OPENERS[kind])
            form = Form(_COLLECTION_KINDS[kind], self.span(tok.start, end), tuple(items))
            if form.kind is Kind.MAP and len(form.items) % 2:
                self.soft.append(ReadError("Map literal must contain an even number of forms", form.span, True))
            return form
        if kind == "#(":
            return self.parse_anon_fn(tok)
        if kind in ("#?(", "#?@("):
            items, end = self.read_seq(tok, ")")
            form = Form(Kind.READER_COND, self.span(tok.start, end), tuple(items), text=kind,
                        splicing=kind == "#?@(")
            visible = form.items
            if len(visible) % 2:
                self.soft.append(ReadError("read-cond requires an even number of forms", form.span, True))
            elif any(f.kind is not Kind.KEYWORD for f in visible[::2]):
                self.soft.append(ReadError("Feature should be a keyword", form.span, True))
            return form
        if kind in _PREFIX_KINDS:
            target = self.read_next(tok, {"#_": "discard"}.get(kind, "reader macro " + kind))
            return Form(_PREFIX_KINDS[kind], Span(self.positions.pos(tok.start), target.span.end), (target,), text=kind)
        if kind == "^":
            meta = self.read_next(tok, "metadata")
            if meta.kind not in _META_KINDS:
                self.soft.append(ReadError("Metadata must be Symbol, Keyword, String, Map or Vector", meta.span, True))
            target = self.read_next(tok, "metadata")
            return Form(Kind.META, Span(self.positions.pos(tok.start), target.span.end), (meta, target), text=tok.text)
        if kind == "#:":
            inner = self.read_next(tok, "namespaced map")
            ns, auto = tok.value
            if inner.kind is not Kind.MAP:
                self.soft.append(ReadError("Namespaced map must specify a map", inner.span, True))
            return Form(Kind.NS_MAP, Span(self.positions.pos(tok.start), inner.span.end), (inner,), text=tok.text,
                        ns=ns, auto=auto)
        if kind == "#tag":
            tag_ns, tag_name = tok.value
            tag = Form(Kind.SYMBOL, self.span(tok.start + 1, tok.end), text=tok.text[1:], ns=tag_ns, name=tag_name)
            target = self.read_next(tok, "tagged literal")
            return Form(Kind.TAGGED, Span(self.positions.pos(tok.start), target.span.end), (tag, target), text=tok.text)
        span = self.span(tok.start, tok.end)
        if kind == "symbol":
            ns, name = tok.value
            return Form(Kind.SYMBOL, span, text=tok.text, ns=ns, name=name)
        if kind == "keyword":
            ns, name, auto = tok.value
            return Form(Kind.KEYWORD, span, text=tok.text, ns=ns, name=name, auto=auto)
        if kind == "number":
            value, subtype = tok.value
            return Form(Kind.NUMBER, span, text=tok.text, value=value, subtype=subtype)
        if kind == "##":
            return Form(Kind.NUMBER, span, text=tok.text, value=tok.value, subtype="symbolic")
        if kind == "string":
            return Form(Kind.STRING, span, text=tok.text, value=tok.value)
        if kind == "regex":
            return Form(Kind.REGEX, span, text=tok.text, value=tok.value)
        if kind == "char":
            return Form(Kind.CHAR, span, text=tok.text, value=tok.value)
        if kind in ("true", "false"):
            return Form(Kind.BOOL, span, text=kind, value=kind == "true")
        if kind == "nil":
            return Form(Kind.NIL, span, text="nil")
        raise ReadError(f"Unmatched delimiter: {tok.text}", span)  # pragma: no cover

    def parse_anon_fn(self, tok: _RawToken) -> Form:
        if self.in_anon_fn:
            self.soft.append(ReadError("Nested #()s are not allowed", self.span(tok.start, tok.end), True))
        outer, self.in_anon_fn = self.in_anon_fn, True
        try:
            items, end = self.read_seq(tok, ")")
        finally:
            self.in_anon_fn = outer
        body = Form(Kind.LIST, self.span(tok.start + 1, end), tuple(items))
        max_arg, rest = 0, False
        for sym in _arg_symbols(body):
            m = _ARG.fullmatch(sym.name)
            if m.group(2):
                rest = True
            else:
                max_arg = max(max_arg, int(m.group(1) or 1))
        return Form(Kind.ANON_FN, self.span(tok.start, end), (body,), text="#", max_arg=max_arg, rest_arg=rest)


def _arg_symbols(form: Form) -> Iterator[Form]:
    stack = [form]
    while stack:
        f = stack.pop()
        if f.kind is Kind.SYMBOL:
            if f.ns is None and _ARG.fullmatch(f.name):
                yield f
        elif f.kind is not Kind.ANON_FN:
            stack.extend(f.children)


def read_forms(source: str) -> tuple[list[Form], list[CommentRecord], list[ReadError]]:
    """Read every top-level form in ``source``.

    Returns ``(forms, comments, errors)``. A top-level form containing an
    error is dropped; after unbalanced delimiters reading resumes at the next
    line that starts with ``(``.
    """
    parser = _Parser(source)
    lexer = parser.lexer
    forms: list[Form] = []
    errors: list[ReadError] = []
    while True:
        try:
            tok = parser.next_token()
        except LexError as e:
            errors.append(e)
            _resync(parser, lexer.i)
            continue
        if tok is None:
            break
        if tok.kind in CLOSERS:
            errors.append(ReadError(f"Unmatched delimiter: {tok.kind}", parser.span(tok.start, tok.end)))
            continue
        parser.soft = []
        try:
            form = parser.parse(tok)
        except RecursionError:
            errors.extend(parser.soft)
            errors.append(ReadError("Form nested too deeply", parser.span(tok.start, tok.end)))
            _resync(parser, tok.end)
            continue
        except ReadError as e:
            errors.extend(parser.soft)
            errors.append(e)
            _resync(parser, tok.end)
            continue
        if parser.soft:
            errors.extend(parser.soft)
        else:
            forms.append(form)
    errors.sort(key=lambda e: e.span.start.offset)
    return forms, [c for _, c in lexer.comments], errors


def _resync(parser: _Parser, min_pos: int) -> None:
    lexer = parser.lexer
    m = _RESYNC.search(parser.src, min_pos)
    resume = m.end() if m else lexer.n
    if resume < lexer.i:
        lexer.comments = [(i, c) for i, c in lexer.comments if i < resume]
    lexer.i = resume


# ---------------------------------------------------------------------------
# Rendering and structural comparison
# ---------------------------------------------------------------------------

_BRACKETS = {Kind.LIST: ("(", ")"), Kind.VECTOR: ("[", "]"), Kind.MAP: ("{", "}"), Kind.SET: ("#{", "}")}
_PREFIX_TEXT = {v: k for k, v in _PREFIX_KINDS.items()}


def render(form: Form) -> str:
    """Print ``form`` as single-line source text that reads back equal."""
    kind = form.kind
    if kind in _BRACKETS:
        open_, close = _BRACKETS[kind]
        return open_ + " ".join(render(c) for c in form.children) + close
    if kind in _PREFIX_TEXT:
        inner = render(form.children[0])
        sep = " " if kind is Kind.UNQUOTE and inner.startswith("@") else ""
        return _PREFIX_TEXT[kind] + sep + inner
    if kind is Kind.META:
        return "^" + render(form.children[0]) + " " + render(form.children[1])
    if kind is Kind.ANON_FN:
        return "#" + render(form.children[0])
    if kind is Kind.TAGGED:
        return "#" + render(form.children[0]) + " " + render(form.children[1])
    if kind is Kind.READER_COND:
        return ("#?@(" if form.splicing else "#?(") + " ".join(render(c) for c in form.children) + ")"
    if kind is Kind.NS_MAP:
        prefix = "#::" if form.auto else "#:"
        return prefix + (form.ns or "") + render(form.children[0])
    if form.text:
        return form.text
    return _atom_text(form)


def _atom_text(form: Form) -> str:
    kind = form.kind
    if kind in (Kind.SYMBOL, Kind.KEYWORD):
        name = form.name if form.ns is None else f"{form.ns}/{form.name}"
        if kind is Kind.KEYWORD:
            return ("::" if form.auto else ":") + name
        return name
    if kind is Kind.STRING:
        return '"' + form.value.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if kind is Kind.REGEX:
        return '#"' + form.value + '"'
    if kind is Kind.BOOL:
        return "true" if form.value else "false"
    if kind is Kind.NIL:
        return "nil"
    if kind is Kind.CHAR:
        names = {v: k for k, v in _CHAR_NAMES.items()}
        return "\\" + names.get(form.value, form.value)
    return str(form.value)


def shape(form: Form) -> tuple:
    """Hashable structural key of ``form``, ignoring spans and layout."""
    kind = form.kind
    if kind in (Kind.SYMBOL, Kind.KEYWORD):
        payload = (form.ns, form.name, form.auto)
    elif kind is Kind.NUMBER:
        payload = (form.text, form.subtype)
    elif kind in (Kind.STRING, Kind.REGEX, Kind.CHAR, Kind.BOOL):
        payload = (form.value,)
    elif kind is Kind.ANON_FN:
        payload = (form.max_arg, form.rest_arg)
    elif kind is Kind.READER_COND:
        payload = (form.splicing,)
    elif kind is Kind.NS_MAP:
        payload = (form.ns, form.auto)
    else:
        payload = ()
    return (kind.value, payload, tuple(shape(c) for c in form.children))


def forms_equal(a: Form, b: Form) -> bool:
    return shape(a) == shape(b)


def iter_forms(form: Form, *, discards: bool = True) -> Iterator[Form]:
    """Pre-order traversal of ``form`` and all its descendants."""
    stack = [form]
    while stack:
        f = stack.pop()
        if f.kind is Kind.DISCARD and not discards:
            continue
        yield f
        stack.extend(reversed(f.children))
