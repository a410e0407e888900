"""Immutable token model and a Java-subset lexer.

The lexer covers the lexical structure of small stand-alone Java programs:
identifiers, reserved words, decimal/hex/float literals, string and char
literals, line and block comments, and all operators/separators. It produces
token boundaries and classes only; there is no parser and no AST.

The canonical token-class table lives in docs/token-classes.md and is frozen
there; `classify` implements exactly that table.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum


class TokenClass(str, Enum):
    IDENTIFIER = "identifier"
    KEYWORD = "keyword"
    TYPE = "type"
    MODIFIER = "modifier"
    OPERATOR = "operator"
    LITERAL = "literal"
    SEPARATOR = "separator"
    COMMENT = "comment"


class LexError(ValueError):
    """Raised on an unlexable character; carries 1-based line and 0-based col."""

    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{message} (line {line}, col {col})")
        self.line = line
        self.col = col


class OutOfRange(IndexError):
    pass


@dataclass(frozen=True)
class Token:
    """One lexed token. `line` is 1-based; columns are 0-based offsets in that line."""

    index: int
    text: str
    line: int
    col_start: int
    col_end: int
    token_class: TokenClass


# Reserved-word sub-split per the frozen class table: primitive type names go
# to TYPE, access/storage modifiers to MODIFIER, everything else stays KEYWORD.
# true/false/null lex as reserved words but are literals.
PRIMITIVE_TYPES = frozenset(
    {"boolean", "byte", "char", "short", "int", "long", "float", "double", "void"}
)
BOXED_TYPES = frozenset(
    {
        "Boolean",
        "Byte",
        "Character",
        "Short",
        "Integer",
        "Long",
        "Float",
        "Double",
        "Void",
        "String",
    }
)
MODIFIERS = frozenset(
    {
        "public",
        "protected",
        "private",
        "static",
        "final",
        "abstract",
        "synchronized",
        "native",
        "transient",
        "volatile",
        "strictfp",
    }
)
WORD_LITERALS = frozenset({"true", "false", "null"})
KEYWORDS = frozenset(
    {
        "assert",
        "break",
        "case",
        "catch",
        "class",
        "const",
        "continue",
        "default",
        "do",
        "else",
        "enum",
        "extends",
        "finally",
        "for",
        "goto",
        "if",
        "implements",
        "import",
        "instanceof",
        "interface",
        "new",
        "package",
        "return",
        "super",
        "switch",
        "this",
        "throw",
        "throws",
        "try",
        "while",
    }
)

# Longest match first. Angle brackets are always operators (generics are not
# disambiguated without a parser; the class table documents this).
OPERATORS = tuple(
    sorted(
        {
            ">>>=",
            "<<=",
            ">>=",
            ">>>",
            "==",
            "!=",
            "<=",
            ">=",
            "&&",
            "||",
            "++",
            "--",
            "+=",
            "-=",
            "*=",
            "/=",
            "&=",
            "|=",
            "^=",
            "%=",
            "<<",
            ">>",
            "->",
            "=",
            ">",
            "<",
            "!",
            "~",
            "?",
            ":",
            "+",
            "-",
            "*",
            "/",
            "&",
            "|",
            "^",
            "%",
        },
        key=len,
        reverse=True,
    )
)

SEPARATORS = tuple(sorted({"...", "::", "(", ")", "{", "}", "[", "]", ";", ",", ".", "@"}, key=len, reverse=True))


def classify_word(word: str) -> TokenClass:
    """Class of an identifier-shaped lexeme per the frozen table."""
    if word in PRIMITIVE_TYPES or word in BOXED_TYPES:
        return TokenClass.TYPE
    if word in MODIFIERS:
        return TokenClass.MODIFIER
    if word in WORD_LITERALS:
        return TokenClass.LITERAL
    if word in KEYWORDS:
        return TokenClass.KEYWORD
    return TokenClass.IDENTIFIER


def classify(token_text: str, lexical_kind: str) -> TokenClass:
    """Map (text, lexical kind) to its class. Total for lexer-produced tokens.

    `lexical_kind` is one of: word, number, string, char, operator, separator,
    comment.
    """
    if lexical_kind == "word":
        return classify_word(token_text)
    if lexical_kind in ("number", "string", "char"):
        return TokenClass.LITERAL
    if lexical_kind == "operator":
        return TokenClass.OPERATOR
    if lexical_kind == "separator":
        return TokenClass.SEPARATOR
    if lexical_kind == "comment":
        return TokenClass.COMMENT
    raise ValueError(f"unknown lexical kind: {lexical_kind!r}")


def _is_ident_start(ch: str) -> bool:
    return ch.isalpha() or ch in "_$"


def _is_ident_part(ch: str) -> bool:
    return ch.isalnum() or ch in "_$"


class _Scanner:
    """Character scanner over one source string, tracking line/col."""

    def __init__(self, source: str, lenient: bool = False):
        self.src = source
        self.n = len(source)
        self.i = 0
        self.line = 1
        self.col = 0
        self.lenient = lenient
        self.out: list[Token] = []

    def error(self, message: str) -> LexError:
        return LexError(message, self.line, self.col)

    def peek(self, offset: int = 0) -> str:
        j = self.i + offset
        return self.src[j] if j < self.n else ""

    def advance(self) -> None:
        ch = self.src[self.i]
        self.i += 1
        if ch == "\n":
            self.line += 1
            self.col = 0
        else:
            self.col += 1

    def emit(self, start_i: int, start_line: int, start_col: int, kind: str) -> None:
        text = self.src[start_i : self.i]
        # A token never spans lines; multi-line lexemes are split by the caller.
        self.out.append(
            Token(
                index=len(self.out),
                text=text,
                line=start_line,
                col_start=start_col,
                col_end=start_col + len(text),
                token_class=classify(text, kind),
            )
        )

    def run(self) -> list[Token]:
        while self.i < self.n:
            ch = self.peek()
            if ch in " \t\r\n\f":
                self.advance()
            elif ch == "/" and self.peek(1) == "/":
                self.line_comment()
            elif ch == "/" and self.peek(1) == "*":
                self.block_comment()
            elif _is_ident_start(ch):
                self.word()
            elif ch.isdigit() or (ch == "." and self.peek(1).isdigit()):
                self.number()
            elif ch == '"':
                self.string('"', "string")
            elif ch == "'":
                self.string("'", "char")
            else:
                self.punct(ch)
        return self.out

    def word(self) -> None:
        start, line, col = self.i, self.line, self.col
        while self.i < self.n and _is_ident_part(self.peek()):
            self.advance()
        self.emit(start, line, col, "word")

    def number(self) -> None:
        start, line, col = self.i, self.line, self.col
        if self.peek() == "0" and self.peek(1) in ("x", "X"):
            self.advance()
            self.advance()
            while self.peek() and (self.peek() in "0123456789abcdefABCDEF_"):
                self.advance()
        else:
            seen_exp = False
            while True:
                ch = self.peek()
                if ch.isdigit() or ch == "_":
                    self.advance()
                elif ch == "." and self.peek(1).isdigit():
                    self.advance()
                elif ch in "eE" and not seen_exp and (self.peek(1).isdigit() or (self.peek(1) in "+-" and self.peek(2).isdigit())):
                    seen_exp = True
                    self.advance()
                    if self.peek() in "+-":
                        self.advance()
                else:
                    break
        if self.peek() and self.peek() in "lLfFdD":
            self.advance()
        self.emit(start, line, col, "number")

    def string(self, quote: str, kind: str) -> None:
        start, line, col = self.i, self.line, self.col
        self.advance()
        while True:
            ch = self.peek()
            if ch == "" or ch == "\n":
                if self.lenient:
                    self.emit(start, line, col, kind)
                    return
                raise LexError(f"unterminated {kind} literal", line, col)
            if ch == "\\":
                self.advance()
                if self.peek() and self.peek() != "\n":
                    self.advance()
                continue
            self.advance()
            if ch == quote:
                break
        self.emit(start, line, col, kind)

    def line_comment(self) -> None:
        start, line, col = self.i, self.line, self.col
        while self.i < self.n and self.peek() != "\n":
            self.advance()
        self.emit(start, line, col, "comment")

    def block_comment(self) -> None:
        # Emitted as one comment token per line so every token stays on a
        # single line with in-line column offsets.
        start, line, col = self.i, self.line, self.col
        open_line, open_col = self.line, self.col
        self.advance()
        self.advance()
        while True:
            ch = self.peek()
            if ch == "":
                if self.lenient:
                    break
                raise LexError("unterminated block comment", open_line, open_col)
            if ch == "\n":
                if self.i > start:
                    self.emit(start, line, col, "comment")
                self.advance()
                while self.peek() in (" ", "\t"):
                    self.advance()
                start, line, col = self.i, self.line, self.col
                continue
            if ch == "*" and self.peek(1) == "/":
                self.advance()
                self.advance()
                break
            self.advance()
        if self.i > start:
            self.emit(start, line, col, "comment")

    def punct(self, ch: str) -> None:
        start, line, col = self.i, self.line, self.col
        for sep in SEPARATORS:
            if self.src.startswith(sep, self.i):
                for _ in sep:
                    self.advance()
                self.emit(start, line, col, "separator")
                return
        for op in OPERATORS:
            if self.src.startswith(op, self.i):
                for _ in op:
                    self.advance()
                self.emit(start, line, col, "operator")
                return
        if self.lenient:
            self.advance()
            self.emit(start, line, col, "separator")
            return
        raise self.error(f"unexpected character {ch!r}")


def tokenize(source: str) -> list[Token]:
    """Lex `source` into tokens. Pure; raises LexError with position on bad input."""
    return _Scanner(source).run()


def tokenize_line(text: str) -> list[Token]:
    """Lenient single-line lexing for in-progress edits.

    Unterminated literals/comments swallow the rest of the line and unknown
    characters become one-character separator tokens, so any editable line
    state lexes to something. Line numbers in the result are all 1.
    """
    if "\n" in text:
        raise ValueError("tokenize_line expects a single line")
    return _Scanner(text, lenient=True).run()


@dataclass(frozen=True)
class Snippet:
    """A buggy code snippet: id, source text, token stream, marked buggy line."""

    snippet_id: str
    source: str
    buggy_line: int
    description: str = ""
    tokens: tuple[Token, ...] = field(default=(), compare=False)

    @staticmethod
    def from_source(snippet_id: str, source: str, buggy_line: int, description: str = "") -> "Snippet":
        tokens = tuple(tokenize(source))
        snip = Snippet(snippet_id, source, buggy_line, description, tokens)
        if not 1 <= buggy_line <= snip.line_count:
            raise ValueError(f"buggy_line {buggy_line} outside snippet {snippet_id!r}")
        lo, hi = snip.line_token_range(buggy_line)
        if lo == hi:
            raise ValueError(f"buggy_line {buggy_line} of {snippet_id!r} holds no tokens")
        return snip

    @property
    def line_count(self) -> int:
        return self.source.count("\n") + 1

    @property
    def lines(self) -> list[str]:
        return self.source.split("\n")

    def line_token_range(self, line: int) -> tuple[int, int]:
        """Half-open [lo, hi) index range of tokens on `line` (possibly empty)."""
        if not 1 <= line <= self.line_count:
            raise OutOfRange(f"line {line} outside 1..{self.line_count}")
        lo = len(self.tokens)
        hi = 0
        for tok in self.tokens:
            if tok.line == line:
                lo = min(lo, tok.index)
                hi = max(hi, tok.index + 1)
        if hi == 0:
            return (0, 0)
        return (lo, hi)

    def line_tokens(self, line: int) -> list[Token]:
        lo, hi = self.line_token_range(line)
        return list(self.tokens[lo:hi])

    def buggy_line_indices(self) -> frozenset[int]:
        lo, hi = self.line_token_range(self.buggy_line)
        return frozenset(range(lo, hi))

    def check_invariants(self) -> None:
        """Assert index order, column integrity, coverage, and round-trip."""
        pos = 0
        lines = self.lines
        for k, tok in enumerate(self.tokens):
            if tok.index != k:
                raise AssertionError(f"token index {tok.index} != position {k}")
            if not tok.col_start < tok.col_end:
                raise AssertionError(f"token {k} has empty column span")
            if len(tok.text) != tok.col_end - tok.col_start:
                raise AssertionError(f"token {k} text length mismatches span")
            line_text = lines[tok.line - 1]
            if line_text[tok.col_start : tok.col_end] != tok.text:
                raise AssertionError(f"token {k} text diverges from source slice")
            # absolute offset of the token start
            abs_start = sum(len(l) + 1 for l in lines[: tok.line - 1]) + tok.col_start
            gap = self.source[pos:abs_start]
            if gap.strip():
                raise AssertionError(f"non-whitespace {gap!r} not covered by tokens")
            pos = abs_start + len(tok.text)
        if self.source[pos:].strip():
            raise AssertionError("trailing non-whitespace not covered by tokens")


@dataclass(frozen=True)
class AttentionVector:
    """Non-negative per-token weights over the original tokens of one snippet."""

    snippet_id: str
    weights: tuple[float, ...]

    def __post_init__(self) -> None:
        for w in self.weights:
            if not (w >= 0.0):
                raise ValueError(f"negative or NaN attention weight {w!r}")

    def __len__(self) -> int:
        return len(self.weights)

    def total(self) -> float:
        return float(sum(self.weights))


def compute_window(snippet: Snippet, cursor_token_index: int) -> list[int]:
    """Unblur window: cursor plus three tokens each side, clipped to the cursor's line.

    Returns the sorted token indices; size is always within [1, 7].
    """
    if not 0 <= cursor_token_index < len(snippet.tokens):
        raise OutOfRange(f"token index {cursor_token_index} outside snippet")
    line = snippet.tokens[cursor_token_index].line
    lo, hi = snippet.line_token_range(line)
    start = max(cursor_token_index - 3, lo)
    end = min(cursor_token_index + 3, hi - 1)
    return list(range(start, end + 1))
