"""Indentation-aware tokenizer for the scenario-language fragment."""
from __future__ import annotations

from dataclasses import dataclass

from ..errors import LexError
from .ast import SourceSpan

KEYWORDS = frozenset(
    """behavior try interrupt when do until take terminate if elif else
    choose shuffle require param new with on facing at after and or not in
    can see distance from to""".split()
)

# Constructs outside the supported fragment; lexed so the parser can reject
# them with a dedicated diagnostic instead of a generic syntax error.
RESERVED = frozenset(
    "abort override for while scenario compose simulate record monitor".split()
)

OPERATORS = (
    "<=", ">=", "==", "!=",
    "(", ")", "[", "]", "{", "}", ",", "=", "<", ">", "+", "-", "*", "/", ".", ":",
)


@dataclass(frozen=True)
class Token:
    type: str  # KEYWORD RESERVED NAME NUMBER STRING OP NEWLINE INDENT DEDENT EOF
    value: str
    span: SourceSpan

    def __repr__(self):
        return f"Token({self.type}, {self.value!r})"


def _is_ident_start(ch):
    return ch.isalpha() or ch == "_"


def _is_ident_char(ch):
    return ch.isalnum() or ch == "_"


def tokenize(source: str) -> list:
    """Tokenize `source`, converting leading whitespace into INDENT/DEDENT.

    Indentation must be all-spaces or all-tabs per file; a mix raises
    LexError.  Newlines inside parentheses/brackets/braces are suppressed.
    """
    tokens: list = []
    indents = [0]
    indent_char = None
    paren_depth = 0
    pos = 0
    line_no = 1
    line_start = 0
    n = len(source)
    at_line_start = True

    def span(start, end):
        return SourceSpan(start, end, line_no, start - line_start + 1)

    while pos < n:
        if at_line_start and paren_depth == 0:
            ws_start = pos
            seen = set()
            while pos < n and source[pos] in " \t":
                seen.add(source[pos])
                pos += 1
            if pos < n and source[pos] in "\n#":
                # blank or comment-only line
                if pos < n and source[pos] == "#":
                    while pos < n and source[pos] != "\n":
                        pos += 1
                if pos < n:
                    pos += 1
                    line_no += 1
                    line_start = pos
                continue
            if pos >= n:
                break
            if len(seen) == 2:
                raise LexError("mixed tabs and spaces in indentation", span(ws_start, pos))
            if seen:
                ch = seen.pop()
                if indent_char is None:
                    indent_char = ch
                elif ch != indent_char:
                    raise LexError(
                        "inconsistent indentation character", span(ws_start, pos)
                    )
            width = pos - ws_start
            if width > indents[-1]:
                indents.append(width)
                tokens.append(Token("INDENT", "", span(ws_start, pos)))
            else:
                while width < indents[-1]:
                    indents.pop()
                    tokens.append(Token("DEDENT", "", span(ws_start, pos)))
                if width != indents[-1]:
                    raise LexError("unindent does not match any outer level", span(ws_start, pos))
            at_line_start = False
            continue

        ch = source[pos]
        if ch == "\n":
            if paren_depth == 0:
                if tokens and tokens[-1].type not in ("NEWLINE", "INDENT"):
                    tokens.append(Token("NEWLINE", "\n", span(pos, pos + 1)))
                at_line_start = True
            pos += 1
            line_no += 1
            line_start = pos
            continue
        if ch in " \t":
            pos += 1
            continue
        if ch == "#":
            while pos < n and source[pos] != "\n":
                pos += 1
            continue
        if ch == "\\" and pos + 1 < n and source[pos + 1] == "\n":
            pos += 2
            line_no += 1
            line_start = pos
            continue
        if _is_ident_start(ch):
            start = pos
            while pos < n and _is_ident_char(source[pos]):
                pos += 1
            word = source[start:pos]
            if word in KEYWORDS:
                tokens.append(Token("KEYWORD", word, span(start, pos)))
            elif word in RESERVED:
                tokens.append(Token("RESERVED", word, span(start, pos)))
            else:
                tokens.append(Token("NAME", word, span(start, pos)))
            continue
        if ch.isdigit():
            start = pos
            while pos < n and source[pos].isdigit():
                pos += 1
            if pos < n and source[pos] == "." and pos + 1 < n and source[pos + 1].isdigit():
                pos += 1
                while pos < n and source[pos].isdigit():
                    pos += 1
            if pos < n and source[pos] in "eE":
                mark = pos
                pos += 1
                if pos < n and source[pos] in "+-":
                    pos += 1
                if pos < n and source[pos].isdigit():
                    while pos < n and source[pos].isdigit():
                        pos += 1
                else:
                    pos = mark
            tokens.append(Token("NUMBER", source[start:pos], span(start, pos)))
            continue
        if ch in "'\"":
            quote = ch
            start = pos
            pos += 1
            buf = []
            while pos < n and source[pos] != quote:
                if source[pos] == "\n":
                    raise LexError("unterminated string", span(start, pos))
                if source[pos] == "\\" and pos + 1 < n:
                    buf.append(source[pos + 1])
                    pos += 2
                    continue
                buf.append(source[pos])
                pos += 1
            if pos >= n:
                raise LexError("unterminated string", span(start, pos))
            pos += 1
            tokens.append(Token("STRING", "".join(buf), span(start, pos)))
            continue
        matched = False
        for op in OPERATORS:
            if source.startswith(op, pos):
                if op in "([{":
                    paren_depth += 1
                elif op in ")]}":
                    paren_depth = max(0, paren_depth - 1)
                tokens.append(Token("OP", op, span(pos, pos + len(op))))
                pos += len(op)
                matched = True
                break
        if matched:
            continue
        raise LexError(f"unexpected character {ch!r}", span(pos, pos + 1))

    if tokens and tokens[-1].type not in ("NEWLINE",):
        tokens.append(Token("NEWLINE", "\n", SourceSpan(n, n, line_no, 1)))
    while len(indents) > 1:
        indents.pop()
        tokens.append(Token("DEDENT", "", SourceSpan(n, n, line_no, 1)))
    tokens.append(Token("EOF", "", SourceSpan(n, n, line_no, 1)))
    return tokens
