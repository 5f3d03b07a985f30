"""Tokenizer shared by the domain and scenario parsers."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Optional

from .errors import Diagnostic, SourceSpan


@dataclass(frozen=True)
class Token:
    kind: str  # IDENT | INT | STRING | OP | ATTR | NEWLINE | EOF
    text: str
    value: object
    span: SourceSpan


UNICODE_ALIASES = {
    "¬": "not", "∧": "and", "∨": "or", "⊃": "implies", "→": "implies",
    "∈": "in", "∉": "notin", "⊆": "subset", "∪": "union", "∩": "inter",
    "≠": "!=", "≤": "<=", "≥": ">=", "∀": "forall", "∃": "exists",
}

# longest first
SYMBOLS = (">>", "<=", ">=", "!=", "=", "<", ">", "+", "-", "*", "/", "%",
           "(", ")", "{", "}", "[", "]", ",", ":", ";", "|", ".")

WORD_OPS = {"not", "and", "or", "implies", "in", "notin", "subset", "union", "inter",
            "forall", "exists"}

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_INT = re.compile(r"[0-9]+")
_STRING = re.compile(r'"(?:[^"\\\n]|\\.)*"')


def tokenize(text: str, file: str = "<input>", newlines: bool = False) -> tuple[list[Token], list[Diagnostic]]:
    """Split ``text`` into tokens.

    Unicode connectives are mapped to their ASCII keywords.  A ``.`` glued to
    an identifier on both sides (``ev.priority``) becomes an ``ATTR`` token;
    any other ``.`` is the quantifier separator.
    """
    tokens: list[Token] = []
    diags: list[Diagnostic] = []
    line, line_start = 1, 0
    i, n = 0, len(text)

    def span(start: int, end: int) -> SourceSpan:
        return SourceSpan(file, start, end, line, start - line_start + 1)

    while i < n:
        c = text[i]
        if c == "\n":
            if newlines:
                tokens.append(Token("NEWLINE", "\n", None, span(i, i + 1)))
            i += 1
            line, line_start = line + 1, i
            continue
        if c in " \t\r":
            i += 1
            continue
        if c == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        m = _IDENT.match(text, i)
        if m:
            word = m.group()
            kind = "OP" if word in WORD_OPS else "IDENT"
            tokens.append(Token(kind, word, word, span(i, m.end())))
            i = m.end()
            continue
        m = _INT.match(text, i)
        if m:
            tokens.append(Token("INT", m.group(), int(m.group()), span(i, m.end())))
            i = m.end()
            continue
        if c == '"':
            m = _STRING.match(text, i)
            if not m:
                diags.append(Diagnostic("UnterminatedString", "string literal is not closed", span=span(i, i + 1)))
                while i < n and text[i] != "\n":
                    i += 1
                continue
            try:
                value = json.loads(m.group())
            except ValueError:
                diags.append(Diagnostic("BadString", f"invalid string literal {m.group()}", span=span(i, m.end())))
                value = ""
            tokens.append(Token("STRING", m.group(), value, span(i, m.end())))
            i = m.end()
            continue
        if c in UNICODE_ALIASES:
            word = UNICODE_ALIASES[c]
            tokens.append(Token("OP", word, word, span(i, i + 1)))
            i += 1
            continue
        sym = _symbol_at(text, i)
        if sym is not None:
            if sym == "." and _glued_attr(text, i, tokens):
                tokens.append(Token("ATTR", ".", None, span(i, i + 1)))
            else:
                tokens.append(Token("OP", sym, sym, span(i, i + len(sym))))
            i += len(sym)
            continue
        diags.append(Diagnostic("UnexpectedCharacter", f"unexpected character {c!r}", span=span(i, i + 1)))
        i += 1

    tokens.append(Token("EOF", "", None, span(n, n)))
    return tokens, diags


def _symbol_at(text: str, i: int) -> Optional[str]:
    for sym in SYMBOLS:
        if text.startswith(sym, i):
            return sym
    return None


def _glued_attr(text: str, i: int, tokens: list[Token]) -> bool:
    if not tokens or text[i - 1].isspace():
        return False
    prev = tokens[-1]
    if prev.kind != "IDENT" and prev.text not in (")", "]", "}"):
        return False
    return _IDENT.match(text, i + 1) is not None
