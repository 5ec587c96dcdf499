"""Tokenizing normalized source, cutting it into methods, counting tokens."""

from __future__ import annotations

import re
import warnings
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

from . import textscan
from .errors import NoPreferences
from .preprocessor import NormalizedSource

__all__ = [
    "TokenLine",
    "MethodChunk",
    "BagOfWords",
    "tokenize",
    "tokenize_text",
    "split_methods",
    "calTokenFrequencies",
    "is_string_token",
    "is_numeric_token",
    "is_identifier",
]

PUNCTUATION = set("(){}[],:;=.+-*/<>!&|")

_NUMBER = re.compile(r"0[xX][0-9a-fA-F_]+[lL]?|\d[\d_]*(?:\.\d[\d_]*)?(?:[eE][+-]?\d+)?[gGlLdDfFiI]?")
_IDENT = re.compile(r"[A-Za-z_][\w]*")
_SPACE = re.compile(r"\s+")
_NUMERIC_TOKEN = re.compile(r"[+-]?(?:\d[\d_]*(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?[gGlLdDfFiI]?|[+-]?0[xX][0-9a-fA-F_]+[lL]?")
_DOLLAR_REF = re.compile(r"\$([A-Za-z_]\w*(?:\.[A-Za-z_]\w*)*)")

KEYWORDS = frozenset(
    """abstract as assert boolean break byte case catch char class const continue def default do
    double else enum extends false final finally float for goto if implements import in instanceof
    int interface long native new null package private protected public return short static
    strictfp super switch synchronized this throw throws trait transient true try void volatile
    while""".split()
)


@dataclass(frozen=True)
class TokenLine:
    tokens: tuple[str, ...]
    line_no: int
    offsets: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "tokens", tuple(self.tokens))
        object.__setattr__(self, "offsets", tuple(self.offsets))
        if any(not t for t in self.tokens):
            raise ValueError("empty token")

    def __len__(self) -> int:
        return len(self.tokens)

    def __iter__(self) -> Iterator[str]:
        return iter(self.tokens)

    def adjacent(self, i: int) -> bool:
        """True when token ``i`` starts right where token ``i-1`` ends."""
        if not self.offsets or i <= 0 or i >= len(self.tokens):
            return False
        return self.offsets[i - 1] + len(self.tokens[i - 1]) == self.offsets[i]


@dataclass(frozen=True)
class MethodChunk:
    method_name: str
    signature_tokens: TokenLine
    body: tuple[TokenLine, ...]
    closing: TokenLine | None = None

    def lines(self) -> list[TokenLine]:
        out = [self.signature_tokens, *self.body]
        if self.closing is not None:
            out.append(self.closing)
        return out


class BagOfWords(Mapping[str, int]):
    """Token -> frequency for one app.  Literals are folded into ``aStr``/``aNum``."""

    def __init__(self, entries: Mapping[str, int] | None = None) -> None:
        self._entries = {k: v for k, v in (entries or {}).items() if v > 0}

    def __getitem__(self, key: str) -> int:
        return self._entries[key]

    def __iter__(self) -> Iterator[str]:
        return iter(self._entries)

    def __len__(self) -> int:
        return len(self._entries)

    def __repr__(self) -> str:
        return f"BagOfWords({self._entries!r})"

    def total(self) -> int:
        return sum(self._entries.values())

    def to_dict(self) -> dict[str, int]:
        return dict(sorted(self._entries.items()))


def is_string_token(tok: str) -> bool:
    return tok[:1] in ("'", '"')


def is_numeric_token(tok: str) -> bool:
    return bool(_NUMERIC_TOKEN.fullmatch(tok))


def is_identifier(tok: str) -> bool:
    return bool(_IDENT.fullmatch(tok)) and tok not in KEYWORDS


def interpolated_identifiers(literal: str) -> list[str]:
    """Identifiers referenced from ``${...}`` and ``$name`` inside a GString."""
    if not literal.startswith('"'):
        return []
    out: list[str] = []
    i = 0
    n = len(literal)
    while i < n:
        if literal[i] == "\\":
            i += 2
            continue
        if literal.startswith("${", i):
            end = i + 2
            depth = 1
            while end < n and depth:
                ch = literal[end]
                if ch in "'\"":
                    end = textscan.skip_string(literal, end)
                    continue
                depth += {"{": 1, "}": -1}.get(ch, 0)
                end += 1
            inner = literal[i + 2 : end - 1]
            out.extend(t for t, _ in _raw_tokens(inner) if _IDENT.fullmatch(t))
            i = end
            continue
        m = _DOLLAR_REF.match(literal, i)
        if m:
            out.extend(m.group(1).split("."))
            i = m.end()
            continue
        i += 1
    return out


def _raw_tokens(text: str) -> Iterator[tuple[str, int]]:
    spans = {sp.start: sp.end for sp in textscan.string_spans(text)}
    i = 0
    n = len(text)
    while i < n:
        if i in spans:
            end = spans[i]
            literal = text[i:end]
            yield literal, i
            for ident in interpolated_identifiers(literal):
                yield ident, i
            i = end
            continue
        m = _SPACE.match(text, i)
        if m:
            i = m.end()
            continue
        m = _NUMBER.match(text, i)
        if m and not (i > 0 and (text[i - 1].isalnum() or text[i - 1] == "_")):
            yield m.group(), i
            i = m.end()
            continue
        m = _IDENT.match(text, i)
        if m:
            yield m.group(), i
            i = m.end()
            continue
        yield text[i], i
        i += 1


def tokenize_text(text: str, line_no: int = 1) -> TokenLine:
    pairs = list(_raw_tokens(text))
    return TokenLine(tuple(t for t, _ in pairs), line_no, tuple(o for _, o in pairs))


def tokenize(src: NormalizedSource) -> list[TokenLine]:
    """One :class:`TokenLine` per normalized line, numbered from 1.

    Punctuation characters are single tokens, a string literal is one token
    carrying its quotes, and identifiers interpolated into a GString follow
    the literal as ordinary tokens.
    """
    return [tokenize_text(text, n) for n, text in enumerate(src.lines, start=1)]


# ------------------------------------------------------------------ methods

_MODIFIERS = frozenset("private public protected static final synchronized abstract".split())


def method_header(line: TokenLine) -> int | None:
    """Index of the method-name token if ``line`` opens a method definition."""
    toks = line.tokens
    if len(toks) < 4 or toks[-1] != "{":
        return None
    try:
        paren = toks.index("(")
    except ValueError:
        return None
    name_at = paren - 1
    if name_at < 1 or not is_identifier(toks[name_at]):
        return None
    prefix = toks[:name_at]
    # modifiers, "def", and a (possibly generic or array) return type
    for t in prefix:
        if t in _MODIFIERS or t == "def" or t in ("<", ">", ",", "[", "]", ".", "?"):
            continue
        if _IDENT.fullmatch(t) and t not in ("return", "new", "else", "if", "case", "throw", "assert"):
            continue
        return None
    if "=" in prefix:
        return None
    return name_at


def _braces(line: TokenLine) -> int:
    return line.tokens.count("{") - line.tokens.count("}")


@dataclass
class _Cursor:
    lines: list[TokenLine]
    i: int = 0

    def block(self, depth: int = 1) -> tuple[list[TokenLine], TokenLine | None]:
        """Consume lines up to the ``}`` closing the block(s) opened by the previous line."""
        body: list[TokenLine] = []
        while self.i < len(self.lines):
            line = self.lines[self.i]
            self.i += 1
            depth += _braces(line)
            if depth <= 0:
                return body, line
            body.append(line)
        return body, None


def split_methods(lines: list[TokenLine]) -> tuple[MethodChunk | None, list[MethodChunk]]:
    """Separate the ``preferences`` block from the other method definitions.

    ``definition(...)`` and other top-level statements are dropped.  When
    there is no ``preferences`` block a :class:`NoPreferences` warning is
    issued and ``None`` is returned in its place.
    """
    preferences: MethodChunk | None = None
    others: list[MethodChunk] = []
    cur = _Cursor(list(lines))
    while cur.i < len(cur.lines):
        line = cur.lines[cur.i]
        cur.i += 1
        toks = line.tokens
        if not toks:
            continue
        if toks[0] == "definition" and len(toks) > 1 and toks[1] == "(":
            depth = toks.count("(") - toks.count(")")
            while depth > 0 and cur.i < len(cur.lines):
                nxt = cur.lines[cur.i]
                depth += nxt.tokens.count("(") - nxt.tokens.count(")")
                cur.i += 1
            continue
        if toks[0] == "preferences" and len(toks) > 1 and toks[1] == "{":
            opened = _braces(line)
            body, closing = cur.block(opened) if opened > 0 else ([], None)
            if preferences is None:
                preferences = MethodChunk("preferences", line, tuple(body), closing)
            else:
                preferences = MethodChunk(
                    "preferences",
                    preferences.signature_tokens,
                    preferences.body + (line, *body),
                    closing,
                )
            continue
        name_at = method_header(line)
        if name_at is not None:
            body, closing = cur.block()
            others.append(MethodChunk(toks[name_at], line, tuple(body), closing))
            continue
        if _braces(line) > 0:
            cur.block()  # mappings { ... } and other top-level blocks
    if preferences is None:
        warnings.warn("app has no preferences block; it declares no sources", NoPreferences, stacklevel=2)
    return preferences, others


# -------------------------------------------------------------- frequencies


def _abstract(tok: str) -> str:
    if is_string_token(tok):
        return "aStr"
    if is_numeric_token(tok):
        return "aNum"
    return tok


def calTokenFrequencies(chunks: Iterable[MethodChunk]) -> BagOfWords:
    """Count every token of every line of ``chunks``.

    String literals count as ``aStr`` and numbers as ``aNum``.
    """
    counts: Counter[str] = Counter()
    for chunk in chunks:
        for line in chunk.lines():
            counts.update(_abstract(t) for t in line.tokens)
    return BagOfWords(counts)


def bag_of_words(src: NormalizedSource) -> BagOfWords:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NoPreferences)
        _, others = split_methods(tokenize(src))
    return calTokenFrequencies(others)
