"""Character-level scanning of Groovy text: string literals and comments.

Everything that looks for braces, semicolons or comment markers works on a
*masked* copy of the text in which the inside of every string literal is
replaced by ``_``.  Masking keeps offsets aligned, so a cut found in the
masked text can be applied to the original.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import UnterminatedBlockComment

MASK_CHAR = "_"


@dataclass(frozen=True)
class Span:
    start: int
    end: int  # exclusive
    kind: str  # "string", "line_comment" or "block_comment"


def _line_of(text: str, pos: int) -> int:
    return text.count("\n", 0, pos) + 1


def _skip_interpolation(text: str, j: int) -> int:
    """Return the index just past the ``}`` closing a ``${`` that opened before ``j``."""
    n = len(text)
    depth = 1
    while j < n:
        ch = text[j]
        if ch in "'\"":
            j = skip_string(text, j)
            continue
        if ch == "{":
            depth += 1
        elif ch == "}":
            depth -= 1
            if depth == 0:
                return j + 1
        j += 1
    return n


def skip_string(text: str, i: int) -> int:
    """Return the end (exclusive) of the string literal starting at ``text[i]``.

    Single-line literals left open stop at the end of their line.
    """
    q = text[i]
    delim = q * 3 if text.startswith(q * 3, i) else q
    j = i + len(delim)
    n = len(text)
    gstring = q == '"'
    while j < n:
        ch = text[j]
        if ch == "\\":
            j += 2
            continue
        if text.startswith(delim, j):
            return j + len(delim)
        if len(delim) == 1 and ch == "\n":
            return j
        if gstring and text.startswith("${", j):
            j = _skip_interpolation(text, j + 2)
            continue
        j += 1
    return n


def scan(text: str, comments: bool = True) -> list[Span]:
    """Locate string literals and (optionally) comments in ``text``.

    Raises :class:`UnterminatedBlockComment` when a ``/*`` never closes.
    """
    spans: list[Span] = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch in "'\"":
            j = skip_string(text, i)
            spans.append(Span(i, j, "string"))
            i = j
        elif comments and text.startswith("//", i):
            j = text.find("\n", i)
            j = n if j == -1 else j
            spans.append(Span(i, j, "line_comment"))
            i = j
        elif comments and text.startswith("/*", i):
            j = text.find("*/", i + 2)
            if j == -1:
                raise UnterminatedBlockComment("'/*' is never closed", _line_of(text, i))
            spans.append(Span(i, j + 2, "block_comment"))
            i = j + 2
        else:
            i += 1
    return spans


def string_spans(text: str) -> list[Span]:
    return scan(text, comments=False)


def mask(text: str, comments: bool = False) -> str:
    """Blank out string-literal contents, keeping quote characters and length.

    With ``comments=True`` quotes inside comments are not taken as literals.
    """
    spans = [sp for sp in scan(text, comments) if sp.kind == "string"]
    if not spans:
        return text
    out = []
    prev = 0
    for sp in spans:
        out.append(text[prev:sp.start])
        body = text[sp.start:sp.end]
        q = body[0]
        width = 3 if body.startswith(q * 3) else 1
        closed = len(body) >= 2 * width and body.endswith(q * width)
        head = body[:width]
        tail = body[-width:] if closed else ""
        inner = len(body) - len(head) - len(tail)
        out.append(head + MASK_CHAR * inner + tail)
        prev = sp.end
    out.append(text[prev:])
    return "".join(out)


def logical_lines(text: str, comments: bool = True) -> list[str]:
    """Split on newlines that are not inside a (triple-quoted) string literal."""
    masked = mask(text, comments)
    lines = []
    start = 0
    pos = masked.find("\n")
    while pos != -1:
        lines.append(text[start:pos])
        start = pos + 1
        pos = masked.find("\n", start)
    lines.append(text[start:])
    return lines


def balance(masked: str, opener: str, closer: str) -> int:
    return masked.count(opener) - masked.count(closer)
