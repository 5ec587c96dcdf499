"""Rewrite Groovy source into a one-construct-per-line standard form.

The rewrites are deliberately lexical.  After :func:`normalize`:

* no comment text survives;
* every ``input`` call, multi-line call and map literal sits on one line;
* every ``if``/``else if``/``else`` (and ``do``/``try``/``catch``/``finally``,
  loops and method headers) ends its line with ``{``, and its body starts on
  the next line;
* nothing but closing punctuation follows a block-closing ``}``;
* at most one statement per line, each ``;`` kept at the end of its statement.

String literals are masked before any rule looks for punctuation.
"""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

from . import textscan
from .errors import UnbalancedBraces, UnbalancedBrackets, UnbalancedParens

__all__ = [
    "RawSource",
    "NormalizedSource",
    "RewriteRecord",
    "strip_comments",
    "join_input_calls",
    "join_map_literals",
    "join_call_args",
    "split_conditionals",
    "split_statements",
    "normalize",
]


@dataclass(frozen=True)
class RawSource:
    app_name: str
    lines: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.app_name:
            raise ValueError("app_name must be non-empty")
        object.__setattr__(self, "lines", tuple(self.lines))

    @classmethod
    def from_text(cls, app_name: str, text: str) -> RawSource:
        text = text.replace("\r\n", "\n").replace("\r", "\n")
        if text.endswith("\n"):
            text = text[:-1]
        return cls(app_name, tuple(text.split("\n")) if text else ())

    @classmethod
    def from_path(cls, path: str | Path, app_name: str | None = None) -> RawSource:
        path = Path(path)
        text = path.read_text(encoding="utf-8", errors="replace")
        return cls.from_text(app_name or path.stem, text)

    @property
    def text(self) -> str:
        return "\n".join(self.lines)


@dataclass(frozen=True)
class RewriteRecord:
    rule: str
    line: int


@dataclass(frozen=True)
class NormalizedSource:
    app_name: str
    lines: tuple[str, ...]
    rewrite_log: tuple[RewriteRecord, ...] = ()

    @property
    def text(self) -> str:
        return "\n".join(self.lines) + ("\n" if self.lines else "")

    def as_raw(self) -> RawSource:
        return RawSource(self.app_name, self.lines)


@dataclass(frozen=True)
class _Line:
    text: str
    origin: int


@dataclass
class _Log:
    records: list[RewriteRecord] = field(default_factory=list)

    def add(self, rule: str, origin: int) -> None:
        self.records.append(RewriteRecord(rule, origin))


def _to_lines(src: RawSource) -> list[_Line]:
    if not src.lines:
        return []
    # Physical line numbers are recovered from the newlines inside each
    # logical line (triple-quoted strings may span several).
    out = []
    lineno = 1
    for text in textscan.logical_lines(src.text):
        out.append(_Line(text, lineno))
        lineno += text.count("\n") + 1
    return out


def _from_lines(name: str, lines: list[_Line]) -> RawSource:
    return RawSource(name, tuple(ln.text for ln in lines))


def _indent(text: str) -> str:
    return text[: len(text) - len(text.lstrip())]


# ---------------------------------------------------------------- comments


def _strip_comments(lines: list[_Line], log: _Log) -> list[_Line]:
    if not lines:
        return []
    text = "\n".join(ln.text for ln in lines)
    spans = [sp for sp in textscan.scan(text) if sp.kind != "string"]
    if not spans:
        return list(lines)
    pieces = []
    prev = 0
    for sp in spans:
        pieces.append(text[prev:sp.start])
        # keep line structure: a block comment leaves its newlines behind
        pieces.append("\n" * text.count("\n", sp.start, sp.end))
        prev = sp.end
    pieces.append(text[prev:])
    stripped = textscan.logical_lines("".join(pieces), comments=False)

    originals = textscan.logical_lines(text)
    assert len(stripped) == len(originals) == len(lines)
    out = []
    for old, new, ln in zip(originals, stripped, lines):
        if new == old:
            out.append(ln)
            continue
        log.add("strip_comments", ln.origin)
        new = new.rstrip()
        if new.strip():
            out.append(_Line(new, ln.origin))
    return out


def strip_comments(src: RawSource) -> RawSource:
    """Remove ``//`` and ``/* */`` comments; literals are left untouched."""
    return _from_lines(src.app_name, _strip_comments(_to_lines(src), _Log()))


# ------------------------------------------------------------------- joins


_INPUT_CALL = re.compile(r"\binput\s*\(")
_INPUT_COMMAND = re.compile(r"\binput\s+[\"'\w]")


def _join_parts(parts: list[str]) -> str:
    out = parts[0].rstrip()
    for part in parts[1:]:
        part = part.strip()
        if not part:
            continue
        if out.endswith(("(", "[")) or part.startswith((")", "]", ",")):
            out += part
        else:
            out += " " + part
    return out


def _join_balanced(
    lines: list[_Line],
    log: _Log,
    rule: str,
    opener: str,
    closer: str,
    starts: re.Pattern[str] | None,
    error: type[Exception],
) -> list[_Line]:
    """Join a line with its successors until ``opener``/``closer`` balance.

    When ``starts`` is given only lines matching it begin a join.  A join is
    abandoned (the lines are left alone) if a continuation line would open a
    closure body, since collapsing statements into one line is worse than
    leaving a call split.
    """
    out: list[_Line] = []
    i = 0
    while i < len(lines):
        line = lines[i]
        masked = textscan.mask(line.text)
        bal = textscan.balance(masked, opener, closer)
        if bal <= 0 or (starts is not None and not starts.search(masked)) or masked.rstrip().endswith("{"):
            out.append(line)
            i += 1
            continue
        parts = [line.text]
        j = i + 1
        abandoned = False
        while bal > 0:
            if j >= len(lines):
                raise error(f"'{opener}' opened here is never closed", line.origin)
            nxt = textscan.mask(lines[j].text)
            bal += textscan.balance(nxt, opener, closer)
            if bal > 0 and (nxt.rstrip().endswith("{") or textscan.balance(nxt, "{", "}") > 0):
                abandoned = True
                break
            parts.append(lines[j].text)
            j += 1
        if abandoned:
            out.append(line)
            i += 1
            continue
        log.add(rule, line.origin)
        out.append(_Line(_join_parts(parts), line.origin))
        i = j
    return out


def _join_input_commands(lines: list[_Line], log: _Log) -> list[_Line]:
    # parenthesis-free form: input "name", "type",\n  title: "..."
    out: list[_Line] = []
    i = 0
    while i < len(lines):
        line = lines[i]
        masked = textscan.mask(line.text)
        if not (_INPUT_COMMAND.search(masked) and masked.rstrip().endswith(",")):
            out.append(line)
            i += 1
            continue
        parts = [line.text]
        j = i + 1
        while textscan.mask(parts[-1]).rstrip().endswith(",") and j < len(lines):
            parts.append(lines[j].text)
            j += 1
        log.add("join_input_calls", line.origin)
        out.append(_Line(_join_parts(parts), line.origin))
        i = j
    return out


def _join_input_calls(lines: list[_Line], log: _Log) -> list[_Line]:
    lines = _join_balanced(lines, log, "join_input_calls", "(", ")", _INPUT_CALL, UnbalancedParens)
    return _join_input_commands(lines, log)


def _join_map_literals(lines: list[_Line], log: _Log) -> list[_Line]:
    return _join_balanced(lines, log, "join_map_literals", "[", "]", None, UnbalancedBrackets)


def _join_call_args(lines: list[_Line], log: _Log) -> list[_Line]:
    return _join_balanced(lines, log, "join_call_args", "(", ")", None, UnbalancedParens)


def join_input_calls(src: RawSource) -> RawSource:
    """Put every ``input`` call, with all its arguments, on one line."""
    return _from_lines(src.app_name, _join_input_calls(_to_lines(src), _Log()))


def join_map_literals(src: RawSource) -> RawSource:
    """Put every multi-line ``[k: v, ...]`` literal on one line."""
    return _from_lines(src.app_name, _join_map_literals(_to_lines(src), _Log()))


def join_call_args(src: RawSource) -> RawSource:
    """Put the argument list of any call (or condition) on one line."""
    return _from_lines(src.app_name, _join_call_args(_to_lines(src), _Log()))


# ------------------------------------------------------------ conditionals

_PAREN_HEADER = re.compile(r"(else\s+if|if|while|for|switch|catch|synchronized)\s*\(")
_BARE_HEADER = re.compile(r"(else|do|try|finally)(?![\w$])")
_MODIFIERS = r"(?:(?:private|public|protected|static|final|synchronized|abstract)\s+)*"
_METHOD_HEADER = re.compile(
    _MODIFIERS + r"(?:def\s+)?(?:[A-Za-z_][\w.]*(?:<[^=;()]*>)?(?:\[\])*\s+)?([A-Za-z_]\w*)\s*\("
)
_NOT_A_TYPE = {
    "return", "new", "throw", "else", "assert", "case", "import", "package", "in", "instanceof", "as",
}
_EXEMPT_AFTER_CLOSE = (")", "]", ",", ".", "?", ":")


def _match_paren(masked: str, i: int) -> int:
    """Index just past the ``)`` matching the ``(`` at ``masked[i]``, or -1."""
    depth = 0
    for j in range(i, len(masked)):
        c = masked[j]
        if c == "(":
            depth += 1
        elif c == ")":
            depth -= 1
            if depth == 0:
                return j + 1
    return -1


def _header_end(masked: str, depth: int) -> tuple[int, str] | None:
    """If ``masked`` starts with a block header, return (end offset, kind)."""
    m = _PAREN_HEADER.match(masked)
    if m:
        end = _match_paren(masked, m.end() - 1)
        if end == -1:
            return None
        kind = "if" if m.group(1) == "if" else ("elseif" if m.group(1).startswith("else") else m.group(1))
        return end, kind
    m = _BARE_HEADER.match(masked)
    if m:
        return m.end(), m.group(1)
    if depth == 0:
        m = _METHOD_HEADER.match(masked)
        if m and "=" not in masked[: m.end()]:
            words = masked[: m.start(1)].split()
            if words and not (set(words) & _NOT_A_TYPE):
                end = _match_paren(masked, m.end() - 1)
                if end != -1:
                    return end, "method"
    return None


def _first_statement(text: str) -> tuple[str, str]:
    """Split ``text`` at its first top-level ``;`` into (statement, rest)."""
    masked = textscan.mask(text)
    depth = 0
    for i, c in enumerate(masked):
        if c in "([{":
            depth += 1
        elif c in ")]}":
            depth -= 1
        elif c == ";" and depth == 0:
            return text[: i + 1].strip(), text[i + 1 :].strip()
    return text.strip(), ""


@dataclass
class _BraceState:
    kinds: list[str] = field(default_factory=list)
    closed_do: bool = False

    @property
    def depth(self) -> int:
        return len(self.kinds)


class _ConditionalSplitter:
    def __init__(self, log: _Log) -> None:
        self.log = log
        self.state = _BraceState()
        self.changed_rules: set[str] = set()
        self.wrapped = 0  # braceless bodies given braces on the current line

    # Each piece is either a finished line or, for a header left without
    # its "{", a marker that the caller must resolve by looking ahead.
    def split(self, text: str) -> tuple[list[str], str | None]:
        pieces: list[str] = []
        dangling = self._split_into(text.strip(), pieces)
        return pieces, dangling

    def _emit(self, pieces: list[str], piece: str, kind: str = "block") -> None:
        masked = textscan.mask(piece)
        opens = []
        for c in masked:
            if c == "{":
                opens.append(c)
            elif c == "}":
                if opens:
                    opens.pop()
                elif self.state.kinds:
                    closed = self.state.kinds.pop()
                    self.state.closed_do = closed == "do"
                else:
                    raise UnbalancedBraces("'}' closes nothing", None)
        for k, _ in enumerate(opens):
            self.state.kinds.append(kind if k == len(opens) - 1 else "block")
        if opens:
            self.state.closed_do = False
        pieces.append(piece)

    def _split_into(self, s: str, pieces: list[str]) -> str | None:
        if not s:
            return None
        masked = textscan.mask(s)

        if masked.startswith("}"):
            rest = s[1:].strip()
            if rest and not rest.startswith(_EXEMPT_AFTER_CLOSE):
                self.changed_rules.add("c")
                self._emit(pieces, "}")
                return self._split_into(rest, pieces)
            self._emit(pieces, s)
            return None

        after_do = self.state.closed_do
        self.state.closed_do = False
        header = _header_end(masked, self.state.depth)
        if header is not None and not (after_do and header[1] == "while"):
            end, kind = header
            head = s[:end].rstrip()
            rest = s[end:].strip()
            if rest.startswith("{"):
                brace = s.index("{", end)
                body = s[brace + 1 :].strip()
                self._emit(pieces, s[: brace + 1], kind)
                if body:
                    self.changed_rules.add("a")
                    return self._split_into(body, pieces)
                return None
            if not rest:
                return head
            # braceless body on the same line
            self.wrapped += 1
            stmt, after = _first_statement(rest)
            self._emit(pieces, head + " {", kind)
            dangling = self._split_into(stmt, pieces)
            if dangling is not None:
                self._emit(pieces, dangling)
            self._emit(pieces, "}")
            return self._split_into(after, pieces)

        # a conditional keyword buried inside an inline closure
        kw = re.search(r"(?<![\w.$])(if|else)(?![\w$])", masked)
        if kw and kw.start() > 0:
            cut = masked.rfind("{", 0, kw.start())
            if cut != -1 and _depth_at(masked, cut) == 0:
                # closure parameters stay with the opening brace
                params = re.match(r"\s*[\w\s,]*->", masked[cut + 1 : kw.start()])
                cut = cut + 1 + params.end() if params else cut + 1
                self.changed_rules.add("a")
                self._emit(pieces, s[:cut].rstrip())
                return self._split_into(s[cut:].strip(), pieces)

        # an unmatched "}" after some code
        cut = _unmatched_close(masked)
        if cut > 0:
            self.changed_rules.add("c")
            before = s[:cut].strip()
            if before:
                self._emit(pieces, before)
            return self._split_into(s[cut:], pieces)

        self._emit(pieces, s)
        return None


def _depth_at(masked: str, pos: int) -> int:
    depth = 0
    for c in masked[:pos]:
        if c in "([":
            depth += 1
        elif c in ")]":
            depth -= 1
    return depth


def _unmatched_close(masked: str) -> int:
    """Offset of the first ``}`` with no ``{`` before it on the line, or -1."""
    opens = 0
    parens = 0
    for i, c in enumerate(masked):
        if c in "([":
            parens += 1
        elif c in ")]":
            parens -= 1
        elif c == "{":
            opens += 1
        elif c == "}":
            if opens:
                opens -= 1
            elif parens <= 0:
                return i
    return -1


def _block_extent(queue: deque[_Line], start: int = 0) -> int:
    """Number of queued lines making up the next statement (a block if it opens one)."""
    if start >= len(queue):
        return 0
    masked = textscan.mask(queue[start].text).strip()
    header = _header_end(masked, 1)
    if header is not None and not masked[header[0]:].strip():
        # nested header without braces: it owns the statement after it
        return 1 + _block_extent(queue, start + 1)
    depth = 0
    for n in range(start, len(queue)):
        depth += textscan.balance(textscan.mask(queue[n].text), "{", "}")
        if depth <= 0:
            return n - start + 1
    return len(queue) - start


def _split_conditionals(lines: list[_Line], log: _Log) -> list[_Line]:
    splitter = _ConditionalSplitter(log)
    out: list[_Line] = []
    queue: deque[_Line] = deque(lines)

    def place(line: _Line, pieces: list[str]) -> None:
        if pieces == [line.text.strip()]:
            out.append(line)
            return
        indent = _indent(line.text)
        depth = 0
        for p in pieces:
            masked = textscan.mask(p)
            net = masked.count("{") - masked.count("}")
            if masked.startswith("}"):
                depth = max(depth - 1, 0)
                net += 1
            out.append(_Line(indent + "    " * depth + p, line.origin))
            depth = max(depth + net, 0)

    while queue:
        line = queue.popleft()
        if not line.text.strip():
            out.append(line)
            continue
        splitter.changed_rules.clear()
        splitter.wrapped = 0
        try:
            pieces, dangling = splitter.split(line.text)
        except UnbalancedBraces as exc:
            raise UnbalancedBraces("'}' closes nothing", line.origin) from exc
        for rule in sorted(splitter.changed_rules):
            log.add(f"split_conditionals:{rule}", line.origin)
        # one record per inserted "{ }" pair, so inserted tokens can be counted
        for _ in range(splitter.wrapped):
            log.add("split_conditionals:braceless", line.origin)
        if dangling is None:
            place(line, pieces)
            continue

        # header without "{": merge a "{" from the next line, or wrap the
        # next statement in braces
        while queue and not queue[0].text.strip():
            queue.popleft()
        if queue and textscan.mask(queue[0].text).lstrip().startswith("{"):
            nxt = queue.popleft()
            log.add("split_conditionals:b", line.origin)
            pieces_b, _ = splitter.split(dangling + " {")
            place(line, pieces + pieces_b)
            remainder = nxt.text.strip()[1:].strip()
            if remainder:
                queue.appendleft(_Line(_indent(nxt.text) + remainder, nxt.origin))
            continue
        pieces_b, _ = splitter.split(dangling + " {")
        place(line, pieces + pieces_b)
        if not queue:
            raise UnbalancedBraces("block header without a body", line.origin)
        log.add("split_conditionals:braceless", line.origin)
        extent = _block_extent(queue)
        body = [queue.popleft() for _ in range(extent)]
        closing = _Line(_indent(line.text) + "}", body[-1].origin)
        for ln in reversed(body + [closing]):
            queue.appendleft(ln)
    if splitter.state.depth:
        last = lines[-1].origin if lines else None
        raise UnbalancedBraces(f"{splitter.state.depth} block(s) never closed", last)
    return out


def split_conditionals(src: RawSource) -> RawSource:
    """One conditional per line, ``{`` on the header line, nothing after ``}``."""
    return _from_lines(src.app_name, _split_conditionals(_to_lines(src), _Log()))


# -------------------------------------------------------------- statements


def _split_statements(lines: list[_Line], log: _Log) -> list[_Line]:
    out: list[_Line] = []
    for line in lines:
        masked = textscan.mask(line.text)
        if ";" not in masked:
            out.append(line)
            continue
        cuts = []
        depth = 0
        for i, c in enumerate(masked):
            # braces do not shield: a closure body holds statements too
            if c in "([":
                depth += 1
            elif c in ")]":
                depth -= 1
            elif c == ";" and depth == 0:
                cuts.append(i)
        # the ";" stays with its statement; a trailing one is no split point
        cuts = [c for c in cuts if masked[c + 1 :].strip()]
        if not cuts:
            out.append(line)
            continue
        indent = _indent(line.text)
        starts = [0] + [c + 1 for c in cuts]
        ends = [c + 1 for c in cuts] + [len(line.text)]
        pieces = [line.text[a:b].strip() for a, b in zip(starts, ends)]
        log.add("split_statements", line.origin)
        out.extend(_Line(indent + p, line.origin) for p in pieces if p)
    return out


def split_statements(src: RawSource) -> RawSource:
    """Split after top-level ``;`` so each statement has its own line.

    The ``;`` stays at the end of the statement it closes, so no token is lost.
    """
    return _from_lines(src.app_name, _split_statements(_to_lines(src), _Log()))


# --------------------------------------------------------------- pipeline


def normalize(src: RawSource) -> NormalizedSource:
    """Apply every rewrite in order and return the standard form."""
    log = _Log()
    lines = _to_lines(src)
    lines = _strip_comments(lines, log)
    lines = _join_input_calls(lines, log)
    lines = _join_map_literals(lines, log)
    lines = _join_call_args(lines, log)
    # splitting statements can expose new headers and vice versa
    for _ in range(16):
        before = [ln.text for ln in lines]
        lines = _split_conditionals(lines, log)
        lines = _split_statements(lines, log)
        if [ln.text for ln in lines] == before:
            break
    return NormalizedSource(src.app_name, tuple(ln.text for ln in lines), tuple(log.records))
