"""Reference taint interpreter used to label generated apps and to check the miner.

It shares no code with the lexer or the miner.  Source text is parsed with
regular expressions into methods, statements and a tree of if/else branches;
taint is then answered on demand by walking *backwards* from each use to the
last assignment of the variable, instead of scanning forward.

Only a small Groovy subset is understood: normalized text with one statement
per line, ``def`` methods, ``if``/``else if``/``else`` blocks, assignments,
parenthesised and command-style calls, and string literals.  Anything richer
raises :class:`UnsupportedSyntax`.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable

__all__ = ["OracleFlow", "OracleVerdict", "UnsupportedSyntax", "interpret"]


class UnsupportedSyntax(ValueError):
    pass


_WORD = re.compile(r"[A-Za-z_]\w*")
_CONTROL = {"if", "for", "while", "switch", "catch", "return", "synchronized", "new", "assert", "throw", "super"}
_RESERVED = {
    "def", "if", "else", "for", "while", "return", "new", "null", "true", "false", "this", "in", "as",
    "instanceof", "switch", "case", "break", "continue", "try", "catch", "finally", "throw", "do",
}
_METHOD = re.compile(r"^(?:(?:private|public|protected|static|def|void|[A-Z]\w*)\s+)+([A-Za-z_]\w*)\s*\((.*)\)\s*\{$")
_IF = re.compile(r"^if\s*\((.*)\)\s*\{$")
_ELSE_IF = re.compile(r"^else\s+if\s*\((.*)\)\s*\{$")
_ELSE = re.compile(r"^else\s*\{$")
_ASSIGN = re.compile(r"^(?:(?:def|final|[A-Z]\w*)\s+)*([A-Za-z_][\w.\[\]\"']*)\s*([-+*/%|&^]?)=(?![=~])\s*(.*)$")
_COMMAND = re.compile(r"^(?:[A-Za-z_]\w*\s*\.\s*)*([a-z]\w*)\s+(?=[\"'\w])(.*)$")


# ---------------------------------------------------------------- lexing


def _strings(text: str) -> list[tuple[int, int]]:
    """Spans of the quoted literals on one line."""
    spans = []
    i = 0
    while i < len(text):
        q = text[i]
        if q in "'\"":
            j = i + 1
            depth = 0
            while j < len(text):
                c = text[j]
                if c == "\\":
                    j += 2
                    continue
                if q == '"' and text.startswith("${", j):
                    depth += 1
                    j += 2
                    continue
                if depth and c == "}":
                    depth -= 1
                elif not depth and c == q:
                    break
                j += 1
            spans.append((i, min(j + 1, len(text))))
            i = j + 1
        else:
            i += 1
    return spans


def _blank_strings(text: str) -> str:
    out = list(text)
    for a, b in _strings(text):
        for k in range(a + 1, b - 1):
            out[k] = "_"
    return "".join(out)


def _names(expr: str) -> list[str]:
    """Identifiers an expression reads, in order, including GString references.

    Map keys and named-argument labels (``key: value``) are not reads.
    """
    spans = _strings(expr)
    masked = _blank_strings(expr)
    found: list[tuple[int, str]] = []
    for a, b in spans:
        lit = expr[a:b]
        if lit.startswith('"'):
            for m in re.finditer(r"\$\{([^}]*)\}|\$([A-Za-z_][\w.]*)", lit):
                found.extend((a + m.start(), w) for w in _WORD.findall(m.group(1) or m.group(2)))
    keys = {m.start(1) for m in re.finditer(r"(?:^|[\[,(])\s*([A-Za-z_]\w*)\s*:", masked)}
    for m in _WORD.finditer(masked):
        k = m.start()
        if k in keys or any(a <= k < b for a, b in spans):
            continue
        if k > 0 and masked[k - 1].isdigit():
            continue  # suffix of a number such as 10L or 0x1F
        found.append((k, m.group()))
    found.sort()
    return [w for _, w in found]


def _close_paren(masked: str, i: int) -> int:
    depth = 0
    for j in range(i, len(masked)):
        if masked[j] in "([{":
            depth += 1
        elif masked[j] in ")]}":
            depth -= 1
            if depth == 0:
                return j
    return len(masked)


def _split_top(text: str, masked: str) -> list[str]:
    parts, depth, start = [], 0, 0
    for j, c in enumerate(masked):
        if c in "([{":
            depth += 1
        elif c in ")]}":
            depth -= 1
        elif c == "," and depth == 0:
            parts.append(text[start:j])
            start = j + 1
    tail = text[start:]
    if tail.strip() or parts:
        parts.append(tail)
    return parts


@dataclass(frozen=True)
class _Call:
    callee: str
    args: tuple[tuple[str, ...], ...]


def _calls(text: str) -> list[_Call]:
    masked = _blank_strings(text)
    calls: list[tuple[int, _Call]] = []
    for m in re.finditer(r"([A-Za-z_]\w*)\s*\(", masked):
        name = m.group(1)
        if name in _CONTROL or re.search(r"\bnew\s+$", masked[: m.start()]):
            continue
        open_at = m.end() - 1
        close = _close_paren(masked, open_at)
        inner = text[open_at + 1 : close]
        args = tuple(tuple(_names(a)) for a in _split_top(inner, masked[open_at + 1 : close]))
        calls.append((m.start(), _Call(name, args)))
    cm = _COMMAND.match(masked)
    if cm and cm.group(1) not in _RESERVED:
        rest_at = cm.start(2)
        nxt = _WORD.match(masked, rest_at)
        after = masked[nxt.end():].lstrip()[:1] if nxt else ""
        blocked = nxt is not None and (nxt.group() in _RESERVED or after in ("=", "(", "{"))
        if not blocked and not re.match(r"\s*\(", masked[cm.end(1):]):
            rest = text[rest_at:]
            args = tuple(tuple(_names(a)) for a in _split_top(rest, masked[rest_at:]))
            calls.append((cm.start(1), _Call(cm.group(1), args)))
    calls.sort(key=lambda c: c[0])
    return [c for _, c in calls]


# ---------------------------------------------------------------- parsing


@dataclass(eq=False)
class _Branch:
    position: int  # statement index of the header
    condition: tuple[str, ...]
    previous: _Branch | None  # earlier branch of the same if/else chain
    parent: _Branch | None


@dataclass
class _Stmt:
    line_no: int
    calls: list[_Call]
    target: str | None = None
    reads: tuple[str, ...] = ()
    assigns: bool = False
    branch: _Branch | None = None


@dataclass
class _Method:
    name: str
    params: tuple[str, ...]
    stmts: list[_Stmt] = field(default_factory=list)


def _parse(lines: list[str]) -> tuple[set[str], list[_Method]]:
    sources: set[str] = set()
    methods: list[_Method] = []
    i = 0
    while i < len(lines):
        text = lines[i].strip()
        if not text:
            i += 1
            continue
        if text.startswith("definition"):
            depth = _blank_strings(text).count("(") - _blank_strings(text).count(")")
            while depth > 0:
                i += 1
                t = _blank_strings(lines[i])
                depth += t.count("(") - t.count(")")
            i += 1
            continue
        if re.match(r"^preferences\s*\{", text):
            end = _block_end(lines, i)
            for ln in lines[i : end + 1]:
                sources |= _input_names(ln)
            i = end + 1
            continue
        m = _METHOD.match(text)
        if not m:
            raise UnsupportedSyntax(f"line {i + 1}: unexpected top-level text {text!r}")
        end = _block_end(lines, i)
        params = tuple(_WORD.findall(p.split("=")[0])[-1] for p in m.group(2).split(",") if p.strip())
        methods.append(_method(m.group(1), params, lines, i, end))
        i = end + 1
    return sources, methods


def _block_end(lines: list[str], start: int) -> int:
    depth = 0
    for j in range(start, len(lines)):
        t = _blank_strings(lines[j])
        depth += t.count("{") - t.count("}")
        if depth == 0:
            return j
    raise UnsupportedSyntax(f"line {start + 1}: block never closes")


def _input_names(line: str) -> set[str]:
    out = set()
    for m in re.finditer(r"\binput\b\s*\(?\s*", line):
        rest = line[m.end():]
        if re.match(r"[A-Za-z_]\w*\s*:", rest):
            k = re.search(r"\bname\s*:\s*([\"'])(\w+)\1", rest)
            if k:
                out.add(k.group(2))
        else:
            p = re.match(r"([\"'])(\w+)\1", rest)
            if p:
                out.add(p.group(2))
    return out


def _method(name: str, params: tuple[str, ...], lines: list[str], start: int, end: int) -> _Method:
    method = _Method(name, params)
    # each open brace is either a branch of an if/else chain or something else
    stack: list[_Branch | None] = []
    last_closed: _Branch | None = None
    for k in range(start + 1, end):
        text = lines[k].strip()
        line_no = k + 1
        current = next((b for b in reversed(stack) if b is not None), None)
        if not text:
            continue
        if text == "}":
            if not stack:
                raise UnsupportedSyntax(f"line {line_no}: stray brace")
            last_closed = stack.pop()
            continue
        chained = None
        for pattern, kind in ((_ELSE_IF, "elseif"), (_ELSE, "else"), (_IF, "if")):
            chained = pattern.match(text)
            if chained:
                break
        if chained:
            previous = last_closed if kind != "if" else None
            if kind != "if" and previous is None:
                raise UnsupportedSyntax(f"line {line_no}: else without if")
            condition = tuple(_names(chained.group(1))) if kind != "else" else ()
            header = _Stmt(line_no, _calls(chained.group(1)) if kind != "else" else [], branch=current)
            method.stmts.append(header)
            stack.append(_Branch(len(method.stmts) - 1, condition, previous, current))
            last_closed = None
            continue
        last_closed = None
        masked = _blank_strings(text)
        if "{" in masked or "}" in masked:
            raise UnsupportedSyntax(f"line {line_no}: closures and other blocks are not supported")
        if ";" in masked:
            raise UnsupportedSyntax(f"line {line_no}: only one simple statement per line is supported")
        stmt = _Stmt(line_no, _calls(text), branch=current)
        a = _ASSIGN.match(text)
        if a and not re.search("[\"']", a.group(1)):
            stmt.assigns = True
            stmt.target = a.group(1) if _WORD.fullmatch(a.group(1)) else None
            reads = _names(a.group(3))
            if a.group(2) and stmt.target:
                reads.append(stmt.target)
            stmt.reads = tuple(reads)
        method.stmts.append(stmt)
    if stack:
        raise UnsupportedSyntax(f"method {name}: unbalanced braces")
    return method


# ---------------------------------------------------------------- verdicts


@dataclass(frozen=True, order=True)
class OracleFlow:
    method: str
    line: int
    callee: str
    param: str
    category: str


@dataclass(frozen=True)
class OracleVerdict:
    sources: frozenset[str]
    extended_sinks: frozenset[tuple[str, str, int, str]]
    flows: tuple[OracleFlow, ...]

    @property
    def vulnerable(self) -> bool:
        return bool(self.flows)

    def counts(self) -> dict[str, int]:
        out = {c: 0 for c in ("Sc_Sn", "eSc_Sn", "Sc_eSn", "eSc_eSn", "Sn_C", "eSn_C")}
        for f in self.flows:
            out[f.category] += 1
        return out


def interpret(text: str, sinks: Iterable[str], transitive: bool = False) -> OracleVerdict:
    """Every flow of the app in ``text`` under the linear may-taint semantics."""
    sink_names = frozenset(sinks)
    sources, methods = _parse(text.splitlines())

    sensitive: dict[str, set[int]] = {}
    entries: set[tuple[str, str, int, str]] = set()

    def reaches(m: _Method, targets: dict[str, set[int]] | None) -> set[tuple[str, str, int, str]]:
        found = set()
        for idx, p in enumerate(m.params):
            for st in m.stmts:
                for c in st.calls:
                    if targets is None and c.callee in sink_names:
                        hit = any(p in a for a in c.args)
                    elif targets is not None and c.callee in targets and c.callee not in sink_names:
                        hit = any(p in a for j, a in enumerate(c.args) if j in targets[c.callee])
                    else:
                        continue
                    if hit:
                        found.add((m.name, p, idx, c.callee))
        return found

    for m in methods:
        entries |= reaches(m, None)
    for e in entries:
        sensitive.setdefault(e[0], set()).add(e[2])
    while transitive:
        known = {(e[0], e[2]) for e in entries}
        new = {e for m in methods for e in reaches(m, sensitive) if (e[0], e[2]) not in known}
        if not new:
            break
        for e in new:
            known.add((e[0], e[2]))
            entries.add(e)
            sensitive.setdefault(e[0], set()).add(e[2])

    flows: list[OracleFlow] = []
    for m in methods:
        flows.extend(_method_flows(m, sources, sink_names, sensitive))
    return OracleVerdict(frozenset(sources), frozenset(entries), tuple(sorted(flows)))


def _method_flows(m: _Method, sources: set[str], sinks: frozenset[str], sensitive: dict[str, set[int]]) -> list[OracleFlow]:
    stmts = m.stmts

    @lru_cache(maxsize=None)
    def tainted(var: str, before: int) -> bool:
        # the value of ``var`` just before statement ``before`` comes from
        # its last plain assignment; sources are tainted everywhere
        if var in sources:
            return True
        for j in range(before - 1, -1, -1):
            st = stmts[j]
            if st.assigns and st.target == var:
                return any(tainted(r, j) for r in st.reads)
        return False

    def branch_taint(b: _Branch) -> set[str]:
        names: set[str] = set()
        while b is not None:
            names |= {v for v in b.condition if tainted(v, b.position)}
            b = b.previous
        return names

    def guard(b: _Branch | None) -> tuple[str, ...]:
        while b is not None:
            names = branch_taint(b)
            if names:
                return tuple(sorted(names))
            b = b.parent
        return ()

    out = []
    for i, st in enumerate(stmts):
        for c in st.calls:
            if c.callee in sinks:
                positions = range(len(c.args))
                direct = True
            elif c.callee in sensitive:
                positions = sorted(sensitive[c.callee])
                direct = False
            else:
                continue
            seen: list[str] = []
            for j in positions:
                if j >= len(c.args):
                    continue
                for v in c.args[j]:
                    if v not in seen and tainted(v, i):
                        seen.append(v)
            for v in seen:
                kind = ("Sc_" if v in sources else "eSc_") + ("Sn" if direct else "eSn")
                out.append(OracleFlow(m.name, st.line_no, c.callee, v, kind))
            if seen:
                continue
            g = guard(st.branch)
            reachable = direct or any(j < len(c.args) for j in positions)
            if g and reachable:
                out.append(OracleFlow(m.name, st.line_no, c.callee, g[0], "Sn_C" if direct else "eSn_C"))
    return out
