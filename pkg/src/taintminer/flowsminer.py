"""Lexical taint-flow mining over normalized SmartApp source.

The miner never builds a syntax tree.  It walks token lines top to bottom,
keeping per method the set of identifiers currently holding sensitive data,
and matches call sites against the sink list and against the user methods
that forward a parameter to a sink.
"""

from __future__ import annotations

import re
import time
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import MalformedInput, NoPreferences
from .lexer import (
    BagOfWords,
    MethodChunk,
    TokenLine,
    calTokenFrequencies,
    is_identifier,
    is_string_token,
    method_header,
    split_methods,
    tokenize,
)
from .preprocessor import NormalizedSource
from .taintmodel import (
    ExtendedSinkEntry,
    FlowCategory,
    MethodInvocation,
    SinkSet,
    SourceSet,
    TaintedFlow,
)

__all__ = [
    "MethodData",
    "MinerReport",
    "findSources",
    "findExtS_mtdInv",
    "findExtSink",
    "mine",
    "split_args",
    "value_tokens",
]

_IDENT = re.compile(r"[A-Za-z_]\w*")

# methods that take another method's name and call it later
_DISPATCHERS = frozenset({"runIn", "runOnce", "schedule", "subscribe", "subscribeToCommand"})

_NOT_CALLABLE = frozenset(
    {"if", "for", "while", "switch", "catch", "return", "synchronized", "new", "assert", "throw", "super"}
)
_COMMAND_ARG_STOP = frozenset({"in", "instanceof", "as"})


@dataclass(frozen=True)
class MethodData:
    name: str
    signature: str
    params: tuple[str, ...]
    ext_sources: frozenset[str]
    invocations: tuple[MethodInvocation, ...]


@dataclass
class MinerReport:
    app_name: str
    sources: SourceSet = field(default_factory=SourceSet)
    all_methods: list[MethodData] = field(default_factory=list)
    extended_sinks: list[ExtendedSinkEntry] = field(default_factory=list)
    flows: list[TaintedFlow] = field(default_factory=list)
    elapsed_ms: float = 0.0
    bag: BagOfWords = field(default_factory=BagOfWords)

    def counts(self) -> dict[str, int]:
        out = {c.value: 0 for c in FlowCategory}
        for f in self.flows:
            out[f.category.value] += 1
        return out

    @property
    def vulnerable(self) -> bool:
        return bool(self.flows)

    def to_json(self, timing: bool = True) -> dict[str, object]:
        data: dict[str, object] = {
            "app": self.app_name,
            "sources": sorted(self.sources.names),
            "extended_sinks": [
                {"method": e.method_name, "param": e.param_name, "index": e.param_index, "sink": e.underlying_sink}
                for e in self.extended_sinks
            ],
            "flows": [f.to_json() for f in self.flows],
            "counts": self.counts(),
        }
        if timing:
            data["elapsed_ms"] = round(self.elapsed_ms, 3)
        return data


# ------------------------------------------------------------ token helpers


def split_args(tokens: Sequence[str], start: int, stop_at_close: bool = True) -> tuple[list[tuple[str, ...]], int]:
    """Split ``tokens[start:]`` on top-level commas.

    With ``stop_at_close`` the scan ends at the first unbalanced closing
    bracket (the call's ``)``); its index is returned alongside the args.
    """
    args: list[tuple[str, ...]] = []
    cur: list[str] = []
    depth = 0
    i = start
    while i < len(tokens):
        t = tokens[i]
        if t in ("(", "[", "{"):
            depth += 1
        elif t in (")", "]", "}"):
            if depth == 0 and stop_at_close:
                break
            depth -= 1
        elif t == "," and depth == 0:
            args.append(tuple(cur))
            cur = []
            i += 1
            continue
        cur.append(t)
        i += 1
    if cur or args:
        args.append(tuple(cur))
    return args, i


def value_tokens(tokens: Sequence[str]) -> list[str]:
    """Tokens of an expression minus map keys and named-argument labels."""
    out = []
    n = len(tokens)
    for i, t in enumerate(tokens):
        if i + 1 < n and tokens[i + 1] == ":" and (i == 0 or tokens[i - 1] in ("[", ",", "(")):
            continue
        out.append(t)
    return out


def _is_keyword_arg(arg: Sequence[str]) -> bool:
    return len(arg) >= 2 and arg[1] == ":" and bool(_IDENT.fullmatch(arg[0]))


def _unquote(tok: str) -> str | None:
    if not is_string_token(tok):
        return None
    q = tok[0]
    width = 3 if tok.startswith(q * 3) and len(tok) >= 6 else 1
    inner = tok[width:-width] if len(tok) >= 2 * width else tok[width:]
    if "$" in inner and q == '"':
        return None
    return inner


def _calls(line: TokenLine, skip: int | None = None) -> list[tuple[str, list[tuple[str, ...]]]]:
    """Every call on ``line``: parenthesised calls anywhere, plus a command call at the start."""
    toks = line.tokens
    out: list[tuple[int, str, list[tuple[str, ...]]]] = []
    for i in range(len(toks) - 1):
        t = toks[i]
        if i == skip or toks[i + 1] != "(" or not _IDENT.fullmatch(t) or t in _NOT_CALLABLE:
            continue
        if i > 0 and toks[i - 1] == "new":
            continue
        args, _ = split_args(toks, i + 2)
        out.append((i, t, args))

    command = _command_call(toks)
    if command is not None:
        out.append(command)
    out.sort(key=lambda c: c[0])
    return [(name, args) for _, name, args in out]


def _command_call(toks: Sequence[str]) -> tuple[int, str, list[tuple[str, ...]]] | None:
    # Groovy's parenthesis-free form:  sendPush msg   /   log.debug "x", y
    if not toks or not is_identifier(toks[0]):
        return None
    j = 0
    while j + 2 < len(toks) and toks[j + 1] == "." and _IDENT.fullmatch(toks[j + 2]):
        j += 2
    if j + 1 >= len(toks):
        return None
    callee, nxt = toks[j], toks[j + 1]
    if not callee[0].islower() or callee in _NOT_CALLABLE:
        return None
    starts_value = is_string_token(nxt) or nxt[0].isdigit() or (is_identifier(nxt) and nxt not in _COMMAND_ARG_STOP)
    if not starts_value:
        return None
    if is_identifier(nxt) and j + 2 < len(toks) and toks[j + 2] in ("=", "(", "{"):
        return None  # "String msg = ..." or a normal call on the next token
    args, _ = split_args(toks, j + 1, stop_at_close=False)
    return j, callee, args


def _assignment(line: TokenLine) -> tuple[str | None, list[str]] | None:
    """(target, value tokens) if the line is an assignment.

    Targets that are not plain local names (``state.x``, ``a[i]``) come back
    as ``None``: their value is evaluated but nothing is tracked.
    """
    toks = line.tokens
    depth = 0
    for k, t in enumerate(toks):
        if t in ("(", "[", "{"):
            depth += 1
        elif t in (")", "]", "}"):
            depth -= 1
        if t != "=" or depth != 0:
            continue
        prev = toks[k - 1] if k > 0 else ""
        nxt = toks[k + 1] if k + 1 < len(toks) else ""
        if line.adjacent(k + 1) and nxt in ("=", "~"):
            return None
        compound = False
        lhs = list(toks[:k])
        if line.adjacent(k) and prev in ("!", "<", ">", "=", "~"):
            return None
        if line.adjacent(k) and prev in ("+", "-", "*", "/", "%", "|", "&", "^"):
            compound = True
            lhs = lhs[:-1]
        if not lhs:
            return None
        rhs = list(toks[k + 1 :])
        target = lhs[-1]
        simple = all(_IDENT.fullmatch(x) or x in ("<", ">", ",", "?") for x in lhs) and is_identifier(target)
        if not simple:
            return (None, rhs)
        if compound:
            rhs.append(target)
        return target, rhs
    return None


# -------------------------------------------------------------- algorithms


def _input_calls(line: TokenLine) -> list[list[tuple[str, ...]]]:
    toks = line.tokens
    found = []
    for i, t in enumerate(toks):
        if t != "input" or (i > 0 and toks[i - 1] == "."):
            continue
        if i + 1 < len(toks) and toks[i + 1] == "(":
            args, _ = split_args(toks, i + 2)
        elif i + 1 < len(toks) and (is_string_token(toks[i + 1]) or _IDENT.fullmatch(toks[i + 1])):
            args, _ = split_args(toks, i + 1)
        else:
            continue
        found.append(args)
    return found


def findSources(preferences: MethodChunk | None) -> SourceSet:
    """Names bound by ``input`` calls: the first positional argument, or the
    ``name:`` value when every argument is a keyword argument."""
    names: set[str] = set()
    if preferences is None:
        return SourceSet(frozenset())
    for line in preferences.lines():
        for args in _input_calls(line):
            name = None
            if args and all(_is_keyword_arg(a) for a in args):
                for a in args:
                    if a[0] == "name" and len(a) == 3:
                        name = _unquote(a[2]) or (a[2] if is_identifier(a[2]) else None)
            elif args:
                first = next(a for a in args if not _is_keyword_arg(a))
                if len(first) == 1:
                    name = _unquote(first[0])
            if name and _IDENT.fullmatch(name):
                names.add(name)
            else:
                warnings.warn(
                    f"line {line.line_no}: cannot read the name of an input call", MalformedInput, stacklevel=2
                )
    return SourceSet(frozenset(names))


@dataclass
class _Frame:
    conditional: bool
    taint: tuple[str, ...] = ()


def _signature_params(line: TokenLine, name_at: int) -> tuple[str, ...]:
    args, _ = split_args(line.tokens, name_at + 2)
    params = []
    for arg in args:
        decl = list(arg)
        if "=" in decl:
            decl = decl[: decl.index("=")]
        idents = [t for t in decl if is_identifier(t)]
        if idents:
            params.append(idents[-1])
    return tuple(params)


def _condition_tokens(toks: Sequence[str]) -> list[str]:
    try:
        start = toks.index("(")
    except ValueError:
        return []
    args, _ = split_args(toks, start + 1)
    return [t for a in args for t in a]


def findExtS_mtdInv(
    chunk: MethodChunk,
    sources: SourceSet | Iterable[str],
    method_names: Iterable[str] = (),
) -> MethodData:
    """Scan one method top to bottom, collecting extended sources and call sites.

    An assignment whose value mentions a source or extended source adds its
    target to the extended sources; any other assignment removes it.  Each
    call site records the taint in force on its line and whether it sits
    inside a conditional whose condition mentions tainted data.
    """
    src = frozenset(sources.names if isinstance(sources, SourceSet) else sources)
    known_methods = frozenset(method_names)
    sig = chunk.signature_tokens
    name_at = method_header(sig)
    params = _signature_params(sig, name_at) if name_at is not None else ()
    ext: set[str] = set()
    invocations: list[MethodInvocation] = []
    frames: list[_Frame] = []
    last_chain: tuple[str, ...] | None = None

    def record(line: TokenLine, skip: int | None = None) -> None:
        live = frozenset(src | ext)
        cond_frames = [f for f in frames if f.conditional]
        tainted = [f for f in cond_frames if f.taint]
        for callee, args in _calls(line, skip):
            common = dict(
                enclosing_method=chunk.method_name,
                line_no=line.line_no,
                conditional_depth=len(cond_frames),
                enclosing_tainted_conditional=bool(tainted),
                live_taint=live,
                condition_taint=tainted[-1].taint if tainted else (),
            )
            invocations.append(MethodInvocation(callee, tuple(args), **common))
            if callee in _DISPATCHERS or callee.startswith("runEvery"):
                for arg in args:
                    handler = arg[0] if len(arg) == 1 else None
                    handler = _unquote(handler) if handler and is_string_token(handler) else handler
                    if handler in known_methods:
                        invocations.append(MethodInvocation(handler, (), dispatched=True, **common))

    record(sig, skip=name_at)
    for line in chunk.body:
        toks = line.tokens
        # closing braces first: they end blocks opened on earlier lines
        opens = 0
        for t in toks:
            if t == "{":
                opens += 1
            elif t == "}":
                if opens:
                    opens -= 1
                elif frames:
                    closed = frames.pop()
                    last_chain = closed.taint if closed.conditional else None
        head = [t for t in toks if t != "}"]
        is_header = bool(head) and head[0] in ("if", "else") and toks[-1] == "{"
        chain: tuple[str, ...] = ()
        if is_header:
            live = src | ext
            if head[0] == "if" or (len(head) > 1 and head[1] == "if"):
                cond = _condition_tokens(head)
                own = tuple(sorted(set(value_tokens(cond)) & live))
            else:
                own = ()
            inherited = last_chain or () if head[0] == "else" else ()
            chain = tuple(sorted(set(inherited) | set(own)))

        record(line)

        assign = _assignment(line) if not is_header else None
        if assign is not None:
            target, rhs = assign
            if target is not None and target not in src:
                if set(value_tokens(rhs)) & (src | ext):
                    ext.add(target)
                else:
                    ext.discard(target)

        depth_change = 0
        for t in toks:
            if t == "{":
                depth_change += 1
            elif t == "}" and depth_change > 0:
                depth_change -= 1
        for k in range(depth_change):
            frames.append(_Frame(conditional=is_header and k == depth_change - 1, taint=chain))
        if is_header:
            last_chain = None

    return MethodData(
        name=chunk.method_name,
        signature=" ".join(sig.tokens),
        params=params,
        ext_sources=frozenset(ext),
        invocations=tuple(invocations),
    )


def _arg_values(inv: MethodInvocation) -> list[list[str]]:
    return [value_tokens(a) for a in inv.argument_exprs]


def findExtSink(
    params: Sequence[str],
    invocations: Sequence[MethodInvocation],
    sinks: SinkSet,
    method_name: str | None = None,
    extended: dict[str, set[int]] | None = None,
) -> list[ExtendedSinkEntry]:
    """Parameters of a method that it passes straight into a sink call.

    ``extended`` maps already-known extended sinks to their sensitive
    indices; calls to them count only through those indices.
    """
    entries: list[ExtendedSinkEntry] = []
    seen = set()
    for idx, p in enumerate(params):
        for inv in invocations:
            if method_name is None:
                method_name = inv.enclosing_method
            values = _arg_values(inv)
            if inv.callee in sinks:
                hit = any(p in v for v in values)
            elif extended and inv.callee in extended:
                hit = any(p in v for i, v in enumerate(values) if i in extended[inv.callee])
            else:
                continue
            key = (p, idx, inv.callee)
            if hit and key not in seen:
                seen.add(key)
                entries.append(ExtendedSinkEntry(method_name or "", p, idx, inv.callee))
    return entries


def _extended_sinks(methods: Sequence[MethodData], sinks: SinkSet, transitive: bool) -> list[ExtendedSinkEntry]:
    entries: list[ExtendedSinkEntry] = []
    for md in methods:
        found = findExtSink(md.params, md.invocations, sinks, md.name)
        for e in found:
            e.check(sinks, len(md.params))
        entries.extend(found)
    if not transitive:
        return entries
    while True:
        index = _sensitive_indices(entries)
        known = {(e.method_name, e.param_index) for e in entries}
        added = []
        for md in methods:
            for e in findExtSink(md.params, md.invocations, SinkSet(frozenset()), md.name, index):
                if (e.method_name, e.param_index) not in known:
                    known.add((e.method_name, e.param_index))
                    added.append(e)
        if not added:
            return entries
        entries.extend(added)


def _sensitive_indices(entries: Iterable[ExtendedSinkEntry]) -> dict[str, set[int]]:
    index: dict[str, set[int]] = {}
    for e in entries:
        index.setdefault(e.method_name, set()).add(e.param_index)
    return index


def _flows_for(inv: MethodInvocation, sources: SourceSet, sinks: SinkSet, ext_index: dict[str, set[int]]) -> list[TaintedFlow]:
    values = _arg_values(inv)
    to_sink = inv.callee in sinks
    if to_sink:
        candidates = [t for v in values for t in v]
    elif inv.callee in ext_index:
        candidates = [t for i, v in enumerate(values) if i in ext_index[inv.callee] for t in v]
    else:
        return []
    flows = []
    seen = set()
    for t in candidates:
        if t in inv.live_taint and t not in seen:
            seen.add(t)
            category = FlowCategory.direct(t in sources, to_sink)
            flows.append(TaintedFlow(inv.enclosing_method, inv, t, category))
    if flows or not inv.enclosing_tainted_conditional:
        return flows
    if to_sink:
        return [TaintedFlow(inv.enclosing_method, inv, inv.condition_taint[0], FlowCategory.Sn_C)]
    if any(i < len(values) for i in ext_index[inv.callee]):
        return [TaintedFlow(inv.enclosing_method, inv, inv.condition_taint[0], FlowCategory.eSn_C)]
    return []


def _source_chunks(preferences: MethodChunk | None, others: Sequence[MethodChunk]) -> list[MethodChunk | None]:
    # inputs declared on dynamic pages live in ordinary methods
    pages = [c for c in others if any("dynamicPage" in ln.tokens for ln in c.lines())]
    return [preferences, *pages]


def mine(src: NormalizedSource, sinks: SinkSet, transitive: bool = False) -> MinerReport:
    """Find the tainted flows of one normalized app."""
    started = time.perf_counter()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NoPreferences)
        preferences, others = split_methods(tokenize(src))
    bag = calTokenFrequencies(others)
    report = MinerReport(src.app_name, bag=bag)
    if not (sinks.names & set(bag)):
        report.elapsed_ms = (time.perf_counter() - started) * 1000
        return report

    names: set[str] = set()
    for chunk in _source_chunks(preferences, others):
        names |= findSources(chunk).names
    sources = SourceSet(frozenset(names))
    method_names = [c.method_name for c in others]
    methods = [findExtS_mtdInv(c, sources, method_names) for c in others]
    ext_entries = _extended_sinks(methods, sinks, transitive)
    ext_index = _sensitive_indices(ext_entries)

    flows = []
    for md in methods:
        for inv in md.invocations:
            flows.extend(_flows_for(inv, sources, sinks, ext_index))

    report.sources = sources
    report.all_methods = methods
    report.extended_sinks = ext_entries
    report.flows = flows
    report.elapsed_ms = (time.perf_counter() - started) * 1000
    return report
