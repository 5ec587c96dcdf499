"""Mutant corpus generation.

Three mutation families rearrange an app without changing its tokens:

* ``reorder_statements`` swaps two simple statements of one block, e.g. a
  taint and the reassignment that kills it;
* ``conditional_wrap`` moves a statement across the boundary of an adjacent
  ``if`` block, into or out of its body;
* ``call_indirection`` swaps two arguments of a call to a user-defined
  helper, moving a value onto or off the parameter the helper forwards to a
  sink.

Mutants keep their seed's bag of words, so only flow information separates
the vulnerable ones from the rest.  Labels come from the reference
interpreter in :mod:`taintminer.oracle`, never from the intent of the edit.
"""

from __future__ import annotations

import random
import re
import warnings
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

from .errors import InapplicableMutation
from .oracle import UnsupportedSyntax, interpret
from .preprocessor import NormalizedSource, RawSource, normalize
from .taintmodel import SinkSet
from .vectorizer import NON_VULNERABLE, VULNERABLE

__all__ = [
    "MUTATION_KINDS",
    "MutationOp",
    "Mutant",
    "DEFAULT_VULN_RATIO",
    "candidate_ops",
    "mutate",
    "generate_corpus",
    "label_of",
]

MUTATION_KINDS = ("reorder_statements", "conditional_wrap", "call_indirection")
DEFAULT_VULN_RATIO = 858 / (858 + 328)

_METHOD = re.compile(r"^\s*(?:(?:private|public|protected|static|def|void|[A-Z]\w*)\s+)+([A-Za-z_]\w*)\s*\((.*)\)\s*\{\s*$")
_CALL = re.compile(r"\b([A-Za-z_]\w*)\s*\(")


@dataclass(frozen=True)
class MutationOp:
    """One edit.  ``lines`` are 0-based indices into the normalized lines:
    the two statements to swap, the statement to move, or the call line."""

    kind: str
    method: str
    lines: tuple[int, ...]
    makes_vulnerable: bool | None = None

    def __post_init__(self) -> None:
        if self.kind not in MUTATION_KINDS:
            raise ValueError(f"unknown mutation kind {self.kind!r}")


@dataclass(frozen=True)
class Mutant:
    name: str
    source: NormalizedSource
    label: str
    ops: tuple[MutationOp, ...]

    @property
    def mutation_kind(self) -> str:
        return "+".join(sorted({op.kind for op in self.ops})) or "identity"


# ------------------------------------------------------------ structure


def _is_brace_line(text: str) -> bool:
    s = text.strip()
    return s.endswith("{") or s.startswith("}")


def _methods(lines: Sequence[str]) -> list[tuple[str, int, int]]:
    """(name, header index, closing index) of every top-level method."""
    out = []
    depth = 0
    i = 0
    while i < len(lines):
        m = _METHOD.match(lines[i]) if depth == 0 else None
        if m:
            d = 0
            for j in range(i, len(lines)):
                d += lines[j].count("{") - lines[j].count("}")
                if d == 0:
                    out.append((m.group(1), i, j))
                    i = j + 1
                    break
            else:
                return out
            continue
        depth += lines[i].count("{") - lines[i].count("}")
        i += 1
    return out


def _block_id(lines: Sequence[str], start: int, i: int) -> tuple[int, ...]:
    """The path of open blocks enclosing line ``i`` inside the method at ``start``."""
    stack = [start]
    for j in range(start + 1, i):
        s = lines[j].strip()
        if s.startswith("}"):
            stack.pop()
        if s.endswith("{"):
            stack.append(j)
    return tuple(stack)


def _helpers(lines: Sequence[str]) -> dict[str, int]:
    out = {}
    for name, head, _ in _methods(lines):
        params = [p for p in _METHOD.match(lines[head]).group(2).split(",") if p.strip()]
        out[name] = len(params)
    return out


def _split_call_args(text: str, open_at: int) -> tuple[list[tuple[int, int]], int] | None:
    """Spans of the top-level arguments of the call whose ``(`` is at ``open_at``."""
    depth = 0
    quote = None
    spans = []
    start = open_at + 1
    i = open_at
    while i < len(text):
        c = text[i]
        if quote:
            if c == "\\":
                i += 2
                continue
            if c == quote:
                quote = None
        elif c in "'\"":
            quote = c
        elif c in "([{":
            depth += 1
        elif c in ")]}":
            depth -= 1
            if depth == 0:
                spans.append((start, i))
                return spans, i
        elif c == "," and depth == 1:
            spans.append((start, i))
            start = i + 1
        i += 1
    return None


# ------------------------------------------------------------ candidates


def candidate_ops(src: NormalizedSource) -> list[MutationOp]:
    """Every applicable edit of ``src``."""
    lines = list(src.lines)
    helpers = _helpers(lines)
    ops: list[MutationOp] = []
    for name, head, close in _methods(lines):
        body = range(head + 1, close)
        simple = [i for i in body if lines[i].strip() and not _is_brace_line(lines[i])]
        blocks = {i: _block_id(lines, head, i) for i in simple}
        for a_pos, a in enumerate(simple):
            for b in simple[a_pos + 1 :]:
                if blocks[a] == blocks[b]:
                    ops.append(MutationOp("reorder_statements", name, (a, b)))
        for i in simple:
            if _wrap_target(lines, i) is not None:
                ops.append(MutationOp("conditional_wrap", name, (i,)))
            m = _first_helper_call(lines[i], helpers)
            if m is not None:
                ops.append(MutationOp("call_indirection", name, (i,)))
    return ops


def _if_block_end(lines: Sequence[str], i: int) -> bool:
    """True when ``lines[i]`` is the ``}`` closing an if/else block not followed by ``else``."""
    if lines[i].strip() != "}":
        return False
    nxt = lines[i + 1].strip() if i + 1 < len(lines) else ""
    if nxt.startswith("else"):
        return False
    depth = 0
    for j in range(i, -1, -1):
        s = lines[j].strip()
        if s.startswith("}"):
            depth += 1
        if s.endswith("{"):
            depth -= 1
            if depth == 0:
                return bool(re.match(r"^(?:if|else)\b", s))
    return False


def _wrap_target(lines: Sequence[str], i: int) -> int | None:
    """Index the statement at ``i`` moves to, or None."""
    if i + 1 < len(lines) and _if_block_end(lines, i + 1):
        return i + 1  # last statement of the block: move it out, after the brace
    if i > 0 and _if_block_end(lines, i - 1):
        return i - 1  # first statement after the block: move it in, before the brace
    return None


def _first_helper_call(text: str, helpers: dict[str, int]) -> tuple[int, list[tuple[int, int]]] | None:
    for m in _CALL.finditer(text):
        if helpers.get(m.group(1), 0) >= 2:
            parsed = _split_call_args(text, m.end() - 1)
            if parsed and len(parsed[0]) >= 2:
                return m.start(), parsed[0]
    return None


# ------------------------------------------------------------ mutation


def _reindent(text: str, like: str) -> str:
    return like[: len(like) - len(like.lstrip())] + text.strip()


def _apply(lines: list[str], op: MutationOp, rng: random.Random) -> list[str]:
    out = list(lines)
    if op.kind == "reorder_statements":
        a, b = op.lines
        if a == b:
            return out
        for i in (a, b):
            if i >= len(out) or _is_brace_line(out[i]):
                raise InapplicableMutation(f"line {i + 1} is not a simple statement")
        out[a], out[b] = _reindent(out[b], out[a]), _reindent(out[a], out[b])
        return out
    if op.kind == "conditional_wrap":
        (i,) = op.lines
        if i >= len(out) or _is_brace_line(out[i]):
            raise InapplicableMutation(f"line {i + 1} is not a simple statement")
        j = _wrap_target(out, i)
        if j is None:
            raise InapplicableMutation(f"line {i + 1} is not next to an if block")
        out[i], out[j] = _reindent(out[j], out[i]), _reindent(out[i], out[j])
        return out
    (i,) = op.lines
    found = _first_helper_call(out[i], _helpers(out)) if i < len(out) else None
    if found is None:
        raise InapplicableMutation(f"line {i + 1} calls no helper with two or more parameters")
    _, spans = found
    x, y = sorted(rng.sample(range(len(spans)), 2)) if len(spans) > 2 else (0, 1)
    text = out[i]
    (a0, a1), (b0, b1) = spans[x], spans[y]
    first, second = text[a0:a1], text[b0:b1]
    out[i] = text[:a0] + _swap_ws(first, second) + text[a1:b0] + _swap_ws(second, first) + text[b1:]
    return out


def _swap_ws(slot: str, value: str) -> str:
    # keep the slot's surrounding spaces, take the other argument's text
    lead = slot[: len(slot) - len(slot.lstrip())]
    trail = slot[len(slot.rstrip()) :]
    return lead + value.strip() + trail


def label_of(src: NormalizedSource, sinks: SinkSet) -> str:
    """Vulnerable iff the reference interpreter finds a flow."""
    return VULNERABLE if interpret(src.text, sinks.names).vulnerable else NON_VULNERABLE


def mutate(src: NormalizedSource, op: MutationOp, seed: int, sinks: SinkSet) -> tuple[NormalizedSource, str]:
    """Apply ``op`` and label the result.

    ``seed`` picks the argument pair when a helper call has more than two
    arguments.  Raises :class:`InapplicableMutation` when the target does
    not fit the operation.
    """
    if op.method not in {name for name, _, _ in _methods(src.lines)}:
        raise InapplicableMutation(f"no method named {op.method}")
    lines = _apply(list(src.lines), op, random.Random(seed))
    out = NormalizedSource(src.app_name, tuple(lines), ())
    return out, label_of(out, sinks)


def _mutant_pool(
    src: NormalizedSource, sinks: SinkSet, rng: random.Random, want: dict[str, int], attempts: int
) -> dict[str, list[tuple[NormalizedSource, tuple[MutationOp, ...]]]]:
    seen = {src.lines}
    pool: dict[str, list] = {VULNERABLE: [], NON_VULNERABLE: []}
    for _ in range(attempts):
        if all(len(pool[k]) >= n for k, n in want.items()):
            break
        cur = src
        applied: list[MutationOp] = []
        for _ in range(rng.randint(1, 4)):
            ops = candidate_ops(cur)
            if not ops:
                break
            op = rng.choice(ops)
            try:
                cur, label = mutate(cur, op, rng.randrange(2**31), sinks)
            except (InapplicableMutation, UnsupportedSyntax):
                break
            applied.append(replace(op, makes_vulnerable=label == VULNERABLE))
        if not applied or cur.lines in seen:
            continue
        seen.add(cur.lines)
        label = VULNERABLE if applied[-1].makes_vulnerable else NON_VULNERABLE
        pool[label].append((cur, tuple(applied)))
    return pool


def generate_corpus(
    seeds: Iterable[NormalizedSource | RawSource],
    per_seed: int,
    seed: int,
    sinks: SinkSet,
    vuln_ratio: float = DEFAULT_VULN_RATIO,
    attempts: int = 400,
) -> list[Mutant]:
    """``per_seed`` distinct mutants of every seed, ``round(per_seed * vuln_ratio)``
    of them vulnerable.

    Every seed gets the same label mix, so the label cannot be read off the
    seed's vocabulary.  Seeds that cannot supply enough mutants of either
    label within ``attempts`` random edit chains are skipped with a warning.
    """
    if per_seed < 2:
        raise ValueError("per_seed must be at least 2")
    if not 0.0 <= vuln_ratio <= 1.0:
        raise ValueError("vuln_ratio must lie in [0, 1]")
    n_vuln = round(per_seed * vuln_ratio)
    want = {VULNERABLE: n_vuln, NON_VULNERABLE: per_seed - n_vuln}
    corpus: list[Mutant] = []
    for k, s in enumerate(seeds):
        src = s if isinstance(s, NormalizedSource) else normalize(s)
        rng = random.Random(f"{seed}:{k}:{src.app_name}")
        try:
            interpret(src.text, sinks.names)
        except UnsupportedSyntax as exc:
            warnings.warn(f"{src.app_name}: skipped, outside the interpreter's subset ({exc})", stacklevel=2)
            continue
        pool = _mutant_pool(src, sinks, rng, want, attempts)
        if any(len(pool[lab]) < n for lab, n in want.items()):
            warnings.warn(
                f"{src.app_name}: skipped, found {len(pool[VULNERABLE])} vulnerable and "
                f"{len(pool[NON_VULNERABLE])} non-vulnerable mutants",
                stacklevel=2,
            )
            continue
        chosen = [(lab, m) for lab, n in want.items() for m in pool[lab][:n]]
        rng.shuffle(chosen)
        for idx, (lab, (mut, ops)) in enumerate(chosen):
            name = f"{src.app_name}_m{idx:02d}"
            corpus.append(Mutant(name, NormalizedSource(name, mut.lines, ()), lab, ops))
    return corpus
