"""Shared fixtures and helpers for the test suite."""

from __future__ import annotations

import re
import warnings
from collections import Counter
from pathlib import Path

import pytest
from hypothesis import strategies as st

from taintminer import RawSource, load_sinks, mine, normalize, textscan
from taintminer.lexer import tokenize_text
from taintminer.preprocessor import NormalizedSource, strip_comments

FIXTURES = Path(__file__).parent / "fixtures"
LISTINGS = FIXTURES / "listings"
CORPUS = FIXTURES / "corpus"


def norm(text: str, name: str = "app") -> NormalizedSource:
    return normalize(RawSource.from_text(name, text))


def mine_text(text: str, sinks=None, transitive: bool = False):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return mine(norm(text), sinks or load_sinks(), transitive=transitive)


def listing(name: str) -> NormalizedSource:
    return normalize(RawSource.from_path(LISTINGS / f"{name}.groovy"))


def flow_tuples(report) -> list[tuple[str, str, int, str, str]]:
    return [
        (f.enclosing_method, f.invocation.callee, f.invocation.line_no, f.tainted_param, f.category.value)
        for f in report.flows
    ]


def token_multiset(text: str) -> Counter[str]:
    return Counter(tokenize_text(text).tokens)


def conservation_gap(raw: RawSource, out: NormalizedSource) -> Counter[str]:
    """Tokens gained or lost by normalization, beyond the braces it documents inserting.

    Every ``split_conditionals:braceless`` record stands for one ``{ }``
    pair wrapped around a braceless conditional body.
    """
    before = token_multiset(strip_comments(raw).text)
    wraps = sum(r.rule == "split_conditionals:braceless" for r in out.rewrite_log)
    before.update({"{": wraps, "}": wraps})
    after = token_multiset(out.text)
    return (after - before) + (before - after)


def brace_stack_ok(lines) -> bool:
    depth = 0
    for line in lines:
        for c in textscan.mask(line):
            if c == "{":
                depth += 1
            elif c == "}":
                depth -= 1
                if depth < 0:
                    return False
    return depth == 0


def corpus_files() -> list[Path]:
    return sorted(FIXTURES.rglob("*.groovy"))


@pytest.fixture(scope="session")
def sinks():
    return load_sinks()


# ----------------------------------------------------- standard-form checker

_CONDITIONAL = re.compile(r"(?<![\w.$])(?:else\s+if|if|else)(?![\w$])")
_CLOSERS_ONLY = re.compile(r"[\s)\]},;]*")


def _top_level_semicolons(masked: str) -> list[int]:
    depth = 0
    out = []
    for i, c in enumerate(masked):
        if c in "([":
            depth += 1
        elif c in ")]":
            depth -= 1
        elif c == ";" and depth == 0:
            out.append(i)
    return out


def standard_form_violations(out: NormalizedSource) -> list[str]:
    """Check the six standard-form properties line by line, independently of the preprocessor."""
    problems = []
    text = out.text
    if any(sp.kind != "string" for sp in textscan.scan(text)):
        problems.append("comment text survives")
    for n, line in enumerate(out.lines, start=1):
        masked = textscan.mask(line, comments=False)
        stripped = masked.strip()
        if re.search(r"\binput\b", masked) and masked.count("(") != masked.count(")"):
            problems.append(f"{n}: input call spans lines")
        if masked.count("[") != masked.count("]"):
            problems.append(f"{n}: map or list literal spans lines")
        conds = _CONDITIONAL.findall(stripped)
        if len(conds) > 1:
            problems.append(f"{n}: {len(conds)} conditionals on one line")
        if conds and stripped.startswith(("if", "else")) and not stripped.endswith("{"):
            problems.append(f"{n}: conditional does not end with '{{'")
        if stripped.startswith("}") and not _CLOSERS_ONLY.fullmatch(stripped):
            problems.append(f"{n}: code follows a closing brace")
        if any(masked[i + 1 :].strip() for i in _top_level_semicolons(masked)):
            problems.append(f"{n}: two statements on one line")
    if not brace_stack_ok(out.lines):
        problems.append("braces unbalanced")
    return problems


# ------------------------------------------------------ hypothesis strategy

_NAMES = ["x", "msg", "phone", "level", "data"]
_ATOMS = [
    'x = 1',
    'msg = "a;b // c" + x',
    'sendSms(phone, "${msg}; ok")',
    'def m = [uri: "http://h/p", body: [k: "x, ]"]]',
    'log.debug "done /* not a comment */"',
    'level += 2',
    'lights.each { it.off() }',
    "data = 'single { quoted'",
    'httpPost(uri: "u", body: msg) { resp -> log.debug resp }',
]


@st.composite
def groovy_statements(draw, depth: int = 0) -> list[str]:
    """A list of physical lines forming a well-formed, messily formatted body."""
    lines: list[str] = []
    for _ in range(draw(st.integers(1, 4))):
        kind = draw(st.sampled_from(["atom", "atom", "semi", "call", "if", "braceless", "comment"] if depth < 2 else ["atom", "semi"]))
        if kind == "atom":
            lines.append(draw(st.sampled_from(_ATOMS)))
        elif kind == "semi":
            a, b = draw(st.sampled_from(_ATOMS)), draw(st.sampled_from(_ATOMS))
            lines.append(f"{a}; {b}" + draw(st.sampled_from(["", ";"])))
        elif kind == "call":
            v = draw(st.sampled_from(_NAMES))
            lines.extend([f"notify({v},", f'    "text",', "    level)"])
        elif kind == "comment":
            lines.append(draw(st.sampled_from(_ATOMS)) + " // trailing ; { note")
            lines.extend(["/* block", "   comment } */"])
        elif kind == "braceless":
            v = draw(st.sampled_from(_NAMES))
            lines.append(f"if ({v}) " + draw(st.sampled_from(_ATOMS[:3])))
        else:
            v = draw(st.sampled_from(_NAMES))
            body = draw(groovy_statements(depth + 1))
            style = draw(st.sampled_from(["inline", "block", "brace_next"]))
            other = draw(groovy_statements(depth + 1)) if draw(st.booleans()) else None
            # only single-line atoms can be packed into a one-line block
            if style == "inline" and all(s in _ATOMS for s in body + (other or [])):
                head = f"if ({v}) {{ " + "; ".join(body) + " }"
                if other is not None:
                    head += " else { " + "; ".join(other) + " }"
                lines.append(head)
            else:
                lines.append(f"if ({v})" + ("" if style == "brace_next" else " {"))
                if style == "brace_next":
                    lines.append("{")
                lines.extend("    " + s for s in body)
                if other is not None:
                    lines.append("} else {")
                    lines.extend("    " + s for s in other)
                lines.append("}")
    return lines


@st.composite
def groovy_apps(draw) -> str:
    lines = ['definition(name: "Gen",', '    namespace: "t")', "preferences {"]
    lines.append('    input "phone", "phone",')
    lines.append('        title: "Phone"')
    lines.append('    input(name: "level", type: "number")')
    lines.append("}")
    for i in range(draw(st.integers(1, 3))):
        lines.append(f"def m{i}(a, b) {{")
        lines.extend("    " + s for s in draw(groovy_statements()))
        lines.append("}")
    return "\n".join(lines) + "\n"
