"""Shared taint vocabulary: sinks, sources, invocations, flows and their categories."""

from __future__ import annotations

import enum
import os
import warnings
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable

from .errors import EmptySinkSet

SINKS_ENV = "TAINTMINER_SINKS"


class FlowCategory(str, enum.Enum):
    """The six flow kinds, in the column order used for every output."""

    Sc_Sn = "Sc_Sn"
    eSc_Sn = "eSc_Sn"
    Sc_eSn = "Sc_eSn"
    eSc_eSn = "eSc_eSn"
    Sn_C = "Sn_C"
    eSn_C = "eSn_C"

    @classmethod
    def direct(cls, from_source: bool, to_sink: bool) -> FlowCategory:
        if to_sink:
            return cls.Sc_Sn if from_source else cls.eSc_Sn
        return cls.Sc_eSn if from_source else cls.eSc_eSn

    @classmethod
    def ordered(cls) -> list[FlowCategory]:
        return list(cls)


FLOW_COLUMNS: tuple[str, ...] = tuple(c.value for c in FlowCategory)


@dataclass(frozen=True)
class SinkSet:
    names: frozenset[str]

    def __post_init__(self) -> None:
        object.__setattr__(self, "names", frozenset(self.names))

    def __contains__(self, name: object) -> bool:
        return name in self.names

    def __iter__(self):
        return iter(sorted(self.names))

    def __len__(self) -> int:
        return len(self.names)


def parse_sinks(lines: Iterable[str]) -> SinkSet:
    names = set()
    for raw in lines:
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        names.add(line)
    if not names:
        warnings.warn("sink list is empty; no flows can be found", EmptySinkSet, stacklevel=3)
    return SinkSet(frozenset(names))


def load_sinks(path: str | os.PathLike[str] | None = None) -> SinkSet:
    """Read a sink file: one method name per line, ``#`` comment lines allowed.

    With no path, ``$TAINTMINER_SINKS`` is tried, then the bundled list.
    Raises ``FileNotFoundError`` for a named file that does not exist.
    """
    if path is None:
        path = os.environ.get(SINKS_ENV) or None
    if path is None:
        text = resources.files("taintminer").joinpath("data/Sinks.txt").read_text(encoding="utf-8")
        return parse_sinks(text.splitlines())
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"sink file not found: {path}")
    return parse_sinks(path.read_text(encoding="utf-8").splitlines())


@dataclass(frozen=True)
class SourceSet:
    names: frozenset[str] = frozenset()

    def __contains__(self, name: object) -> bool:
        return name in self.names

    def __iter__(self):
        return iter(sorted(self.names))

    def __len__(self) -> int:
        return len(self.names)


@dataclass(frozen=True)
class ExtendedSourceSet:
    per_method: dict[str, frozenset[str]] = field(default_factory=dict)

    def of(self, method: str) -> frozenset[str]:
        return self.per_method.get(method, frozenset())


@dataclass(frozen=True)
class MethodInvocation:
    """One call site.

    ``live_taint`` is ``S ∪ extS`` as it stood just before the call's line,
    and ``condition_taint`` names the tainted identifiers of the innermost
    enclosing tainted conditional (empty when there is none).
    """

    callee: str
    argument_exprs: tuple[tuple[str, ...], ...]
    enclosing_method: str
    line_no: int
    conditional_depth: int = 0
    enclosing_tainted_conditional: bool = False
    live_taint: frozenset[str] = frozenset()
    condition_taint: tuple[str, ...] = ()
    dispatched: bool = False

    def __post_init__(self) -> None:
        if not self.callee:
            raise ValueError("callee must be non-empty")

    def argument_tokens(self) -> set[str]:
        return {t for arg in self.argument_exprs for t in arg}


@dataclass(frozen=True)
class ExtendedSinkEntry:
    method_name: str
    param_name: str
    param_index: int
    underlying_sink: str

    def check(self, sinks: SinkSet, arity: int, extended: Iterable[str] = ()) -> None:
        if self.param_index < 0 or self.param_index >= arity:
            raise ValueError(f"{self.method_name}: parameter index {self.param_index} out of range")
        if self.underlying_sink not in sinks and self.underlying_sink not in set(extended):
            raise ValueError(f"{self.underlying_sink} is not a sink")


@dataclass(frozen=True)
class TaintedFlow:
    enclosing_method: str
    invocation: MethodInvocation
    tainted_param: str
    category: FlowCategory

    def to_json(self) -> dict[str, object]:
        return {
            "method": self.enclosing_method,
            "callee": self.invocation.callee,
            "line": self.invocation.line_no,
            "param": self.tainted_param,
            "category": self.category.value,
        }
