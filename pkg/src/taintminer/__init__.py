"""Lexical taint-flow mining and flow-aware vulnerability classification for SmartThings apps."""

from __future__ import annotations

from importlib.metadata import PackageNotFoundError, version

from .flowsminer import MinerReport, mine
from .lexer import BagOfWords, bag_of_words, split_methods, tokenize
from .preprocessor import NormalizedSource, RawSource, normalize
from .taintmodel import FlowCategory, SinkSet, SourceSet, TaintedFlow, load_sinks

try:
    __version__ = version("artifact")
except PackageNotFoundError:  # running from a source tree
    __version__ = "0.1.0"

__all__ = [
    "BagOfWords",
    "FlowCategory",
    "MinerReport",
    "NormalizedSource",
    "RawSource",
    "SinkSet",
    "SourceSet",
    "TaintedFlow",
    "bag_of_words",
    "load_sinks",
    "mine",
    "normalize",
    "split_methods",
    "tokenize",
]
