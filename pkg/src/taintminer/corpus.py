"""Corpus loading and the per-app processing shared by the CLI commands."""

from __future__ import annotations

import csv
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .errors import EmptyCorpus, TaintMinerError
from .flowsminer import MinerReport, mine
from .lexer import BagOfWords
from .preprocessor import NormalizedSource, RawSource, normalize
from .taintmodel import SinkSet
from .vectorizer import NON_VULNERABLE, UNKNOWN, VULNERABLE, FeatureMatrix, build_vocabulary, combine, flow2vec, token2vec

__all__ = ["CorpusEntry", "CorpusManifest", "AppResult", "load_corpus", "process", "feature_matrix"]

MANIFEST = "manifest.csv"
_LABELS = {VULNERABLE, NON_VULNERABLE, UNKNOWN}


@dataclass(frozen=True)
class CorpusEntry:
    path: Path
    label: str = UNKNOWN
    name: str = ""


@dataclass(frozen=True)
class CorpusManifest:
    entries: tuple[CorpusEntry, ...]

    def __len__(self) -> int:
        return len(self.entries)

    def labels(self) -> dict[str, str]:
        return {e.name: e.label for e in self.entries}

    def require_labels(self) -> None:
        missing = [e.name for e in self.entries if e.label == UNKNOWN]
        if missing:
            raise TaintMinerError(f"{len(missing)} app(s) have no label, e.g. {missing[0]}")


def _read_manifest(path: Path) -> list[CorpusEntry]:
    entries = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            label = (row.get("label") or UNKNOWN).strip()
            if label not in _LABELS:
                raise TaintMinerError(f"{path}: unknown label {label!r}")
            file = path.parent / row["file"].strip()
            if not file.is_file():
                raise FileNotFoundError(f"{path}: listed file {file} does not exist")
            entries.append(CorpusEntry(file, label))
    return entries


def load_corpus(paths: str | Path | Sequence[str | Path]) -> CorpusManifest:
    """Collect the apps under one or more paths.

    A path may be a ``.groovy`` file, a ``manifest.csv`` (``file,label``
    rows), or a directory.  A directory holding ``manifest.csv`` is read
    through it; otherwise ``vulnerable/`` and ``non-vulnerable/``
    subdirectories give labels, and any other ``.groovy`` file is unlabeled.
    App names are file stems, suffixed ``~2``, ``~3``... on collision.
    """
    if isinstance(paths, (str, Path)):
        paths = [paths]
    found: list[CorpusEntry] = []
    for raw in paths:
        p = Path(raw)
        if p.is_file() and p.name.endswith(".csv"):
            found.extend(_read_manifest(p))
        elif p.is_file():
            found.append(CorpusEntry(p))
        elif p.is_dir() and (p / MANIFEST).is_file():
            found.extend(_read_manifest(p / MANIFEST))
        elif p.is_dir():
            for f in sorted(p.rglob("*.groovy")):
                parts = f.relative_to(p).parts
                label = parts[0] if len(parts) > 1 and parts[0] in (VULNERABLE, NON_VULNERABLE) else UNKNOWN
                found.append(CorpusEntry(f, label))
        else:
            raise FileNotFoundError(f"no such file or directory: {p}")
    if not found:
        raise EmptyCorpus("the corpus holds no .groovy files")
    named: list[CorpusEntry] = []
    used: dict[str, int] = {}
    for e in sorted(found, key=lambda e: (e.path.stem, str(e.path))):
        stem = e.path.stem
        used[stem] = used.get(stem, 0) + 1
        name = stem if used[stem] == 1 else f"{stem}~{used[stem]}"
        named.append(CorpusEntry(e.path, e.label, name))
    return CorpusManifest(tuple(named))


@dataclass(frozen=True)
class AppResult:
    name: str
    label: str
    normalized: NormalizedSource | None
    report: MinerReport | None
    error: str | None = None

    @property
    def bag(self) -> BagOfWords:
        return self.report.bag if self.report is not None else BagOfWords()


def _process_one(args: tuple[CorpusEntry, SinkSet, bool]) -> AppResult:
    entry, sinks, transitive = args
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            src = normalize(RawSource.from_path(entry.path, entry.name))
            report = mine(src, sinks, transitive=transitive)
    except (TaintMinerError, UnicodeDecodeError, OSError) as exc:
        return AppResult(entry.name, entry.label, None, None, f"{type(exc).__name__}: {exc}")
    return AppResult(entry.name, entry.label, src, report)


def process(
    manifest: CorpusManifest | Iterable[CorpusEntry], sinks: SinkSet, transitive: bool = False, jobs: int = 1
) -> list[AppResult]:
    """Normalize and mine every app; results come back sorted by app name."""
    entries = list(manifest.entries if isinstance(manifest, CorpusManifest) else manifest)
    work = [(e, sinks, transitive) for e in entries]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_process_one, work, chunksize=8))
    else:
        results = [_process_one(w) for w in work]
    return sorted(results, key=lambda r: r.name)


def feature_matrix(results: Sequence[AppResult], min_apps: int = 5) -> FeatureMatrix:
    """BoW columns then the six flow columns, one row per successfully mined app."""
    ok = [r for r in results if r.error is None]
    if not ok:
        raise EmptyCorpus("no app could be processed")
    bags = [(r.name, r.bag) for r in ok]
    vocab = build_vocabulary(bags, min_apps)
    tokens = token2vec(bags, vocab)
    fm = combine(tokens, [(r.name, flow2vec(r.report)) for r in ok])
    return FeatureMatrix(fm.row_labels, fm.column_labels, fm.values, [r.label for r in ok])
