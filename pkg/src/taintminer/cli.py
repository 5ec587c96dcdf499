"""Command-line entry point: ``taintminer <command> ...``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import pickle
import sys
import time
import warnings
from collections import Counter, defaultdict
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .corpus import AppResult, feature_matrix, load_corpus, process
from .errors import TaintMinerError
from .ml import Dataset, SplitConfig, evaluate
from .ml.experiment import SHORT_NAMES, Experiment, format_table, run_experiment
from .mutgen import DEFAULT_VULN_RATIO, generate_corpus
from .preprocessor import RawSource, normalize
from .synth import seed_apps
from .taintmodel import FLOW_COLUMNS, SinkSet, load_sinks
from .vectorizer import UNKNOWN, FeatureMatrix

log = logging.getLogger("taintminer")

EXIT_OK, EXIT_FATAL, EXIT_PARTIAL = 0, 1, 2


class _Run:
    """Per-invocation state: flags plus the per-file failure count."""

    def __init__(self, args: argparse.Namespace) -> None:
        self.args = args
        self.failures = 0

    def sinks(self) -> SinkSet:
        return load_sinks(self.args.sinks)

    def mined(self, paths: Sequence[str]) -> list[AppResult]:
        manifest = load_corpus(paths)
        results = process(manifest, self.sinks(), transitive=self.args.transitive, jobs=self.args.jobs)
        for r in results:
            if r.error is not None:
                self.failures += 1
                log.warning("%s: %s", r.name, r.error)
        return results

    @property
    def exit_code(self) -> int:
        return EXIT_PARTIAL if self.failures and self.args.strict else EXIT_OK


def _out_path(args: argparse.Namespace, default: str | None = None) -> Path | None:
    if args.out:
        return Path(args.out)
    return Path(default) if default else None


def _write(text: str, path: Path | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")


def _split(args: argparse.Namespace) -> SplitConfig:
    return SplitConfig(args.split, args.seed)


def _kinds(args: argparse.Namespace) -> list[str]:
    return list(SHORT_NAMES) if args.model == "all" else [args.model]


# ------------------------------------------------------------------ commands


def cmd_preprocess(run: _Run) -> int:
    args = run.args
    out = Path(args.out) if args.out else None
    manifest = load_corpus(args.paths)
    for e in manifest.entries:
        try:
            src = normalize(RawSource.from_path(e.path, e.name))
        except TaintMinerError as exc:
            run.failures += 1
            log.warning("%s: %s", e.name, exc)
            continue
        if out is None:
            sys.stdout.write(src.text)
        else:
            _write(src.text, out / f"{e.name}.groovy")
    return run.exit_code


def cmd_bow(run: _Run) -> int:
    lines = []
    for r in run.mined(run.args.paths):
        if r.error is None:
            lines.append(json.dumps({"app": r.name, "label": r.label, "bow": r.bag.to_dict()}, sort_keys=True))
    _write("".join(line + "\n" for line in lines), _out_path(run.args))
    return run.exit_code


def _flows_json(results: list[AppResult]) -> str:
    return json.dumps([r.report.to_json() for r in results if r.error is None], indent=1) + "\n"


def _summary(results: list[AppResult], elapsed: float) -> str:
    totals = Counter()
    for r in results:
        if r.error is None:
            totals.update(r.report.counts())
    head = " ".join(f"{c:>8}" for c in FLOW_COLUMNS)
    row = " ".join(f"{totals[c]:>8}" for c in FLOW_COLUMNS)
    n = sum(r.error is None for r in results)
    return f"{head}\n{row}\nmined {n} app(s) in {elapsed:.2f} s\n"


def cmd_mine(run: _Run) -> int:
    start = time.perf_counter()
    results = run.mined(run.args.paths)
    _write(_flows_json(results), _out_path(run.args))
    sys.stderr.write(_summary(results, time.perf_counter() - start))
    return run.exit_code


def cmd_vectorize(run: _Run) -> int:
    fm = feature_matrix(run.mined(run.args.paths), run.args.min_apps)
    _write(fm.to_csv(), _out_path(run.args))
    return run.exit_code


def _experiment(run: _Run, fm: FeatureMatrix) -> Experiment:
    args = run.args
    missing = [a for a, lab in zip(fm.row_labels, fm.labels) if lab == UNKNOWN]
    if missing:
        raise TaintMinerError(f"{len(missing)} row(s) have no label, e.g. {missing[0]}")
    return run_experiment(fm, args.features, _split(args), _kinds(args), args.k)


def cmd_train(run: _Run) -> int:
    exp = _experiment(run, FeatureMatrix.from_csv(run.args.features_csv))
    out = _out_path(run.args, "model.pkl")
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "wb") as fh:
        pickle.dump(exp, fh)
    sys.stderr.write(f"trained {', '.join(exp.models)} on {exp.features}; {len(exp.test_apps)} test rows held out\n")
    return run.exit_code


def cmd_evaluate(run: _Run) -> int:
    args = run.args
    fm = FeatureMatrix.from_csv(args.features_csv)
    if args.model_file:
        with open(args.model_file, "rb") as fh:
            saved: Experiment = pickle.load(fh)
        rows = [fm.row_labels.index(a) for a in saved.test_apps]
        test = Dataset(fm.rows(rows).select(saved.features))
        saved.results = {name: evaluate(m, test) for name, m in saved.models.items()}
        exp = saved
    else:
        exp = _experiment(run, fm)
    _write(json.dumps(exp.to_json(), indent=1, sort_keys=True) + "\n", _out_path(args, "eval.json"))
    sys.stderr.write(format_table(exp.results) + "\n")
    return run.exit_code


def _align(fm: FeatureMatrix, columns: list[str]) -> np.ndarray:
    index = {c: j for j, c in enumerate(fm.column_labels)}
    X = np.zeros((len(fm.row_labels), len(columns)))
    for j, c in enumerate(columns):
        if c in index:
            X[:, j] = fm.values[:, index[c]]
    return X


def cmd_predict(run: _Run) -> int:
    args = run.args
    with open(args.model_file, "rb") as fh:
        saved: Experiment = pickle.load(fh)
    if len(args.paths) == 1 and args.paths[0].endswith(".csv") and not Path(args.paths[0]).name == "manifest.csv":
        fm = FeatureMatrix.from_csv(args.paths[0])
    else:
        fm = feature_matrix(run.mined(args.paths), min_apps=1)
    X = _align(fm, saved.columns)
    rows = [["app", "classifier", "score", "prediction"]]
    for name, model in saved.models.items():
        scores, preds = model.score(X), model.predict(X)
        for app, s, p in zip(fm.row_labels, scores, preds):
            rows.append([app, name, f"{s:.6f}", "vulnerable" if p else "non-vulnerable"])
    _write("".join(",".join(r) + "\n" for r in rows), _out_path(args))
    return run.exit_code


def cmd_stats(run: _Run) -> int:
    sinks = run.sinks()
    results = [r for r in run.mined(run.args.paths) if r.error is None]
    # sink -> label -> frequency -> number of apps
    hist: dict[str, dict[str, Counter]] = defaultdict(lambda: defaultdict(Counter))
    for r in results:
        for sink in sinks:
            freq = r.bag.get(sink, 0)
            if freq:
                hist[sink][r.label][freq] += 1
    rows = [["sink", "label", "apps", "occurrences", "histogram"]]
    for sink in sorted(hist):
        for label in sorted(hist[sink]):
            h = hist[sink][label]
            rows.append(
                [
                    sink,
                    label,
                    str(sum(h.values())),
                    str(sum(f * n for f, n in h.items())),
                    ";".join(f"{f}:{n}" for f, n in sorted(h.items())),
                ]
            )
    _write("".join(",".join(r) + "\n" for r in rows), _out_path(run.args))
    return run.exit_code


def cmd_mutgen(run: _Run) -> int:
    args = run.args
    if args.per_seed < 2:
        raise TaintMinerError("--per-seed must be at least 2")
    if args.builtin_seeds:
        seeds = [normalize(RawSource.from_text(n, t)) for n, t in seed_apps(args.builtin_seeds, args.seed)]
    else:
        if not args.paths:
            raise TaintMinerError("give a seed directory or --builtin-seeds N")
        seeds = []
        for e in load_corpus(args.paths).entries:
            try:
                seeds.append(normalize(RawSource.from_path(e.path, e.name)))
            except TaintMinerError as exc:
                run.failures += 1
                log.warning("%s: %s", e.name, exc)
    out = _out_path(args, "mutants")
    out.mkdir(parents=True, exist_ok=True)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        mutants = generate_corpus(seeds, args.per_seed, args.seed, run.sinks(), args.vuln_ratio)
    for w in caught:
        log.warning("%s", w.message)
    rows = [["file", "label", "mutation_kind"]]
    for m in mutants:
        file = f"{m.name}.groovy"
        (out / file).write_text(m.source.text, encoding="utf-8")
        rows.append([file, m.label, m.mutation_kind])
    with open(out / "manifest.csv", "w", newline="", encoding="utf-8") as fh:
        csv.writer(fh, lineterminator="\n").writerows(rows)
    labels = Counter(m.label for m in mutants)
    sys.stderr.write(f"wrote {len(mutants)} mutant(s) to {out}: {dict(sorted(labels.items()))}\n")
    return run.exit_code


def cmd_pipeline(run: _Run) -> int:
    args = run.args
    out = _out_path(args, "taintminer-out")
    start = time.perf_counter()
    results = run.mined(args.paths)
    for r in results:
        if r.normalized is not None:
            _write(r.normalized.text, out / "normalized" / f"{r.name}.groovy")
    _write(_flows_json(results), out / "flows.json")
    fm = feature_matrix(results, args.min_apps)
    _write(fm.to_csv(), out / "features.csv")
    exp = _experiment(run, fm)
    _write(json.dumps(exp.to_json(), indent=1, sort_keys=True) + "\n", out / "eval.json")
    sys.stderr.write(_summary(results, time.perf_counter() - start))
    sys.stderr.write(format_table(exp.results) + "\n")
    return run.exit_code


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--sinks", help="sink list file (default: $TAINTMINER_SINKS, then the bundled list)")
    common.add_argument("--out", help="output file or directory")
    common.add_argument("--jobs", type=int, default=1, help="worker processes for mining")
    common.add_argument("--strict", action="store_true", help="exit 2 when any file fails")
    common.add_argument("--transitive", action="store_true", help="iterate extended sinks to a fixpoint")
    common.add_argument("--seed", type=int, default=42)
    common.add_argument("-v", "--verbose", action="store_true")

    learn = argparse.ArgumentParser(add_help=False)
    learn.add_argument("--features", choices=("bow", "flows", "bow+flows"), default="bow+flows")
    learn.add_argument("--split", type=float, default=0.70, help="training fraction")
    learn.add_argument("--model", choices=(*SHORT_NAMES, "all"), default="all")
    learn.add_argument("--k", type=int, default=5, help="neighbours for knn")

    vocab = argparse.ArgumentParser(add_help=False)
    vocab.add_argument("--min-apps", type=int, default=5, help="keep tokens found in at least this many apps")

    p = argparse.ArgumentParser(prog="taintminer", description="Lexical taint-flow mining for SmartThings apps.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def corpus_cmd(name: str, help: str, *parents: argparse.ArgumentParser) -> argparse.ArgumentParser:
        sp = sub.add_parser(name, help=help, parents=[common, *parents])
        sp.add_argument("paths", nargs="+", help="files, directories or manifest.csv")
        return sp

    corpus_cmd("preprocess", "print or write normalized sources").set_defaults(func=cmd_preprocess)
    corpus_cmd("bow", "bag of words per app, as JSON lines").set_defaults(func=cmd_bow)
    corpus_cmd("mine", "tainted flows per app, as JSON").set_defaults(func=cmd_mine)
    corpus_cmd("vectorize", "feature CSV: tokens then flow counts", vocab).set_defaults(func=cmd_vectorize)
    corpus_cmd("stats", "per-sink app counts as CSV").set_defaults(func=cmd_stats)
    corpus_cmd("pipeline", "normalize, mine, vectorize and evaluate", vocab, learn).set_defaults(func=cmd_pipeline)

    sp = sub.add_parser("train", help="fit classifiers on a feature CSV", parents=[common, learn])
    sp.add_argument("features_csv")
    sp.set_defaults(func=cmd_train)

    sp = sub.add_parser("evaluate", help="held-out metrics as JSON", parents=[common, learn])
    sp.add_argument("features_csv")
    sp.add_argument("--model-file", help="models saved by 'train'; otherwise train here")
    sp.set_defaults(func=cmd_evaluate)

    sp = sub.add_parser("predict", help="score apps with saved models", parents=[common])
    sp.add_argument("paths", nargs="+", help="a feature CSV, or apps to mine")
    sp.add_argument("--model-file", required=True)
    sp.set_defaults(func=cmd_predict)

    sp = sub.add_parser("mutgen", help="generate a labeled mutant corpus", parents=[common])
    sp.add_argument("paths", nargs="*", help="seed apps")
    sp.add_argument("--per-seed", type=int, default=18)
    sp.add_argument("--vuln-ratio", type=float, default=DEFAULT_VULN_RATIO)
    sp.add_argument("--builtin-seeds", type=int, default=0, metavar="N", help="use N generated seed apps")
    sp.set_defaults(func=cmd_mutgen)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    if not args.verbose:
        warnings.simplefilter("ignore")
    run = _Run(args)
    try:
        return args.func(run)
    except (TaintMinerError, FileNotFoundError, ValueError) as exc:
        log.error("%s", exc)
        return EXIT_FATAL


if __name__ == "__main__":
    sys.exit(main())
