import warnings
from collections import Counter

import pytest
from conftest import flow_tuples, listing, norm

from taintminer import mine
from taintminer.errors import InapplicableMutation
from taintminer.lexer import bag_of_words
from taintminer.mutgen import MutationOp, candidate_ops, generate_corpus, label_of, mutate
from taintminer.oracle import interpret
from taintminer.preprocessor import RawSource, normalize
from taintminer.synth import seed_apps
from taintminer.vectorizer import NON_VULNERABLE, VULNERABLE

WRAP_APP = """preferences {
    input "newMode", "mode"
}
def report() {
    if (newMode == "Away") {
        def x = 1
    }
    sendSms("5551234567", "armed")
}
"""


@pytest.fixture(scope="module")
def seeds():
    return [normalize(RawSource.from_text(n, t)) for n, t in seed_apps(10, 3)]


@pytest.fixture(scope="module")
def corpus(seeds, sinks):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return generate_corpus(seeds, 18, 7, sinks)


def jaccard(a, b) -> float:
    a, b = set(a), set(b)
    return len(a & b) / len(a | b) if a | b else 1.0


class TestMutate:
    def test_swap_kills_the_flow(self, sinks):
        src = listing("flow_vulnerable")
        assert label_of(src, sinks) == VULNERABLE
        out, label = mutate(src, MutationOp("reorder_statements", "report", (5, 6)), 0, sinks)
        assert label == NON_VULNERABLE
        assert [ln.strip() for ln in out.lines] == [ln.strip() for ln in listing("flow_clean").lines]
        assert mine(out, sinks).flows == []

    def test_swapping_a_line_with_itself_is_identity(self, sinks):
        src = listing("flow_vulnerable")
        out, label = mutate(src, MutationOp("reorder_statements", "report", (5, 5)), 0, sinks)
        assert out.lines == src.lines and label == VULNERABLE

    def test_conditional_wrap_creates_a_conditional_flow(self, sinks):
        src = norm(WRAP_APP)
        assert mine(src, sinks).flows == []
        ops = [op for op in candidate_ops(src) if op.kind == "conditional_wrap"]
        assert ops
        wrapped = [mutate(src, op, 0, sinks) for op in ops]
        sn_c = [out for out, _ in wrapped if any(t[4] == "Sn_C" for t in flow_tuples(mine(out, sinks)))]
        assert len(sn_c) == 1
        assert label_of(sn_c[0], sinks) == VULNERABLE

    def test_call_indirection_swaps_helper_arguments(self, sinks):
        src = norm(
            'preferences {\n    input "newMode", "mode"\n}\n'
            "def report() {\n    relay(newMode, \"x\")\n}\n"
            "def relay(a, b) {\n    sendSms(\"555\", b)\n}\n"
        )
        assert label_of(src, sinks) == NON_VULNERABLE
        (op,) = [op for op in candidate_ops(src) if op.kind == "call_indirection"]
        out, label = mutate(src, op, 0, sinks)
        assert 'relay("x", newMode)' in out.text
        assert label == VULNERABLE

    def test_inapplicable_targets(self, sinks):
        src = listing("flow_vulnerable")
        with pytest.raises(InapplicableMutation):
            mutate(src, MutationOp("reorder_statements", "report", (3, 5)), 0, sinks)
        with pytest.raises(InapplicableMutation):
            mutate(src, MutationOp("conditional_wrap", "report", (5,)), 0, sinks)
        with pytest.raises(InapplicableMutation):
            mutate(src, MutationOp("reorder_statements", "nosuch", (4, 5)), 0, sinks)
        with pytest.raises(ValueError):
            MutationOp("rename", "report", (4,))

    def test_mutation_preserves_tokens(self, seeds, sinks):
        for src in seeds[:5]:
            for op in candidate_ops(src)[:20]:
                out, _ = mutate(src, op, 1, sinks)
                assert Counter(bag_of_words(out).to_dict()) == Counter(bag_of_words(src).to_dict())


class TestGenerateCorpus:
    def test_size_and_ratio(self, corpus, seeds):
        assert len(corpus) == 18 * len(seeds)
        per_seed = Counter((m.name.rsplit("_m", 1)[0], m.label) for m in corpus)
        for s in seeds:
            assert per_seed[(s.app_name, VULNERABLE)] == 13
            assert per_seed[(s.app_name, NON_VULNERABLE)] == 5

    def test_names_are_unique_and_mutants_distinct(self, corpus, seeds):
        assert len({m.name for m in corpus}) == len(corpus)
        originals = {s.lines for s in seeds}
        assert len({m.source.lines for m in corpus}) == len(corpus)
        assert not originals & {m.source.lines for m in corpus}

    def test_labels_agree_with_the_interpreter(self, corpus, sinks):
        for m in corpus:
            assert (m.label == VULNERABLE) == interpret(m.source.text, sinks.names).vulnerable
            assert m.ops and m.mutation_kind != "identity"

    def test_labels_agree_with_the_miner(self, corpus, sinks):
        for m in corpus:
            assert (m.label == VULNERABLE) == bool(mine(m.source, sinks).flows)

    def test_vocabulary_overlaps_the_seed(self, corpus, seeds):
        bags = {s.app_name: bag_of_words(s).to_dict() for s in seeds}
        for m in corpus:
            assert jaccard(bag_of_words(m.source).to_dict(), bags[m.name.rsplit("_m", 1)[0]]) >= 0.9

    def test_deterministic(self, seeds, sinks, corpus):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            again = generate_corpus(seeds, 18, 7, sinks)
        assert [(m.name, m.source.lines, m.label) for m in again] == [(m.name, m.source.lines, m.label) for m in corpus]

    def test_configurable_ratio(self, seeds, sinks):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            out = generate_corpus(seeds[:3], 4, 1, sinks, vuln_ratio=0.5)
        assert Counter(m.label for m in out) == {VULNERABLE: 6, NON_VULNERABLE: 6}

    @pytest.mark.parametrize("per_seed", [0, 1, -3])
    def test_per_seed_too_small(self, seeds, sinks, per_seed):
        with pytest.raises(ValueError):
            generate_corpus(seeds, per_seed, 0, sinks)

    def test_bad_ratio(self, seeds, sinks):
        with pytest.raises(ValueError):
            generate_corpus(seeds, 4, 0, sinks, vuln_ratio=1.5)

    def test_unsupported_seed_is_skipped_with_warning(self, sinks):
        seed = norm("def f() {\n    lights.each { it.off() }\n}\n", "closure")
        with pytest.warns(UserWarning, match="closure"):
            assert generate_corpus([seed], 4, 0, sinks) == []
