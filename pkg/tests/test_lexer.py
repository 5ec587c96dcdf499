import warnings

import pytest
from conftest import listing, norm

from taintminer.errors import NoPreferences
from taintminer.lexer import (
    BagOfWords,
    MethodChunk,
    TokenLine,
    bag_of_words,
    calTokenFrequencies,
    is_numeric_token,
    split_methods,
    tokenize,
    tokenize_text,
)


def toks(text: str) -> list[str]:
    return list(tokenize_text(text).tokens)


class TestTokenize:
    def test_call(self):
        assert toks("sendSms(phone, msg)") == ["sendSms", "(", "phone", ",", "msg", ")"]

    def test_empty_line(self):
        assert toks("") == []

    def test_literal_is_one_token(self):
        assert toks('x = "hello world"') == ["x", "=", '"hello world"']

    def test_operators_are_single_characters(self):
        assert toks("a += b && !c") == ["a", "+", "=", "b", "&", "&", "!", "c"]

    def test_gstring_identifiers_follow_the_literal(self):
        assert toks('m = "${who} is $evt.value"') == ["m", "=", '"${who} is $evt.value"', "who", "evt", "value"]

    def test_numbers(self):
        assert toks("x = 3.5 + 0x1F - 2L") == ["x", "=", "3.5", "+", "0x1F", "-", "2L"]

    def test_no_token_contains_whitespace(self):
        for line in tokenize(listing("template")):
            for t in line.tokens:
                assert t and (t.startswith(('"', "'")) or not any(c.isspace() for c in t))

    def test_line_numbers(self):
        lines = tokenize(norm("a = 1\n\nb = 2"))
        assert [ln.line_no for ln in lines] == [1, 2, 3]


class TestSplitMethods:
    def test_template_structure(self):
        prefs, others = split_methods(tokenize(listing("template")))
        assert prefs is not None and prefs.method_name == "preferences"
        assert [m.method_name for m in others] == [
            "installed", "updated", "initialize", "modeChangeHandler", "takeActions", "send",
        ]
        assert all("definition" not in m.signature_tokens.tokens for m in others)

    def test_definition_only(self):
        with pytest.warns(NoPreferences):
            prefs, others = split_methods(tokenize(norm('definition(name: "x",\n author: "y")')))
        assert prefs is None and others == []

    def test_nested_braces_stay_in_one_chunk(self):
        text = "def f(a) {\n    if (a) {\n        if (b) {\n            c()\n        }\n    }\n    d()\n}\ndef g() {\n}"
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", NoPreferences)
            _, others = split_methods(tokenize(norm(text)))
        assert [m.method_name for m in others] == ["f", "g"]
        assert len(others[0].body) == 6

    def test_one_line_preferences(self):
        prefs, _ = split_methods(tokenize(norm('preferences { input "a", "b"; input "c", "d" }')))
        assert sum(ln.tokens.count("input") for ln in prefs.lines()) == 2

    def test_typed_and_private_headers(self):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", NoPreferences)
            _, others = split_methods(tokenize(norm("private String f(String a, int b) {\n}\nvoid g() {\n}")))
        assert [m.method_name for m in others] == ["f", "g"]


class TestFrequencies:
    def test_hand_count(self):
        chunk = MethodChunk("m", TokenLine(("def", "x", "=", '"abc"'), 1), (TokenLine(("x", "=", "5"), 2),))
        assert calTokenFrequencies([chunk]).to_dict() == {"def": 1, "x": 2, "=": 2, "aStr": 1, "aNum": 1}

    def test_no_chunks(self):
        assert len(calTokenFrequencies([])) == 0

    def test_template_contains_sink_and_excludes_preferences(self):
        bag = bag_of_words(listing("template"))
        assert "sendSms" in bag
        assert "input" not in bag and "preferences" not in bag and "definition" not in bag

    def test_total_equals_token_count(self):
        prefs, others = split_methods(tokenize(listing("template")))
        bag = calTokenFrequencies(others)
        assert bag.total() == sum(len(ln) for m in others for ln in m.lines())

    def test_no_literal_keys(self):
        bag = bag_of_words(listing("template"))
        assert not any(k.startswith(('"', "'")) or is_numeric_token(k) for k in bag)

    def test_order_independent(self):
        _, others = split_methods(tokenize(listing("template")))
        assert calTokenFrequencies(others) == calTokenFrequencies(list(reversed(others)))

    def test_zero_counts_are_dropped(self):
        assert dict(BagOfWords({"a": 0, "b": 2})) == {"b": 2}


@pytest.mark.parametrize("text", ["-3", "+2.5", "1e5", "0xFF", "7L"])
def test_numeric_tokens(text):
    assert is_numeric_token(text)


@pytest.mark.parametrize("text", ["x1", "1x", '"1"', "-"])
def test_not_numeric(text):
    assert not is_numeric_token(text)
