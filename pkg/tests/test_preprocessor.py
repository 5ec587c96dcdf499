import pytest
from conftest import (
    brace_stack_ok,
    conservation_gap,
    corpus_files,
    groovy_apps,
    listing,
    norm,
    standard_form_violations,
)
from hypothesis import given, settings

from taintminer.errors import UnbalancedBraces, UnbalancedBrackets, UnbalancedParens, UnterminatedBlockComment
from taintminer.preprocessor import (
    RawSource,
    join_input_calls,
    join_map_literals,
    normalize,
    split_conditionals,
    split_statements,
    strip_comments,
)


def lines_of(op, text: str) -> list[str]:
    return [ln.strip() for ln in op(RawSource.from_text("a", text)).lines]


class TestStripComments:
    def test_trailing_line_comment(self):
        assert lines_of(strip_comments, "x = 1 // note") == ["x = 1"]

    def test_no_comments_is_identity(self):
        text = 'a = 1\nb = "two"\n    c(a, b)'
        assert strip_comments(RawSource.from_text("a", text)).text == text

    def test_url_in_string_survives(self):
        assert lines_of(strip_comments, 's = "http://a" /* c */') == ['s = "http://a"']

    def test_multi_line_block_comment(self):
        assert lines_of(strip_comments, "a = 1\n/* one\n two */ b = 2") == ["a = 1", "b = 2"]

    def test_unterminated_block_comment(self):
        with pytest.raises(UnterminatedBlockComment) as exc:
            strip_comments(RawSource.from_text("a", "a = 1\n/* open"))
        assert exc.value.line == 2


class TestJoins:
    def test_multi_line_input_call(self):
        text = 'input("newMode",\n "mode",\n title: "t")'
        assert lines_of(join_input_calls, text) == ['input("newMode", "mode", title: "t")']

    def test_single_line_input_unchanged(self):
        assert lines_of(join_input_calls, 'input("a", "b")') == ['input("a", "b")']

    def test_nested_call_inside_input(self):
        assert lines_of(join_input_calls, 'input("a", f(b,\n c))') == ['input("a", f(b, c))']

    def test_unbalanced_input(self):
        with pytest.raises(UnbalancedParens):
            join_input_calls(RawSource.from_text("a", 'input("a", f(b,\n c)'))

    def test_parenthesis_free_input(self):
        got = [ln.strip() for ln in norm('preferences {\n input "n", "mode",\n   title: "t"\n}').lines]
        assert got[1] == 'input "n", "mode", title: "t"'

    def test_two_line_map(self):
        assert lines_of(join_map_literals, "m = [a: 1,\n b: 2]") == ["m = [a: 1, b: 2]"]

    def test_single_line_map_unchanged(self):
        assert lines_of(join_map_literals, "m = [a: 1]") == ["m = [a: 1]"]

    def test_map_string_with_separators(self):
        text = 'm = [a: "x, ]y",\n b: 2]'
        assert lines_of(join_map_literals, text) == ['m = [a: "x, ]y", b: 2]']

    def test_unbalanced_map(self):
        with pytest.raises(UnbalancedBrackets):
            join_map_literals(RawSource.from_text("a", "m = [a: 1,\n b: 2"))


class TestSplitConditionals:
    def test_inline_block(self):
        assert lines_of(split_conditionals, "if (c) { x = 1 }") == ["if (c) {", "x = 1", "}"]

    def test_normalized_block_unchanged(self):
        text = "if (c) {\n    x = 1\n}"
        assert split_conditionals(RawSource.from_text("a", text)).text == text

    def test_else_after_closing_brace(self):
        text = "if (c) {\n    x = 1\n} else { y = 2 }"
        assert lines_of(split_conditionals, text) == ["if (c) {", "x = 1", "}", "else {", "y = 2", "}"]

    def test_brace_on_next_line_is_merged(self):
        assert lines_of(split_conditionals, "if (c)\n{\n x = 1\n}") == ["if (c) {", "x = 1", "}"]

    def test_braceless_body_is_wrapped(self):
        assert lines_of(split_conditionals, "if (c) sendSms(m)") == ["if (c) {", "sendSms(m)", "}"]

    def test_do_try_catch_finally(self):
        text = "do { a() } while (x)\ntry { b() } catch (e) { c() } finally { d() }"
        assert lines_of(split_conditionals, text) == [
            "do {", "a()", "}", "while (x)",
            "try {", "b()", "}", "catch (e) {", "c()", "}", "finally {", "d()", "}",
        ]

    def test_closure_braces_stay_inline(self):
        assert lines_of(split_conditionals, "lights.each { it.off() }") == ["lights.each { it.off() }"]

    def test_unbalanced_close(self):
        with pytest.raises(UnbalancedBraces) as exc:
            split_conditionals(RawSource.from_text("a", "if (c) {\n y = 2\n}\n}"))
        assert exc.value.line == 4

    def test_unclosed_block(self):
        with pytest.raises(UnbalancedBraces):
            split_conditionals(RawSource.from_text("a", "if (c) {\n y = 2"))

    def test_nested_pieces_are_indented(self):
        out = norm("def f() {\n    if (a) { if (b) { y = 2 } }\n}")
        assert list(out.lines) == [
            "def f() {", "    if (a) {", "        if (b) {", "            y = 2", "        }", "    }", "}",
        ]


class TestSplitStatements:
    def test_two_statements(self):
        assert lines_of(split_statements, "a = 1; b = 2") == ["a = 1;", "b = 2"]

    def test_no_semicolon_unchanged(self):
        assert lines_of(split_statements, "a = 1") == ["a = 1"]

    def test_semicolon_in_string(self):
        assert lines_of(split_statements, 's = "a;b"; t = 2') == ['s = "a;b";', "t = 2"]

    def test_for_header_not_split(self):
        text = "for (i = 0; i < 3; i++) {"
        assert lines_of(split_statements, text) == [text]

    def test_trailing_semicolon_kept_in_place(self):
        assert lines_of(split_statements, "a = 1;") == ["a = 1;"]


class TestNormalize:
    def test_empty_file(self):
        out = normalize(RawSource.from_text("a", ""))
        assert out.lines == () and out.rewrite_log == ()

    def test_standard_form_is_identity_with_empty_log(self):
        first = norm("if (c) { a = 1; b = 2 } else { sendSms(p, m) } // x")
        second = normalize(first.as_raw())
        assert second.lines == first.lines
        assert second.rewrite_log == ()

    def test_rewrite_log_records_rules_and_lines(self):
        out = norm("x = 1\ny = 2 // c\nif (a) { b() }")
        assert {(r.rule, r.line) for r in out.rewrite_log} == {
            ("strip_comments", 2),
            ("split_conditionals:a", 3),
            ("split_conditionals:c", 3),
        }

    def test_template_satisfies_standard_form(self):
        out = listing("template")
        assert standard_form_violations(out) == []

    def test_semicolon_then_conditional_on_one_line(self):
        out = norm("a = 1; if (c) { b = 2 }")
        assert [ln.strip() for ln in out.lines] == ["a = 1;", "if (c) {", "b = 2", "}"]


@pytest.mark.parametrize("path", corpus_files(), ids=lambda p: p.name)
def test_fixture_properties(path):
    raw = RawSource.from_path(path)
    out = normalize(raw)
    assert normalize(out.as_raw()).lines == out.lines
    assert conservation_gap(raw, out) == {}
    assert brace_stack_ok(out.lines)
    assert standard_form_violations(out) == []


@settings(max_examples=200, deadline=None)
@given(groovy_apps())
def test_generated_properties(text):
    raw = RawSource.from_text("gen", text)
    out = normalize(raw)
    again = normalize(out.as_raw())
    assert again.lines == out.lines and again.rewrite_log == ()
    assert conservation_gap(raw, out) == {}
    assert standard_form_violations(out) == []
