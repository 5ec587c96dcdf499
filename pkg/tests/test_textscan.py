import pytest

from taintminer import textscan
from taintminer.errors import UnterminatedBlockComment


def test_mask_blanks_string_bodies_and_keeps_length():
    text = 'x = "a;b//c" + \'{\''
    masked = textscan.mask(text)
    assert len(masked) == len(text)
    assert masked == 'x = "______" + \'_\''


def test_gstring_interpolation_is_part_of_the_literal():
    text = 'm = "${a + "}"} done"; y = 1'
    spans = textscan.string_spans(text)
    assert len(spans) == 1
    assert text[spans[0].start : spans[0].end] == '"${a + "}"} done"'


def test_triple_quoted_string_spans_lines():
    text = 'a = """one\n// not a comment\n"""\nb = 2 // gone'
    kinds = [sp.kind for sp in textscan.scan(text)]
    assert kinds == ["string", "line_comment"]
    assert textscan.logical_lines(text) == ['a = """one\n// not a comment\n"""', "b = 2 // gone"]


def test_escaped_quote_does_not_end_literal():
    text = r'a = "say \"hi\"" // c'
    spans = textscan.scan(text)
    assert [sp.kind for sp in spans] == ["string", "line_comment"]


def test_unterminated_block_comment_reports_line():
    with pytest.raises(UnterminatedBlockComment) as exc:
        textscan.scan("a = 1\nb = 2 /* open\nc = 3")
    assert exc.value.line == 2


def test_comment_markers_inside_strings_are_not_comments():
    spans = textscan.scan('u = "http://a/*b*/"')
    assert [sp.kind for sp in spans] == ["string"]
