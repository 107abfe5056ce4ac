import string

import pytest
from hypothesis import given
from hypothesis import strategies as st

from nestca.text import PAD, HierarchyText, TextError, decode_text, encode_text, split_text


def test_nesting_of_short_text():
    assert split_text("ab cd. ef.") == [[["ab ", "cd. "], ["ef."]]]
    enc = encode_text("ab cd. ef.", (4, 3, 2))
    assert enc.codes.shape == (1, 2, 3, 4)
    assert decode_text(enc) == "ab cd. ef."


def test_paragraph_and_line_breaks():
    text = "One line\nTwo? yes.\n\nNext para!"
    paras = split_text(text)
    assert len(paras) == 2
    assert [len(p) for p in paras] == [3, 1]
    assert decode_text(encode_text(text, (8, 4, 4))) == text


def test_empty_text():
    enc = encode_text("", (3, 2, 2))
    assert enc.codes.shape == (1, 2, 2, 3)
    assert (enc.codes == PAD).all()
    assert decode_text(enc) == ""


def test_padding_is_reserved():
    enc = encode_text("aaa", (3, 1, 1), letters="a")
    assert enc.codes.reshape(-1).tolist() == [1, 1, 1]


@pytest.mark.parametrize("text,extents,level", [
    ("abcdef", (4, 4, 4), "word extent"),
    ("a b c d.", (8, 3, 4), "sentence extent"),
    ("a. b. c.", (8, 3, 2), "paragraph extent"),
])
def test_extent_errors_name_the_level(text, extents, level):
    with pytest.raises(TextError, match=level):
        encode_text(text, extents)


def test_letter_table_errors():
    with pytest.raises(TextError, match="not in the letter table"):
        encode_text("abc", (4, 4, 4), letters="ab")
    with pytest.raises(TextError, match="duplicates"):
        encode_text("ab", (4, 4, 4), letters="aab")


def test_json_round_trip():
    enc = encode_text("Hi there.\n\nBye.", (8, 4, 4))
    back = HierarchyText.from_json(enc.to_json())
    assert decode_text(back) == "Hi there.\n\nBye."
    with pytest.raises(TextError, match="format"):
        HierarchyText.from_json({**enc.to_json(), "format": "other"})


def tight_extents(text):
    paras = split_text(text)
    words = [w for p in paras for s in p for w in s]
    return (max(map(len, words), default=1), max((len(s) for p in paras for s in p), default=1),
            max(map(len, paras), default=1))


@given(st.text(alphabet=string.ascii_letters + " .,!?\n", max_size=200))
def test_round_trip_is_identity(text):
    assert decode_text(encode_text(text, tight_extents(text))) == text


@given(st.text(alphabet=string.printable, max_size=120))
def test_round_trip_printable(text):
    assert decode_text(encode_text(text, tight_extents(text))) == text
