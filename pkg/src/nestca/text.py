"""Text as nested sequences: letters, words, sentences, paragraphs.

A word is a run of non-blank characters together with the blanks that follow
it, so concatenating all letters restores the text exactly. A sentence ends
after a word ending in ``.``, ``!`` or ``?`` or followed by a line break; a
paragraph ends after a blank line. The encoded form is an integer array of
shape ``(paragraphs, paragraph_extent, sentence_extent, word_extent)``; code
0 is padding and letters use codes ``1..len(letters)``.
"""
from __future__ import annotations

import re
import string
from dataclasses import dataclass

import numpy as np

PAD = 0
DEFAULT_LETTERS = string.printable
FORMAT = "nestca-text/1"

_WORD = re.compile(r"\S+\s*|\s+")


class TextError(ValueError):
    pass


@dataclass(frozen=True)
class HierarchyText:
    codes: np.ndarray  # (paragraphs, sentences_per_paragraph, words_per_sentence, letters_per_word)
    letters: str
    extents: tuple[int, int, int]  # (word, sentence, paragraph)

    def to_json(self) -> dict:
        return {
            "format": FORMAT,
            "letters": self.letters,
            "extents": list(self.extents),
            "paragraphs": self.codes.tolist(),
        }

    @classmethod
    def from_json(cls, doc: dict) -> HierarchyText:
        if doc.get("format") != FORMAT:
            raise TextError(f"expected format {FORMAT!r}, got {doc.get('format')!r}")
        w, s, p = doc["extents"]
        codes = np.asarray(doc["paragraphs"], dtype=np.int64).reshape(-1, p, s, w)
        return cls(codes, doc["letters"], (w, s, p))


def _check_letters(letters: str) -> None:
    if len(set(letters)) != len(letters):
        raise TextError("letter table contains duplicates")


def split_text(text: str) -> list[list[list[str]]]:
    paragraphs, sentences, words = [], [], []
    for word in _WORD.findall(text):
        words.append(word)
        core, gap = word.rstrip(), word[len(word.rstrip()):]
        if "\n\n" in gap:
            sentences.append(words)
            paragraphs.append(sentences)
            sentences, words = [], []
        elif "\n" in gap or core.endswith((".", "!", "?")):
            sentences.append(words)
            words = []
    if words:
        sentences.append(words)
    if sentences:
        paragraphs.append(sentences)
    return paragraphs


def encode_text(text: str, extents: tuple[int, int, int], letters: str = DEFAULT_LETTERS) -> HierarchyText:
    """Encode ``text`` with ``extents = (word, sentence, paragraph)`` capacities."""
    _check_letters(letters)
    w_ext, s_ext, p_ext = extents
    table = {ch: i + 1 for i, ch in enumerate(letters)}
    paragraphs = split_text(text)
    codes = np.full((max(1, len(paragraphs)), p_ext, s_ext, w_ext), PAD, dtype=np.int64)
    for pi, para in enumerate(paragraphs):
        if len(para) > p_ext:
            raise TextError(f"paragraph {pi} has {len(para)} sentences; paragraph extent is {p_ext}")
        for si, sent in enumerate(para):
            if len(sent) > s_ext:
                raise TextError(f"sentence with {len(sent)} words exceeds sentence extent {s_ext}")
            for wi, word in enumerate(sent):
                if len(word) > w_ext:
                    raise TextError(f"word {word!r} has {len(word)} letters; word extent is {w_ext}")
                for li, ch in enumerate(word):
                    if ch not in table:
                        raise TextError(f"character {ch!r} is not in the letter table")
                    codes[pi, si, wi, li] = table[ch]
    return HierarchyText(codes, letters, tuple(extents))


def decode_text(nested: HierarchyText) -> str:
    codes = nested.codes.reshape(-1)
    if codes.min(initial=0) < 0 or codes.max(initial=0) > len(nested.letters):
        raise TextError("code outside the letter table")
    return "".join(nested.letters[c - 1] for c in codes.tolist() if c != PAD)
