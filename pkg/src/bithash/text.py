"""Title normalization and overlapping character n-gram extraction."""

from __future__ import annotations

DEFAULT_NGRAM = 5

# U+0130 is the only code point whose str.lower() expands to two characters;
# map it to its simple lowercase so lengths are preserved.
_SIMPLE_LOWER = {0x130: "i"}


def normalize(title: str) -> str:
    """Lower-case and collapse whitespace runs to single spaces.

    Punctuation and digits are kept as-is; strings like "100%" or "KDL-52W3000"
    carry a lot of the matching signal in listing titles.
    """
    return " ".join(title.translate(_SIMPLE_LOWER).lower().split())


def extract_ngrams(text: str, n: int = DEFAULT_NGRAM) -> list[str]:
    """Return all overlapping windows of ``n`` characters, in order.

    Text shorter than ``n`` yields a single feature holding the whole text, so
    that short titles still hash to a nonzero vector. Empty text yields ``[]``.
    Duplicates are kept.
    """
    if n < 1:
        raise ValueError(f"n-gram length must be >= 1, got {n}")
    if not text:
        return []
    if len(text) < n:
        return [text]
    return [text[i : i + n] for i in range(len(text) - n + 1)]


def title_features(title: str, n: int = DEFAULT_NGRAM, lowercase: bool = True) -> list[str]:
    if lowercase:
        title = normalize(title)
    return extract_ngrams(title, n)
