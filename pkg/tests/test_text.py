import pytest
from hypothesis import given
from hypothesis import strategies as st

from bithash.text import DEFAULT_NGRAM, extract_ngrams, normalize, title_features


@pytest.mark.parametrize(
    "raw, expected",
    [
        ("  GE / Hotpoint  ", "ge / hotpoint"),
        ("", ""),
        ("Adidas Yeezy", "adidas yeezy"),
        ("Vans  Slip-On\tDamen\nUS 6.5", "vans slip-on damen us 6.5"),
        ("100% Authentic", "100% authentic"),
    ],
)
def test_normalize(raw, expected):
    assert normalize(raw) == expected


def test_normalize_keeps_one_char_per_code_point():
    # U+0130 lower-cases to two code points under full case mapping
    assert normalize("İSTANBUL") == "istanbul"
    assert len(normalize("İ")) == 1


@pytest.mark.parametrize(
    "text, n, expected",
    [
        ("hello", 3, ["hel", "ell", "llo"]),
        ("abcde", 5, ["abcde"]),
        ("ab", 5, ["ab"]),
        ("", 5, []),
        ("aaaa", 2, ["aa", "aa", "aa"]),
    ],
)
def test_extract_ngrams(text, n, expected):
    assert extract_ngrams(text, n) == expected


def test_zero_n_rejected():
    with pytest.raises(ValueError):
        extract_ngrams("hello", 0)


def test_default_is_five():
    assert DEFAULT_NGRAM == 5
    assert title_features("Sony KDL") == ["sony ", "ony k", "ny kd", "y kdl"]


def test_multibyte_letters_count_once():
    assert extract_ngrams("schwarz größe", 5)[-1] == "größe"
    assert len(extract_ngrams("größe", 5)) == 1


@given(st.text(), st.integers(1, 8))
def test_count_and_contiguity(text, n):
    grams = extract_ngrams(text, n)
    if len(text) >= n:
        assert len(grams) == len(text) - n + 1
        for i, g in enumerate(grams):
            assert len(g) == n and text[i : i + n] == g
    elif text:
        assert grams == [text]
    else:
        assert grams == []


@given(st.text())
def test_normalize_idempotent(text):
    assert normalize(normalize(text)) == normalize(text)


@given(
    st.text(alphabet="abcdefghijklmnopqrstuvwxyz0123456789", min_size=5, max_size=15),
    st.text(alphabet="abcdefghij ", max_size=20),
    st.text(alphabet="klmnopqrst ", max_size=20),
)
def test_shared_word_shares_features(word, left, right):
    a = normalize(f"{left} {word}")
    b = normalize(f"{word} {right}")
    shared = set(extract_ngrams(a)) & set(extract_ngrams(b))
    distinct_in_word = set(extract_ngrams(word))
    assert distinct_in_word <= shared
    assert len(extract_ngrams(word)) == len(word) - 5 + 1
