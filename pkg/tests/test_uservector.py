import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bithash.similarity import cosine, ochiai
from bithash.text import title_features
from bithash.uservector import (
    ComparisonCounter,
    Item,
    RecallSet,
    UserHistory,
    combine_bits,
    combine_float,
    density,
    rank,
    score_pairwise,
    score_user_vector,
)
from bithash.vectors import BitVector, FeatureVector, HashConfig, build_bit_vector, build_float_vector
from conftest import random_bits


def bits(s):
    return BitVector.from_bools([c == "1" for c in s])


def recall(n, purchased=0, category="c"):
    items = tuple(Item(f"i{j:03d}", f"title {j}", category) for j in range(n))
    return RecallSet(items[purchased].item_id, items)


short_titles = st.lists(st.text(alphabet="abcdefgh 0123", min_size=1, max_size=30), min_size=1, max_size=12)


class TestCombine:
    def test_float_single_unit(self):
        v = FeatureVector([0.6, 0.8, 0.0])
        assert combine_float([v]) == v

    def test_float_axes(self):
        e1, e2 = FeatureVector([1, 0, 0]), FeatureVector([0, 1, 0])
        np.testing.assert_allclose(combine_float([e1, e2]).values, [1 / math.sqrt(2), 1 / math.sqrt(2), 0], rtol=1e-6)

    def test_float_zero_sum(self):
        z = FeatureVector.zeros(5)
        assert combine_float([z, z]) == z

    def test_float_unit_norm_44(self, rng):
        titles = [" ".join(rng.choice(list("abcdefghij"), size=60)) for _ in range(44)]
        vecs = [build_float_vector(title_features(t), HashConfig()) for t in titles]
        assert combine_float(vecs).norm() == pytest.approx(1.0, abs=1e-6)

    def test_bits_examples(self):
        v = bits("1011")
        assert combine_bits([v]) == v
        assert combine_bits([bits("1100"), bits("1010")]) == bits("1110")

    @pytest.mark.parametrize("fn", [combine_bits, combine_float])
    def test_empty_rejected(self, fn):
        with pytest.raises(ValueError):
            fn([])

    def test_mixed_dims_rejected(self):
        with pytest.raises(ValueError):
            combine_bits([BitVector.zeros(8), BitVector.zeros(9)])

    @given(st.lists(st.lists(st.booleans(), min_size=70, max_size=70), min_size=1, max_size=10))
    def test_or_is_union(self, rows):
        vecs = [BitVector.from_bools(r) for r in rows]
        out = combine_bits(vecs)
        union = set().union(*({i for i, x in enumerate(r) if x} for r in rows))
        assert set(np.flatnonzero(out.to_bools())) == union
        total = sum(v.popcount for v in vecs)
        assert out.popcount <= total
        disjoint = all(not (set(np.flatnonzero(a.to_bools())) & set(np.flatnonzero(b.to_bools()))) for i, a in enumerate(vecs) for b in vecs[i + 1 :])
        assert (out.popcount == total) == disjoint

    @given(short_titles, st.sampled_from([1, 64, 100, 8000]))
    def test_bit_float_combine_agree(self, titles, dim):
        cfg = HashConfig(dim)
        feats = [title_features(t) for t in titles]
        b = combine_bits([build_bit_vector(f, cfg) for f in feats])
        f = combine_float([build_float_vector(f, cfg) for f in feats])
        np.testing.assert_array_equal(b.to_bools(), f.values > 0)


class TestScoring:
    def test_pairwise_orthogonal(self):
        v, w = bits("1100"), bits("0011")
        np.testing.assert_array_equal(score_pairwise([v], [v, w], "ochiai"), [1.0, 0.0])

    def test_counter_4400(self, rng):
        hist = [random_bits(rng, 256, 0.05) for _ in range(44)]
        cands = [random_bits(rng, 256, 0.05) for _ in range(100)]
        c = ComparisonCounter()
        score_pairwise(hist, cands, "ochiai", c)
        assert c.count == 4400
        c = ComparisonCounter()
        score_user_vector(combine_bits(hist), cands, "ochiai", c)
        assert c.count == 100

    def test_pairwise_permutation_invariant(self, rng):
        hist = [random_bits(rng, 100, 0.2) for _ in range(7)]
        cands = [random_bits(rng, 100, 0.2) for _ in range(9)]
        a = score_pairwise(hist, cands, "jaccard")
        b = score_pairwise(hist[::-1], cands, "jaccard")
        np.testing.assert_array_equal(a, b)

    def test_pairwise_is_max_over_history(self, rng):
        hist = [FeatureVector(rng.random(30)) for _ in range(5)]
        cands = [FeatureVector(rng.random(30)) for _ in range(6)]
        expected = [max(cosine(h, c) for h in hist) for c in cands]
        np.testing.assert_allclose(score_pairwise(hist, cands, "cosine"), expected, atol=1e-9)

    def test_user_vector_hits_identical_candidate(self, rng):
        cands = [random_bits(rng, 300, 0.1) for _ in range(5)]
        scores = score_user_vector(cands[2], cands, "ochiai")
        assert scores[2] == 1.0
        fc = [c.to_float() for c in cands]
        assert score_user_vector(fc[3], fc, "cosine")[3] == pytest.approx(1.0)

    def test_single_item_history(self, rng):
        h = random_bits(rng, 500, 0.05)
        assert score_user_vector(combine_bits([h]), [h], "ochiai")[0] == 1.0

    @given(st.lists(st.booleans(), min_size=90, max_size=90), st.lists(st.lists(st.booleans(), min_size=90, max_size=90), min_size=1, max_size=6))
    def test_single_history_strategies_agree(self, h, cands):
        hv = BitVector.from_bools(h)
        cv = [BitVector.from_bools(c) for c in cands]
        for k in ("ochiai", "jaccard", "hamming"):
            np.testing.assert_array_equal(score_user_vector(combine_bits([hv]), cv, k), score_pairwise([hv], cv, k))

    def test_dim_mismatch(self):
        with pytest.raises(ValueError):
            score_pairwise([BitVector.zeros(8)], [BitVector.zeros(16)], "ochiai")
        with pytest.raises(ValueError):
            score_user_vector(BitVector.zeros(8), [BitVector.zeros(16)], "ochiai")


class TestRank:
    def test_highest_first(self):
        ranked = rank([0.2, 0.9, 0.5], recall(3))
        assert [c.item_id for c in ranked] == ["i001", "i002", "i000"]
        assert [c.rank for c in ranked] == [1, 2, 3]

    def test_ties_by_item_id(self):
        items = (Item("b", "x", "c"), Item("c", "y", "c"), Item("a", "z", "c"))
        ranked = rank([0.5, 0.5, 0.5], RecallSet("c", items))
        assert [c.item_id for c in ranked] == ["a", "b", "c"]

    def test_purchased_top(self):
        ranked = rank([0.1, 0.3, 0.99, 0.2], recall(4, purchased=2))
        assert ranked[0].item_id == "i002"

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            rank([0.1], recall(2))

    @given(st.lists(st.floats(-5, 5), min_size=1, max_size=40))
    def test_rank_invariants(self, scores):
        ranked = rank(scores, recall(len(scores)))
        assert sorted(c.rank for c in ranked) == list(range(1, len(scores) + 1))
        assert all(a.score >= b.score for a, b in zip(ranked, ranked[1:]))


class TestDensity:
    def test_examples(self):
        assert density(BitVector.zeros(100)) == 0.0
        assert density(BitVector.from_bools(np.ones(100, bool))) == 1.0

    def test_one_title_bound(self):
        title = "Adidas Yeezy Boost 350 V2 Black Core White size 9 100% Authentic 480pp xyzw ab"[:80]
        v = build_bit_vector(title_features(title), HashConfig())
        assert density(v) <= 76 / 8000

    @given(st.lists(st.lists(st.booleans(), min_size=50, max_size=50), min_size=1, max_size=8), st.lists(st.booleans(), min_size=50, max_size=50))
    def test_monotone(self, rows, extra):
        vecs = [BitVector.from_bools(r) for r in rows]
        assert density(combine_bits(vecs + [BitVector.from_bools(extra)])) >= density(combine_bits(vecs))


class TestTypes:
    def test_recall_requires_purchase_once(self):
        items = (Item("a", "t", "c"), Item("b", "t", "c"))
        with pytest.raises(ValueError):
            RecallSet("z", items)
        with pytest.raises(ValueError):
            RecallSet("a", items + (Item("a", "t", "c"),))

    def test_recall_same_category(self):
        with pytest.raises(ValueError):
            RecallSet("a", (Item("a", "t", "c1"), Item("b", "t", "c2")))

    def test_history_non_empty(self):
        with pytest.raises(ValueError):
            UserHistory("u", ())
