"""User Vectors and recall-set scoring.

Two strategies score a recall set of M candidates against a history of N
viewed items:

* pairwise: every candidate against every history vector, keeping the best
  score (M*N kernel calls);
* user vector: collapse the history into one vector first (sum + L2
  normalize for floats, OR for bits), then one kernel call per candidate.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _kernels
from .similarity import Kernel, get_kernel, stack_bits, stack_float
from .vectors import BitVector, FeatureVector


@dataclass(frozen=True)
class Item:
    item_id: str
    title: str
    category: str


@dataclass(frozen=True)
class UserHistory:
    user_id: str
    viewed: tuple[Item, ...]

    def __post_init__(self):
        if not self.viewed:
            raise ValueError(f"user {self.user_id!r} has an empty history")


@dataclass(frozen=True)
class RecallSet:
    purchased: str
    candidates: tuple[Item, ...]

    def __post_init__(self):
        hits = [c for c in self.candidates if c.item_id == self.purchased]
        if len(hits) != 1:
            raise ValueError(f"purchased item {self.purchased!r} must appear exactly once, found {len(hits)}")
        category = hits[0].category
        strays = [c.item_id for c in self.candidates if c.category != category]
        if strays:
            raise ValueError(f"candidates outside category {category!r}: {strays[:5]}")

    def __len__(self):
        return len(self.candidates)


@dataclass(frozen=True)
class ScoredCandidate:
    item_id: str
    score: float
    rank: int


@dataclass
class ComparisonCounter:
    """Tally of kernel invocations."""

    count: int = 0
    calls: int = field(default=0, repr=False)

    def add(self, n: int) -> None:
        self.count += n
        self.calls += 1


def combine_float(vectors: Sequence[FeatureVector]) -> FeatureVector:
    """Element-wise sum scaled to unit L2 norm. An all-zero sum stays zero."""
    if not vectors:
        raise ValueError("cannot combine an empty list of vectors")
    dim = vectors[0].dim
    if any(v.dim != dim for v in vectors):
        raise ValueError("all vectors must share one dimension")
    total = stack_float(vectors).sum(axis=0, dtype=np.float64)
    norm = np.sqrt(total @ total)
    if norm > 0:
        total /= norm
    return FeatureVector(total)


def combine_bits(vectors: Sequence[BitVector]) -> BitVector:
    """Logical OR of all inputs."""
    if not vectors:
        raise ValueError("cannot combine an empty list of vectors")
    dim = vectors[0].dim
    if any(v.dim != dim for v in vectors):
        raise ValueError("all vectors must share one dimension")
    words, _ = stack_bits(vectors)
    out = np.empty(words.shape[1], dtype=np.uint64)
    _kernels.or_reduce(words, out)
    return BitVector._adopt(dim, out)


def combine(vectors: Sequence[FeatureVector | BitVector]) -> FeatureVector | BitVector:
    if vectors and isinstance(vectors[0], BitVector):
        return combine_bits(vectors)
    return combine_float(vectors)


def score_pairwise(
    history_vectors: Sequence,
    recall_vectors: Sequence,
    kernel: str | Kernel,
    counter: ComparisonCounter | None = None,
) -> np.ndarray:
    """Best score of each candidate over the whole history."""
    kernel = get_kernel(kernel)
    if not history_vectors or not recall_vectors:
        raise ValueError("history and recall set must both be non-empty")
    scores = kernel.score_max(history_vectors, recall_vectors)
    if counter is not None:
        counter.add(len(history_vectors) * len(recall_vectors))
    return scores


def score_user_vector(
    user_vector,
    recall_vectors: Sequence,
    kernel: str | Kernel,
    counter: ComparisonCounter | None = None,
) -> np.ndarray:
    kernel = get_kernel(kernel)
    if not recall_vectors:
        raise ValueError("recall set must be non-empty")
    scores = kernel.score_many(user_vector, recall_vectors)
    if counter is not None:
        counter.add(len(recall_vectors))
    return scores


def rank(scores: Sequence[float], recall: RecallSet) -> list[ScoredCandidate]:
    """Sort candidates by descending score, ties by ascending item id."""
    if len(scores) != len(recall.candidates):
        raise ValueError(f"{len(scores)} scores for {len(recall.candidates)} candidates")
    order = sorted(
        zip(recall.candidates, (float(s) for s in scores)),
        key=lambda pair: (-pair[1], pair[0].item_id),
    )
    return [ScoredCandidate(item.item_id, s, r) for r, (item, s) in enumerate(order, start=1)]


def purchased_rank(scores: Sequence[float], recall: RecallSet) -> int:
    for cand in rank(scores, recall):
        if cand.item_id == recall.purchased:
            return cand.rank
    raise AssertionError("unreachable: RecallSet guarantees the purchased item")


def density(v: BitVector) -> float:
    """Fraction of bits set; values near 1 mean the vector has saturated."""
    return v.popcount / v.dim
