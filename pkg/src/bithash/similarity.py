"""Similarity kernels for float and bit vectors.

``ochiai`` is cosine similarity restricted to {0,1} vectors: the dot product
becomes ``popcount(a & b)`` and each squared norm becomes a popcount, which
:class:`~bithash.vectors.BitVector` keeps cached.

Zero vectors score 0.0 against everything rather than raising, so empty
titles sink to the bottom of a ranking.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import _kernels
from .vectors import BitVector, FeatureVector


def _check_dims(a, b):
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} != {b.dim}")


def cosine(a: FeatureVector, b: FeatureVector) -> float:
    _check_dims(a, b)
    return float(_kernels.cosine_pair(a.values, b.values))


def ochiai(a: BitVector, b: BitVector) -> float:
    _check_dims(a, b)
    return float(_kernels.ochiai_pair(a.words, b.words, a.popcount, b.popcount))


def hamming(a: BitVector, b: BitVector) -> int:
    _check_dims(a, b)
    return _kernels.xor_count(a.words, b.words)


def jaccard(a: BitVector, b: BitVector) -> float:
    _check_dims(a, b)
    return float(_kernels.jaccard_pair(a.words, b.words, a.popcount, b.popcount))


# -- batched scoring -------------------------------------------------------


def stack_float(vectors: Sequence[FeatureVector]) -> np.ndarray:
    # concatenate+reshape is several times cheaper than np.stack for many small rows
    return np.concatenate([v.values for v in vectors]).reshape(len(vectors), -1)


def stack_bits(vectors: Sequence[BitVector]) -> tuple[np.ndarray, np.ndarray]:
    words = np.concatenate([v.words for v in vectors]).reshape(len(vectors), -1)
    pops = np.fromiter((v.popcount for v in vectors), dtype=np.int64, count=len(vectors))
    return words, pops


def _uniform_dim(vectors, dim=None) -> int:
    for v in vectors:
        if dim is None:
            dim = v.dim
        elif v.dim != dim:
            raise ValueError(f"dimension mismatch: {v.dim} != {dim}")
    return dim


@dataclass(frozen=True)
class Kernel:
    """A similarity kernel plus its batched forms.

    ``score`` is always oriented so that larger means more similar; for
    Hamming that is the negated distance.
    """

    name: str
    element: str  # "float" or "bit"
    pair: Callable
    to_score: Callable[[float], float]

    def accepts(self, vector) -> bool:
        cls = FeatureVector if self.element == "float" else BitVector
        return isinstance(vector, cls)

    def score(self, a, b) -> float:
        return self.to_score(self.pair(a, b))

    def score_many(self, query, candidates: Sequence) -> np.ndarray:
        """Score one query against each candidate (``len(candidates)`` comparisons)."""
        _uniform_dim(candidates, query.dim)
        self._check_types([query], candidates)
        out = np.empty(len(candidates), dtype=np.float64)
        if not candidates:
            return out
        if self.element == "float":
            _kernels.cosine_many(query.values, stack_float(candidates), out)
            return out
        rows, pops = stack_bits(candidates)
        _MANY[self.name](query.words, query.popcount, rows, pops, out)
        if self.name == "hamming":
            np.negative(out, out=out)
        return out

    def score_max(self, history: Sequence, candidates: Sequence) -> np.ndarray:
        """For each candidate, the best score over all history vectors."""
        if not history:
            raise ValueError("history must be non-empty")
        _uniform_dim(candidates, _uniform_dim(history))
        self._check_types(history, candidates)
        out = np.empty(len(candidates), dtype=np.float64)
        if not candidates:
            return out
        if self.element == "float":
            _kernels.cosine_max(stack_float(history), stack_float(candidates), out)
            return out
        hw, hp = stack_bits(history)
        cw, cp = stack_bits(candidates)
        _MAX[self.name](hw, hp, cw, cp, out)
        return out

    def _check_types(self, *groups):
        for group in groups:
            for v in group:
                if not self.accepts(v):
                    raise TypeError(f"kernel {self.name!r} expects {self.element} vectors, got {type(v).__name__}")


_MANY = {
    "ochiai": _kernels.ochiai_many,
    "jaccard": _kernels.jaccard_many,
    "hamming": _kernels.hamming_many,
}
_MAX = {
    "ochiai": _kernels.ochiai_max,
    "jaccard": _kernels.jaccard_max,
    "hamming": _kernels.neg_hamming_max,
}

KERNELS = {
    "cosine": Kernel("cosine", "float", cosine, float),
    "ochiai": Kernel("ochiai", "bit", ochiai, float),
    "jaccard": Kernel("jaccard", "bit", jaccard, float),
    "hamming": Kernel("hamming", "bit", hamming, lambda d: -float(d)),
}


def get_kernel(kernel: str | Kernel) -> Kernel:
    if isinstance(kernel, Kernel):
        return kernel
    try:
        return KERNELS[kernel]
    except KeyError:
        raise ValueError(f"unknown kernel {kernel!r}; choose from {sorted(KERNELS)}") from None
