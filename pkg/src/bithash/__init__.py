"""Bitwise feature hashing for short-string similarity and personalized ranking."""

__version__ = "0.1.0"

from .similarity import cosine, hamming, jaccard, ochiai
from .text import extract_ngrams, normalize, title_features
from .uservector import (
    ComparisonCounter,
    Item,
    RecallSet,
    ScoredCandidate,
    UserHistory,
    combine_bits,
    combine_float,
    density,
    rank,
    score_pairwise,
    score_user_vector,
)
from .vectors import (
    BitVector,
    FeatureVector,
    HashConfig,
    build_bit_vector,
    build_float_vector,
    deserialize,
    hash_feature,
    serialize,
)
