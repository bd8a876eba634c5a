"""Hashed feature vectors: the float baseline and the packed 1-bit variant.

Features are hashed with 64-bit xxHash (XXH64) over their UTF-8 bytes, then
reduced modulo the vector dimension. The hash and its seed are part of the
on-disk contract; golden values in the test suite pin them.

Binary layout produced by :func:`serialize`::

    magic  b"BHV1"          4 bytes
    tag    0x01 float | 0x02 bit   1 byte
    dim    uint32 LE        4 bytes
    payload
        float: dim x float32 LE
        bit:   ceil(dim / 8) bytes, bit i at byte i // 8, position i % 8 (LSB first)
"""

from __future__ import annotations

import io
import math
import struct
from dataclasses import dataclass
from typing import BinaryIO, Iterable, Sequence

import numpy as np
import xxhash

from . import _kernels

DEFAULT_DIM = 8000
MAGIC = b"BHV1"
TAG_FLOAT = 0x01
TAG_BIT = 0x02
_HEADER = struct.Struct("<4sBI")
_SIGN_SALT = 0x9E3779B97F4A7C15
_U64 = (1 << 64) - 1


class VectorFormatError(ValueError):
    """Base class for malformed serialized vectors."""


class BadMagicError(VectorFormatError):
    pass


class UnknownTagError(VectorFormatError):
    pass


class TruncatedPayloadError(VectorFormatError):
    pass


@dataclass(frozen=True)
class HashConfig:
    dim: int = DEFAULT_DIM
    seed: int = 0
    sign_hash: bool = False

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError(f"dim must be >= 1, got {self.dim}")
        if not 0 <= self.seed <= _U64:
            raise ValueError(f"seed must fit in 64 bits, got {self.seed}")


def _raw_hash(feature: str, seed: int) -> int:
    return xxhash.xxh64_intdigest(feature.encode("utf-8"), seed)


def hash_feature(feature: str, config: HashConfig) -> int:
    """Map a feature to its index in ``[0, config.dim)``."""
    return _raw_hash(feature, config.seed) % config.dim


def feature_hashes(features: Iterable[str], seed: int = 0) -> np.ndarray:
    """Full 64-bit hashes of ``features``; reduce modulo a dimension to get indices.

    Hashes are independent of the dimension, so callers evaluating several
    dimensions can hash once and reduce many times.
    """
    return np.fromiter((_raw_hash(f, seed) for f in features), dtype=np.uint64)


def feature_signs(features: Iterable[str], seed: int = 0) -> np.ndarray:
    """+1/-1 per feature, from a second hash independent of the index hash."""
    salt = seed ^ _SIGN_SALT
    bits = np.fromiter((_raw_hash(f, salt) & 1 for f in features), dtype=np.int8)
    return (1 - 2 * bits).astype(np.float32)


def _nwords(dim: int) -> int:
    return (dim + 63) // 64


def _tail_mask(dim: int) -> np.uint64:
    rem = dim % 64
    return np.uint64(_U64 if rem == 0 else (1 << rem) - 1)


class FeatureVector:
    """Dense float32 hashed vector."""

    __slots__ = ("values",)

    def __init__(self, values):
        values = np.array(values, dtype=np.float32)
        if values.ndim != 1 or values.size == 0:
            raise ValueError("FeatureVector needs a non-empty 1-d array")
        values.flags.writeable = False
        self.values = values

    @property
    def dim(self) -> int:
        return self.values.shape[0]

    @classmethod
    def zeros(cls, dim: int) -> FeatureVector:
        return cls(np.zeros(dim, dtype=np.float32))

    def norm(self) -> float:
        return float(np.linalg.norm(self.values.astype(np.float64)))

    def __eq__(self, other):
        if not isinstance(other, FeatureVector):
            return NotImplemented
        return self.dim == other.dim and bool(np.array_equal(self.values, other.values))

    def __repr__(self):
        nnz = int(np.count_nonzero(self.values))
        return f"FeatureVector(dim={self.dim}, nnz={nnz})"


class BitVector:
    """``dim`` bits packed LSB-first into uint64 words, with a cached popcount.

    Padding bits past ``dim`` in the last word are always zero.
    """

    __slots__ = ("dim", "words", "popcount")

    def __init__(self, dim: int, words: np.ndarray, popcount: int | None = None):
        if dim < 1:
            raise ValueError(f"dim must be >= 1, got {dim}")
        words = np.array(words, dtype=np.uint64)
        if words.shape != (_nwords(dim),):
            raise ValueError(f"expected {_nwords(dim)} words for dim={dim}, got shape {words.shape}")
        words[-1] &= _tail_mask(dim)
        words.flags.writeable = False
        self.dim = dim
        self.words = words
        self.popcount = _kernels.popcount_words(words) if popcount is None else popcount

    @classmethod
    def _adopt(cls, dim: int, words: np.ndarray) -> BitVector:
        # words: freshly built uint64 buffer with clean padding; no copy or mask
        self = object.__new__(cls)
        words.flags.writeable = False
        self.dim = dim
        self.words = words
        self.popcount = _kernels.popcount_words(words)
        return self

    @classmethod
    def zeros(cls, dim: int) -> BitVector:
        return cls(dim, np.zeros(_nwords(dim), dtype=np.uint64), 0)

    @classmethod
    def from_indices(cls, indices, dim: int) -> BitVector:
        bools = np.zeros(_nwords(dim) * 64, dtype=bool)
        bools[np.asarray(indices, dtype=np.int64)] = True
        return cls.from_bools(bools[:dim])

    @classmethod
    def from_bools(cls, bools) -> BitVector:
        bools = np.asarray(bools, dtype=bool)
        dim = bools.shape[0]
        padded = np.zeros(_nwords(dim) * 64, dtype=bool)
        padded[:dim] = bools
        words = np.packbits(padded, bitorder="little").view("<u8").astype(np.uint64)
        return cls._adopt(dim, words)

    def to_bools(self) -> np.ndarray:
        raw = self.words.astype("<u8").view(np.uint8)
        return np.unpackbits(raw, bitorder="little")[: self.dim].astype(bool)

    def to_float(self) -> FeatureVector:
        """The same vector as 0.0/1.0 floats."""
        return FeatureVector(self.to_bools().astype(np.float32))

    def __eq__(self, other):
        if not isinstance(other, BitVector):
            return NotImplemented
        return self.dim == other.dim and bool(np.array_equal(self.words, other.words))

    def __repr__(self):
        return f"BitVector(dim={self.dim}, popcount={self.popcount})"


def build_float_vector(features: Sequence[str], config: HashConfig) -> FeatureVector:
    """Hashing-trick count vector; with ``sign_hash`` each feature adds +1 or -1."""
    idx = (feature_hashes(features, config.seed) % np.uint64(config.dim)).astype(np.intp)
    weights = feature_signs(features, config.seed) if config.sign_hash else None
    values = np.bincount(idx, weights=weights, minlength=config.dim)
    return FeatureVector(values)


def build_bit_vector(features: Sequence[str], config: HashConfig) -> BitVector:
    if config.sign_hash:
        raise ValueError("sign hashing is not defined for bit vectors")
    idx = feature_hashes(features, config.seed) % np.uint64(config.dim)
    return BitVector.from_indices(idx, config.dim)


# -- serialization ---------------------------------------------------------


def payload_size(kind: str, dim: int) -> int:
    """Serialized payload bytes (header excluded) for a ``"float"`` or ``"bit"`` vector."""
    if kind == "float":
        return 4 * dim
    if kind == "bit":
        return math.ceil(dim / 8)
    raise ValueError(f"unknown vector kind {kind!r}")


def serialize(vector: FeatureVector | BitVector) -> bytes:
    if isinstance(vector, BitVector):
        payload = vector.words.astype("<u8").tobytes()[: payload_size("bit", vector.dim)]
        tag = TAG_BIT
    elif isinstance(vector, FeatureVector):
        payload = vector.values.astype("<f4").tobytes()
        tag = TAG_FLOAT
    else:
        raise TypeError(f"cannot serialize {type(vector).__name__}")
    return _HEADER.pack(MAGIC, tag, vector.dim) + payload


def read_vector(stream: BinaryIO) -> FeatureVector | BitVector | None:
    """Read one vector from ``stream``; ``None`` at a clean end of stream."""
    header = stream.read(_HEADER.size)
    if not header:
        return None
    if len(header) < _HEADER.size:
        raise TruncatedPayloadError(f"header truncated: {len(header)} of {_HEADER.size} bytes")
    magic, tag, dim = _HEADER.unpack(header)
    if magic != MAGIC:
        raise BadMagicError(f"bad magic {magic!r}, expected {MAGIC!r}")
    if tag == TAG_FLOAT:
        kind = "float"
    elif tag == TAG_BIT:
        kind = "bit"
    else:
        raise UnknownTagError(f"unknown type tag 0x{tag:02x}")
    if dim < 1:
        raise VectorFormatError("dim must be >= 1")
    size = payload_size(kind, dim)
    payload = stream.read(size)
    if len(payload) < size:
        raise TruncatedPayloadError(f"payload truncated: {len(payload)} of {size} bytes")
    if kind == "float":
        return FeatureVector(np.frombuffer(payload, dtype="<f4"))
    padded = payload + bytes(_nwords(dim) * 8 - size)
    words = np.frombuffer(padded, dtype="<u8").astype(np.uint64)
    if words[-1] & ~_tail_mask(dim):
        raise VectorFormatError("nonzero padding bits past dim")
    return BitVector(dim, words)


def deserialize(data: bytes) -> FeatureVector | BitVector:
    stream = io.BytesIO(data)
    vector = read_vector(stream)
    if vector is None:
        raise TruncatedPayloadError("empty input")
    if stream.read(1):
        raise VectorFormatError("trailing bytes after vector")
    return vector
