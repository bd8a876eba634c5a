"""Kernel microbenchmarks: 1-bit vs float similarity and combination.

Two similarity measurements are taken per dimension:

* ``batched``: one query against a pre-stacked corpus through the compiled
  kernels, reported per pair. This is the scoring inner loop and what the
  throughput comparison is about.
* ``per-call``: the public pairwise functions (``cosine(a, b)``,
  ``ochiai(a, b)``), dominated by interpreter dispatch at these sizes.

Combination times ``combine_float`` against ``combine_bits`` over a history
of ``history`` vectors.
"""

from __future__ import annotations

import csv
import io
import timeit
from dataclasses import dataclass

import numpy as np

from .. import _kernels
from ..similarity import cosine, hamming, jaccard, ochiai, stack_bits, stack_float
from ..uservector import combine_bits, combine_float
from ..vectors import BitVector

DEFAULT_BENCH_DIMS = (8000, 1000, 64)


@dataclass
class BenchRow:
    op: str
    mode: str
    dim: int
    float_ns: float
    bit_ns: float
    check: float

    @property
    def speedup(self) -> float:
        return self.float_ns / self.bit_ns if self.bit_ns > 0 else float("inf")


def _best_ns(fn, per: int, min_time: float, repeat: int) -> float:
    """Best-of-``repeat`` nanoseconds per operation, each repeat running >= ``min_time``."""
    timer = timeit.Timer(fn)
    number = 1
    while True:
        elapsed = timer.timeit(number)
        if elapsed >= min_time / 10 or number >= 1 << 24:
            break
        number *= 10
    number = max(1, int(number * min_time / max(elapsed, 1e-9)))
    return min(timer.repeat(repeat=repeat, number=number)) / number / per * 1e9


def random_corpus(dim: int, count: int, bits_per_vector: int, rng: np.random.Generator) -> list[BitVector]:
    k = min(bits_per_vector, dim)
    return [BitVector.from_indices(rng.choice(dim, size=k, replace=False), dim) for _ in range(count)]


def run_bench(
    dims=DEFAULT_BENCH_DIMS,
    corpus: int = 256,
    history: int = 44,
    bits_per_vector: int = 70,
    repeat: int = 5,
    min_time: float = 0.05,
    seed: int = 0,
) -> list[BenchRow]:
    """Time float and bit kernels on the same random {0,1} corpus.

    Each row carries a ``check`` that should read 0: the largest gap between
    ochiai and float cosine on identical 0/1 data, between a batched bit
    kernel and its pairwise function, or (combine rows) the number of
    positions where the OR and the float sum disagree on being nonzero.
    """
    rng = np.random.default_rng(seed)
    rows = []
    for dim in dims:
        bits = random_corpus(dim, corpus + 1, bits_per_vector, rng)
        floats = [b.to_float() for b in bits]
        q_bit, q_float = bits[0], floats[0]
        words, pops = stack_bits(bits[1:])
        mat = stack_float(floats[1:])
        out_f = np.empty(corpus)
        out_b = np.empty(corpus)

        _kernels.cosine_many(q_float.values, mat, out_f)
        _kernels.ochiai_many(q_bit.words, q_bit.popcount, words, pops, out_b)
        check = float(np.max(np.abs(out_f - out_b)))
        float_ns = _best_ns(lambda: _kernels.cosine_many(q_float.values, mat, out_f), corpus, min_time, repeat)
        bit_ns = _best_ns(lambda: _kernels.ochiai_many(q_bit.words, q_bit.popcount, words, pops, out_b), corpus, min_time, repeat)
        rows.append(BenchRow("similarity ochiai", "batched", dim, float_ns, bit_ns, check))

        _kernels.jaccard_many(q_bit.words, q_bit.popcount, words, pops, out_b)
        rows.append(
            BenchRow(
                "similarity jaccard",
                "batched",
                dim,
                float_ns,
                _best_ns(lambda: _kernels.jaccard_many(q_bit.words, q_bit.popcount, words, pops, out_b), corpus, min_time, repeat),
                float(np.max(np.abs(out_b - [jaccard(q_bit, b) for b in bits[1:]]))),
            )
        )
        _kernels.hamming_many(q_bit.words, q_bit.popcount, words, pops, out_b)
        rows.append(
            BenchRow(
                "similarity hamming",
                "batched",
                dim,
                float_ns,
                _best_ns(lambda: _kernels.hamming_many(q_bit.words, q_bit.popcount, words, pops, out_b), corpus, min_time, repeat),
                float(np.max(np.abs(out_b - [hamming(q_bit, b) for b in bits[1:]]))),
            )
        )

        a_f, b_f, a_b, b_b = floats[1], floats[2], bits[1], bits[2]
        rows.append(
            BenchRow(
                "similarity ochiai",
                "per-call",
                dim,
                _best_ns(lambda: cosine(a_f, b_f), 1, min_time, repeat),
                _best_ns(lambda: ochiai(a_b, b_b), 1, min_time, repeat),
                abs(cosine(a_f, b_f) - ochiai(a_b, b_b)),
            )
        )

        hist_b = bits[1 : 1 + history]
        hist_f = floats[1 : 1 + history]
        union = combine_bits(hist_b).to_bools()
        summed = combine_float(hist_f).values > 0
        rows.append(
            BenchRow(
                f"combine x{len(hist_b)}",
                "per-call",
                dim,
                _best_ns(lambda: combine_float(hist_f), 1, min_time, repeat),
                _best_ns(lambda: combine_bits(hist_b), 1, min_time, repeat),
                float(np.count_nonzero(union != summed)),
            )
        )
    return rows


BENCH_COLUMNS = ["op", "mode", "dim", "float_ns", "bit_ns", "speedup", "check"]


def bench_csv(rows: list[BenchRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(BENCH_COLUMNS)
    for r in rows:
        writer.writerow([r.op, r.mode, r.dim, f"{r.float_ns:.1f}", f"{r.bit_ns:.1f}", f"{r.speedup:.2f}", f"{r.check:.3g}"])
    return buf.getvalue()


def bench_table(rows: list[BenchRow]) -> str:
    head = ["op", "mode", "dim", "float ns/op", "1-bit ns/op", "speedup", "check"]
    body = [
        [r.op, r.mode, f"{r.dim:,}", f"{r.float_ns:,.1f}", f"{r.bit_ns:,.1f}", f"{r.speedup:.1f}x", f"{r.check:.3g}"]
        for r in rows
    ]
    widths = [max(len(h), *(len(b[i]) for b in body)) if body else len(h) for i, h in enumerate(head)]
    line = lambda cells: "  ".join(c.rjust(w) if i >= 2 else c.ljust(w) for i, (c, w) in enumerate(zip(cells, widths)))
    return "\n".join([line(head), line(["-" * w for w in widths])] + [line(b) for b in body]) + "\n"
