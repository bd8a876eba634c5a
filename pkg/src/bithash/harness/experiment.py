"""Run ranking methods over evaluation cases and tabulate top-k accuracy."""

from __future__ import annotations

import csv
import io
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .. import __version__
from ..similarity import KERNELS
from ..text import DEFAULT_NGRAM, title_features
from ..uservector import (
    ComparisonCounter,
    combine_bits,
    combine_float,
    density,
    purchased_rank,
    score_pairwise,
    score_user_vector,
)
from ..vectors import BitVector, FeatureVector, HashConfig, feature_hashes, feature_signs, payload_size
from .dataset import EvalCase

STRATEGIES = ("pairwise", "user-vec")
ELEMENTS = ("float", "1-bit")
CSV_COLUMNS = ["type", "dim", "size_bytes", "time_sec", "top1", "top5", "top10", "mean_comparisons", "mean_density"]
TIMING_COLUMNS = ("time_sec",)


class ConfigError(ValueError):
    """A method or run configuration that cannot be executed."""


@dataclass(frozen=True)
class MethodSpec:
    strategy: str
    element: str
    dim: int = 8000
    kernel: str | None = None
    seed: int = 0
    sign_hash: bool = False

    def resolved_kernel(self) -> str:
        if self.kernel is not None:
            return self.kernel
        return "cosine" if self.element == "float" else "ochiai"

    @property
    def label(self) -> str:
        base = f"{self.strategy} {self.element}"
        kernel = self.resolved_kernel()
        if kernel not in ("cosine", "ochiai"):
            base += f" {kernel}"
        if self.sign_hash:
            base += " signed"
        return base

    @property
    def hash_config(self) -> HashConfig:
        return HashConfig(self.dim, self.seed, self.sign_hash)

    @property
    def size_bytes(self) -> int:
        return payload_size("float" if self.element == "float" else "bit", self.dim)

    def validate(self) -> None:
        if self.strategy not in STRATEGIES:
            raise ConfigError(f"unknown strategy {self.strategy!r}; expected one of {STRATEGIES}")
        if self.element not in ELEMENTS:
            raise ConfigError(f"unknown element type {self.element!r}; expected one of {ELEMENTS}")
        if self.dim < 1:
            raise ConfigError(f"dim must be >= 1, got {self.dim}")
        kernel = KERNELS.get(self.resolved_kernel())
        if kernel is None:
            raise ConfigError(f"unknown kernel {self.resolved_kernel()!r}")
        wanted = "float" if self.element == "float" else "bit"
        if kernel.element != wanted:
            raise ConfigError(f"kernel {kernel.name!r} cannot score {self.element} vectors")
        if self.sign_hash and self.element != "float":
            raise ConfigError("sign hashing only applies to float vectors")


def default_methods(dims: Sequence[int] = (8000, 1000), bit_kernel: str = "ochiai", seed: int = 0) -> list[MethodSpec]:
    """The four table rows (pairwise/user-vec x float/1-bit) for every dim."""
    return [
        MethodSpec(strategy, element, dim, None if element == "float" else bit_kernel, seed)
        for strategy in STRATEGIES
        for element in ELEMENTS
        for dim in dims
    ]


@dataclass
class MethodResult:
    label: str
    spec: MethodSpec
    dim: int
    size_bytes: int
    time_sec: float
    vectorize_sec: float
    top1: float
    top5: float
    top10: float
    mean_comparisons: float
    mean_density: float
    ranks: np.ndarray = field(repr=False)

    @property
    def cases(self) -> int:
        return len(self.ranks)

    def csv_row(self) -> list[str]:
        return [
            self.label,
            str(self.dim),
            str(self.size_bytes),
            f"{self.time_sec:.3f}",
            f"{self.top1:.4f}",
            f"{self.top5:.4f}",
            f"{self.top10:.4f}",
            f"{self.mean_comparisons:.2f}",
            f"{self.mean_density:.6f}",
        ]


@dataclass
class EvalReport:
    rows: list[MethodResult]
    config: dict = field(default_factory=dict)

    def header_lines(self) -> list[str]:
        return [f"bithash {__version__}", "config: " + json.dumps(self.config, sort_keys=True)]

    def to_csv(self, header: bool = True) -> str:
        buf = io.StringIO()
        if header:
            for line in self.header_lines():
                buf.write(f"# {line}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in self.rows:
            writer.writerow(row.csv_row())
        return buf.getvalue()

    def to_markdown(self, header: bool = True) -> str:
        cols = ["Type", "dim", "size(byte)", "time(sec)", "vectorize(sec)", "1-top", "5-top", "10-top", "comparisons", "density"]
        body = [
            [
                r.label,
                f"{r.dim:,}",
                f"{r.size_bytes:,}",
                f"{r.time_sec:.3f}s",
                f"{r.vectorize_sec:.3f}s",
                f"{100 * r.top1:.2f}%",
                f"{100 * r.top5:.2f}%",
                f"{100 * r.top10:.2f}%",
                f"{r.mean_comparisons:,.1f}",
                f"{r.mean_density:.4f}",
            ]
            for r in self.rows
        ]
        widths = [max(len(c), *(len(b[i]) for b in body)) for i, c in enumerate(cols)]
        fmt = lambda cells: "| " + " | ".join(c.ljust(w) for c, w in zip(cells, widths)) + " |"
        lines = []
        if header:
            lines += [f"<!-- {line} -->" for line in self.header_lines()] + [""]
        lines.append(fmt(cols))
        lines.append("|" + "|".join("-" * (w + 2) for w in widths) + "|")
        lines += [fmt(b) for b in body]
        return "\n".join(lines) + "\n"


def topk_accuracy(ranks, k: int) -> float:
    """Fraction of cases whose purchased item ranked within the first ``k``."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    ranks = np.asarray(ranks)
    if ranks.size == 0:
        return 0.0
    return float(np.count_nonzero(ranks <= k) / ranks.size)


# -- per-case work ---------------------------------------------------------


@dataclass
class _Featurized:
    case: EvalCase
    history: list[list[str]]
    candidates: list[list[str]]
    hashes: dict = field(default_factory=dict)
    signs: dict = field(default_factory=dict)

    def hashed(self, seed: int):
        if seed not in self.hashes:
            self.hashes[seed] = (
                [feature_hashes(f, seed) for f in self.history],
                [feature_hashes(f, seed) for f in self.candidates],
            )
        return self.hashes[seed]

    def signed(self, seed: int):
        if seed not in self.signs:
            self.signs[seed] = (
                [feature_signs(f, seed) for f in self.history],
                [feature_signs(f, seed) for f in self.candidates],
            )
        return self.signs[seed]


def _float_vectors(hashes, signs, dim: int) -> list[FeatureVector]:
    d = np.uint64(dim)
    if signs is None:
        return [FeatureVector(np.bincount((h % d).astype(np.intp), minlength=dim)) for h in hashes]
    return [FeatureVector(np.bincount((h % d).astype(np.intp), weights=s, minlength=dim)) for h, s in zip(hashes, signs)]


def _bit_vectors(hashes, dim: int) -> list[BitVector]:
    d = np.uint64(dim)
    return [BitVector.from_indices(h % d, dim) for h in hashes]


@dataclass
class _CaseOutcome:
    rank: int
    comparisons: int
    density: float
    vectorize_sec: float
    score_sec: float


def _run_case(feat: _Featurized, spec: MethodSpec, hash_sec: float) -> _CaseOutcome:
    t0 = time.perf_counter()
    hist_h, cand_h = feat.hashed(spec.seed)
    if spec.element == "float":
        hist_s, cand_s = feat.signed(spec.seed) if spec.sign_hash else (None, None)
        history = _float_vectors(hist_h, hist_s, spec.dim)
        candidates = _float_vectors(cand_h, cand_s, spec.dim)
    else:
        history = _bit_vectors(hist_h, spec.dim)
        candidates = _bit_vectors(cand_h, spec.dim)
    t1 = time.perf_counter()

    counter = ComparisonCounter()
    kernel = spec.resolved_kernel()
    user_vec = None
    if spec.strategy == "pairwise":
        scores = score_pairwise(history, candidates, kernel, counter)
    else:
        user_vec = combine_float(history) if spec.element == "float" else combine_bits(history)
        scores = score_user_vector(user_vec, candidates, kernel, counter)
    r = purchased_rank(scores, feat.case.recall)
    t2 = time.perf_counter()

    # saturation diagnostic, outside the timed region
    if spec.element == "1-bit":
        dens = density(user_vec if user_vec is not None else combine_bits(history))
    else:
        summed = user_vec if user_vec is not None else combine_float(history)
        dens = float(np.count_nonzero(summed.values)) / spec.dim
    return _CaseOutcome(r, counter.count, dens, (t1 - t0) + hash_sec, t2 - t1)


def _featurize(case: EvalCase, ngram: int, lowercase: bool) -> _Featurized:
    return _Featurized(
        case,
        [title_features(i.title, ngram, lowercase) for i in case.history.viewed],
        [title_features(i.title, ngram, lowercase) for i in case.recall.candidates],
    )


def run_experiment(
    cases: Sequence[EvalCase],
    methods: Sequence[MethodSpec],
    ngram: int = DEFAULT_NGRAM,
    lowercase: bool = True,
    parallel: bool = False,
    workers: int | None = None,
    config: dict | None = None,
) -> EvalReport:
    """Score and rank every case with every method.

    ``time_sec`` covers the scoring phase only (combining, kernel calls,
    ranking). Feature extraction, hashing and vector construction are
    reported separately as ``vectorize_sec``. With ``parallel`` cases are
    spread over a thread pool; results are aggregated in case order, so
    accuracies and counters do not depend on scheduling.
    """
    if not cases:
        raise ValueError("no evaluation cases")
    if not methods:
        raise ValueError("no methods")
    if ngram < 1:
        raise ConfigError(f"ngram must be >= 1, got {ngram}")
    for spec in methods:
        spec.validate()

    outcomes: list[list[_CaseOutcome]] = [[None] * len(cases) for _ in methods]

    def work(index: int):
        t0 = time.perf_counter()
        feat = _featurize(cases[index], ngram, lowercase)
        for seed in sorted({m.seed for m in methods}):
            feat.hashed(seed)
        hash_sec = time.perf_counter() - t0
        for m, spec in enumerate(methods):
            outcomes[m][index] = _run_case(feat, spec, hash_sec)

    if parallel:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(work, range(len(cases))))
    else:
        for i in range(len(cases)):
            work(i)

    rows = []
    for spec, outs in zip(methods, outcomes):
        ranks = np.array([o.rank for o in outs], dtype=np.int64)
        rows.append(
            MethodResult(
                label=spec.label,
                spec=spec,
                dim=spec.dim,
                size_bytes=spec.size_bytes,
                time_sec=sum(o.score_sec for o in outs),
                vectorize_sec=sum(o.vectorize_sec for o in outs),
                top1=topk_accuracy(ranks, 1),
                top5=topk_accuracy(ranks, 5),
                top10=topk_accuracy(ranks, 10),
                mean_comparisons=float(np.mean([o.comparisons for o in outs])),
                mean_density=float(np.mean([o.density for o in outs])),
                ranks=ranks,
            )
        )
    cfg = {"ngram": ngram, "lowercase": lowercase, "methods": [asdict(m) for m in methods], "cases": len(cases)}
    cfg.update(config or {})
    return EvalReport(rows, cfg)
