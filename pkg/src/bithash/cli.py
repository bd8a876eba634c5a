"""Command-line entry point: ``bithash {synth,vectorize,evaluate,bench}``.

Exit codes: 0 success, 2 bad configuration or arguments, 3 unusable input
data, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import asdict, fields
from pathlib import Path

from . import __version__
from .harness.bench import DEFAULT_BENCH_DIMS, bench_csv, bench_table, run_bench
from .harness.dataset import DEFAULT_DISTRACTORS, DataError, load_dataset_files
from .harness.experiment import ConfigError, MethodSpec, run_experiment
from .harness.synth import SynthConfig, generate_synthetic
from .text import DEFAULT_NGRAM, title_features
from .vectors import DEFAULT_DIM, HashConfig, VectorFormatError, build_bit_vector, build_float_vector, serialize

log = logging.getLogger("bithash")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_IO = 4

METHOD_ALIASES = {
    "pairwise-float": ("pairwise", "float"),
    "pairwise-bit": ("pairwise", "1-bit"),
    "uservec-float": ("user-vec", "float"),
    "uservec-bit": ("user-vec", "1-bit"),
}
METHOD_ALIASES["pairwise-1bit"] = METHOD_ALIASES["pairwise-bit"]
METHOD_ALIASES["user-vec-float"] = METHOD_ALIASES["uservec-float"]
METHOD_ALIASES["user-vec-bit"] = METHOD_ALIASES["uservec-bit"]
METHOD_ALIASES["uservec-1bit"] = METHOD_ALIASES["uservec-bit"]
DEFAULT_METHODS = ["pairwise-float", "pairwise-bit", "uservec-float", "uservec-bit"]


def _int_list(text: str) -> list[int]:
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not values or any(v < 1 for v in values):
        raise argparse.ArgumentTypeError(f"expected positive integers, got {text!r}")
    return values


def _flatten(lists, default):
    if not lists:
        return list(default)
    return [v for chunk in lists for v in chunk]


def parse_methods(text: str, dims, metric: str, hash_seed: int, sign_hash: bool) -> list[MethodSpec]:
    names = DEFAULT_METHODS if text == "all" else [n.strip() for n in text.split(",") if n.strip()]
    specs = []
    for name in names:
        if name not in METHOD_ALIASES:
            raise ConfigError(f"unknown method {name!r}; choose from {sorted(set(METHOD_ALIASES))} or 'all'")
        strategy, element = METHOD_ALIASES[name]
        for dim in dims:
            kernel = "cosine" if element == "float" else metric
            specs.append(MethodSpec(strategy, element, dim, kernel, hash_seed, sign_hash and element == "float"))
    for spec in specs:
        spec.validate()
    return specs


# -- output helpers --------------------------------------------------------


class _Outputs:
    """Write files atomically; on failure remove everything written so far."""

    def __init__(self):
        self.done: list[Path] = []

    def write(self, path: Path, data: str | bytes) -> None:
        path = Path(path)
        if path.parent != Path("."):
            path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_name(path.name + ".part")
        mode = "wb" if isinstance(data, bytes) else "w"
        try:
            with open(tmp, mode, **({} if isinstance(data, bytes) else {"encoding": "utf-8"})) as fh:
                fh.write(data)
            os.replace(tmp, path)
        finally:
            if tmp.exists():
                tmp.unlink()
        self.done.append(path)

    def rollback(self) -> None:
        for path in self.done:
            try:
                path.unlink()
            except OSError:
                pass
        self.done.clear()


def _read_titles(path: Path):
    """Yield ``(item_id, title)`` from JSONL items or ``id<TAB>title`` lines."""
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            if line.lstrip().startswith("{"):
                try:
                    rec = json.loads(line)
                    yield str(rec["item_id"]), str(rec["title"])
                except (ValueError, KeyError) as exc:
                    raise DataError(f"{path}:{lineno}: malformed item record ({exc})") from None
            elif "\t" in line:
                item_id, title = line.split("\t", 1)
                yield item_id, title
            else:
                raise DataError(f"{path}:{lineno}: expected a JSON object or 'item_id<TAB>title'")


# -- subcommands -----------------------------------------------------------


def _synth_config(args) -> SynthConfig:
    values = {f.name: getattr(args, f.name) for f in fields(SynthConfig) if getattr(args, f.name, None) is not None}
    values["seed"] = args.seed
    try:
        return SynthConfig(**values)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def cmd_synth(args, outputs: _Outputs) -> int:
    dataset = generate_synthetic(_synth_config(args))
    out = Path(args.out)
    tmpdir = out.parent / (out.name + ".part")
    paths = dataset.write(tmpdir)
    out.mkdir(parents=True, exist_ok=True)
    for name, path in paths.items():
        target = out / path.name
        os.replace(path, target)
        outputs.done.append(target)
    tmpdir.rmdir()
    print(f"wrote {len(dataset.cases)} cases to {out}")
    return EXIT_OK


def cmd_vectorize(args, outputs: _Outputs) -> int:
    if args.type == "bit" and args.sign_hash:
        raise ConfigError("--sign-hash only applies to --type float")
    try:
        config = HashConfig(args.dim, args.hash_seed, args.sign_hash)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if args.ngram < 1:
        raise ConfigError("--ngram must be >= 1")

    records = list(_read_titles(Path(args.items)))
    counts: dict[str, int] = {}
    for item_id, _ in records:
        counts[item_id] = counts.get(item_id, 0) + 1
    dupes = sorted(k for k, v in counts.items() if v > 1)
    if dupes:
        raise DataError(f"duplicate item ids: {', '.join(dupes)}")

    build = build_bit_vector if args.type == "bit" else build_float_vector
    blob = bytearray()
    manifest = {}
    for item_id, title in records:
        data = serialize(build(title_features(title, args.ngram, not args.no_lowercase), config))
        manifest[item_id] = {"offset": len(blob), "length": len(data)}
        blob += data

    out = Path(args.out)
    outputs.write(out, bytes(blob))
    meta = {
        "bithash": __version__,
        "type": args.type,
        "dim": args.dim,
        "ngram": args.ngram,
        "hash": "xxh64",
        "hash_seed": args.hash_seed,
        "sign_hash": args.sign_hash,
        "lowercase": not args.no_lowercase,
        "records": manifest,
    }
    outputs.write(out.with_name(out.name + ".manifest.json"), json.dumps(meta, indent=1, ensure_ascii=False) + "\n")
    print(f"wrote {len(manifest)} {args.type} vectors (dim {args.dim}) to {out}")
    return EXIT_OK


def cmd_evaluate(args, outputs: _Outputs) -> int:
    dims = _flatten(args.dim, (8000, 1000))
    methods = parse_methods(args.methods, dims, args.metric, args.hash_seed, args.sign_hash)
    if args.ngram < 1:
        raise ConfigError("--ngram must be >= 1")

    config = {
        "methods": args.methods,
        "metric": args.metric,
        "dims": dims,
        "seed": args.seed,
        "hash_seed": args.hash_seed,
        "sign_hash": args.sign_hash,
        "parallel": args.parallel,
    }
    if args.synthetic:
        synth = _synth_config(args)
        cases = generate_synthetic(synth).cases
        config["source"] = {"synthetic": asdict(synth)}
    else:
        if not args.items or not args.events:
            raise ConfigError("give --items and --events, or --synthetic")
        if args.distractors < 0:
            raise ConfigError("--distractors must be >= 0")
        cases, stats = load_dataset_files(args.items, args.events, args.distractors, args.seed)
        config["source"] = {
            "items": str(args.items),
            "events": str(args.events),
            "distractors": args.distractors,
            "recall_sizes": {str(k): v for k, v in sorted(stats.recall_sizes.items())},
            "skipped_lines": stats.malformed_items + stats.malformed_events,
        }

    report = run_experiment(
        cases,
        methods,
        ngram=args.ngram,
        lowercase=not args.no_lowercase,
        parallel=args.parallel,
        config=config,
    )

    table = report.to_markdown()
    if args.out:
        out = Path(args.out)
        if args.format == "csv":
            outputs.write(out, report.to_csv())
        elif args.format == "table":
            outputs.write(out, table)
        else:
            outputs.write(out.with_suffix(".csv"), report.to_csv())
            outputs.write(out.with_suffix(".md"), table)
    if args.format == "csv" and not args.out:
        sys.stdout.write(report.to_csv())
    elif not args.quiet:
        sys.stdout.write(table)
    return EXIT_OK


def cmd_bench(args, outputs: _Outputs) -> int:
    dims = _flatten(args.dim, DEFAULT_BENCH_DIMS)
    if args.repeat < 1 or args.corpus < 1 or args.history < 1 or args.bits < 0:
        raise ConfigError("--repeat, --corpus and --history must be >= 1; --bits >= 0")
    rows = run_bench(dims, args.corpus, args.history, args.bits, args.repeat, args.min_time, args.seed)
    text = bench_csv(rows) if args.format == "csv" else bench_table(rows)
    if args.out:
        outputs.write(Path(args.out), text)
    sys.stdout.write(text)
    return EXIT_OK


# -- argument parsing ------------------------------------------------------


def _add_synth_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("synthetic data")
    g.add_argument("--users", type=int, help="number of cases (default 2000)")
    g.add_argument("--categories", type=int)
    g.add_argument("--vocab-size", dest="vocab_size", type=int)
    g.add_argument("--titles-per-category", dest="titles_per_category", type=int)
    g.add_argument("--brands-per-category", dest="brands_per_category", type=int)
    g.add_argument("--history-median", dest="history_median", type=int, help="median history length (default 44)")
    g.add_argument("--history-sigma", dest="history_sigma", type=float)
    g.add_argument("--history-max", dest="history_max", type=int)
    g.add_argument("--signal", type=float, help="probability a history item shares the purchased product phrase")
    g.add_argument("--noise-tokens", dest="noise_tokens", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bithash", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"bithash {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="write a synthetic items/events dataset")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--distractors", type=int, default=None, help="distractors per recall set (default 100)")
    _add_synth_args(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("vectorize", help="hash titles into serialized vectors")
    p.add_argument("--items", required=True, help="items.jsonl or item_id<TAB>title lines")
    p.add_argument("--out", required=True, help="vector file; a .manifest.json sidecar is written next to it")
    p.add_argument("--type", choices=("bit", "float"), default="bit")
    p.add_argument("--dim", type=int, default=DEFAULT_DIM)
    p.add_argument("--ngram", type=int, default=DEFAULT_NGRAM)
    p.add_argument("--hash-seed", dest="hash_seed", type=int, default=0)
    p.add_argument("--sign-hash", dest="sign_hash", action="store_true")
    p.add_argument("--no-lowercase", dest="no_lowercase", action="store_true", help="skip title normalization")
    p.set_defaults(func=cmd_vectorize)

    p = sub.add_parser("evaluate", help="run the purchase-prediction experiment")
    src = p.add_argument_group("input")
    src.add_argument("--items")
    src.add_argument("--events")
    src.add_argument("--synthetic", action="store_true", help="generate data instead of reading files")
    p.add_argument("--methods", default="all", help=f"comma list of {', '.join(DEFAULT_METHODS)}, or 'all'")
    p.add_argument("--metric", choices=("ochiai", "jaccard", "hamming"), default="ochiai", help="bit-vector kernel")
    p.add_argument("--dim", type=_int_list, action="append", help="dimensions, comma separated (default 8000,1000)")
    p.add_argument("--ngram", type=int, default=DEFAULT_NGRAM)
    p.add_argument("--seed", type=int, default=0, help="seed for data generation and distractor sampling")
    p.add_argument("--hash-seed", dest="hash_seed", type=int, default=0)
    p.add_argument("--sign-hash", dest="sign_hash", action="store_true", help="signed hashing for float vectors")
    p.add_argument("--distractors", type=int, default=DEFAULT_DISTRACTORS)
    p.add_argument("--no-lowercase", dest="no_lowercase", action="store_true")
    p.add_argument("--format", choices=("csv", "table", "both"), default="both")
    p.add_argument("--out", help="report path (with --format both: written as .csv and .md)")
    p.add_argument("--parallel", action="store_true", help="score cases on a thread pool")
    p.add_argument("-q", "--quiet", action="store_true")
    _add_synth_args(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("bench", help="microbenchmark bit vs float kernels")
    p.add_argument("--dim", type=_int_list, action="append", help="dimensions (default 8000,1000,64)")
    p.add_argument("--corpus", type=int, default=256)
    p.add_argument("--history", type=int, default=44)
    p.add_argument("--bits", type=int, default=70, help="set bits per random vector (0 = zero vectors)")
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--min-time", dest="min_time", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=("table", "csv"), default="table")
    p.add_argument("--out")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    outputs = _Outputs()
    try:
        return args.func(args, outputs)
    except ConfigError as exc:
        code, msg = EXIT_CONFIG, f"configuration error: {exc}"
    except (DataError, VectorFormatError) as exc:
        code, msg = EXIT_DATA, f"data error: {exc}"
    except OSError as exc:
        code, msg = EXIT_IO, f"I/O error: {exc}"
    outputs.rollback()
    print(f"bithash: {msg}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
