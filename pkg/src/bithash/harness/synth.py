"""Synthetic purchase-prediction data.

Each category owns a pool of products. A product is a brand plus a unique
model code (its "product phrase") and a few attribute words from the
category vocabulary. Every listing of a product renders a fresh title around
the phrase, with shuffled attributes and marketplace noise tokens.

A case draws a purchased listing from one category, ``distractors`` listings
of other products in the same category, and a history whose items are, with
probability ``signal``, other listings of the purchased product and otherwise
listings from a different category. The purchased listing and its
distractors are generated identically, so with ``signal=0`` the purchase is
indistinguishable from the rest of the recall set.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import asdict, dataclass
from pathlib import Path

from ..uservector import Item, RecallSet, UserHistory
from .dataset import EvalCase, write_items

MAX_TITLE = 80
SESSION_GAP = 30 * 60

_CONSONANTS = "bcdfghjklmnprstvwz"
_VOWELS = "aeiou"
_NOISE = [
    "NEW", "NWT", "L@@K", "RARE", "100% Authentic", "FREE SHIP", "*EXCELLENT*", "EUC!",
    "Genuine", "OEM", "Lot", "Vintage", "Fast Shipping", "Sealed", "Pulled", "Tested",
    "Original", "w/ Box", "Ohne Karton", "BNIB", "HOF", "#1", "Mint", "2pcs", "Used",
]


@dataclass(frozen=True)
class SynthConfig:
    users: int = 2000
    categories: int = 40
    vocab_size: int = 150
    titles_per_category: int = 250
    brands_per_category: int = 12
    history_median: int = 44
    history_sigma: float = 0.5
    history_max: int = 200
    distractors: int = 100
    signal: float = 0.5
    noise_tokens: int = 2
    seed: int = 0

    def __post_init__(self):
        counts = {
            "users": self.users,
            "categories": self.categories,
            "vocab_size": self.vocab_size,
            "titles_per_category": self.titles_per_category,
            "brands_per_category": self.brands_per_category,
            "history_median": self.history_median,
            "history_max": self.history_max,
            "distractors": self.distractors,
        }
        for name, value in counts.items():
            if value < 1:
                raise ValueError(f"{name} must be >= 1, got {value}")
        if not 0.0 <= self.signal <= 1.0:
            raise ValueError(f"signal must be in [0, 1], got {self.signal}")
        if self.noise_tokens < 0 or self.history_sigma < 0:
            raise ValueError("noise_tokens and history_sigma must be >= 0")
        if self.titles_per_category < self.distractors + 1:
            raise ValueError("titles_per_category must exceed distractors")
        if self.categories < 2 and self.signal < 1.0:
            raise ValueError("unrelated history items need at least 2 categories")


@dataclass(frozen=True)
class Product:
    product_id: int
    category: str
    brand: str
    model: str
    attributes: tuple[str, ...]

    @property
    def phrase(self) -> str:
        return f"{self.brand} {self.model}"


@dataclass(frozen=True)
class CaseTruth:
    user_id: str
    purchased: str
    product_id: int
    signal_items: tuple[str, ...]


@dataclass
class SyntheticDataset:
    config: SynthConfig
    cases: list[EvalCase]
    truth: list[CaseTruth]

    def items(self) -> list[Item]:
        seen = {}
        for case in self.cases:
            for item in case.history.viewed + case.recall.candidates:
                seen.setdefault(item.item_id, item)
        return [seen[k] for k in sorted(seen)]

    def events(self) -> list[dict]:
        """Clickstream consistent with the cases.

        History views are spread over sessions separated by more than the
        30-minute inactivity gap; the purchase sits in its own final session,
        preceded by a view of the purchased item.
        """
        rng = random.Random(f"events:{self.config.seed}")
        out = []
        for case in self.cases:
            user = case.user_id
            ts = 1_478_000_000 + rng.randrange(86_400)
            session = 0
            left_in_session = rng.randint(1, 8)
            for item in case.history.viewed:
                if left_in_session == 0:
                    session += 1
                    ts += SESSION_GAP + rng.randint(60, 86_400)
                    left_in_session = rng.randint(1, 8)
                out.append(_event(user, ts, "view", item.item_id, f"{user}-s{session}"))
                ts += rng.randint(5, 300)
                left_in_session -= 1
            session += 1
            ts += SESSION_GAP + rng.randint(60, 86_400)
            sid = f"{user}-s{session}"
            out.append(_event(user, ts, "view", case.recall.purchased, sid))
            out.append(_event(user, ts + rng.randint(10, 600), "purchase", case.recall.purchased, sid))
        return out

    def write(self, directory: Path | str) -> dict[str, Path]:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        paths = {name: directory / f"{name}.jsonl" for name in ("items", "events", "truth")}
        write_items(self.items(), paths["items"])
        with open(paths["events"], "w", encoding="utf-8") as fh:
            for ev in self.events():
                fh.write(json.dumps(ev) + "\n")
        with open(paths["truth"], "w", encoding="utf-8") as fh:
            for t in self.truth:
                fh.write(json.dumps(asdict(t)) + "\n")
        return paths


def _event(user, ts, kind, item_id, session_id):
    return {"user_id": user, "ts": ts, "type": kind, "item_id": item_id, "session_id": session_id}


def _word(rng: random.Random, syllables: int) -> str:
    return "".join(rng.choice(_CONSONANTS) + rng.choice(_VOWELS) for _ in range(syllables))


def _model_code(rng: random.Random) -> str:
    letters = "".join(rng.choice("ABCDEFGHJKLMNPRSTVWXYZ") for _ in range(rng.randint(1, 3)))
    digits = str(rng.randint(10, 99999))
    suffix = rng.choice(["", "", "X", "S", "-B", "V2", "i"])
    return f"{letters}-{digits}{suffix}" if rng.random() < 0.6 else f"{letters}{digits}{suffix}"


def _catalog(cfg: SynthConfig, rng: random.Random) -> dict[str, list[Product]]:
    catalog = {}
    used_codes: set[str] = set()
    pid = 0
    for c in range(cfg.categories):
        category = f"cat{c:05d}"
        vocab = sorted({_word(rng, rng.randint(2, 4)) for _ in range(cfg.vocab_size)})
        brands = [_word(rng, rng.randint(2, 3)).capitalize() for _ in range(cfg.brands_per_category)]
        products = []
        for _ in range(cfg.titles_per_category):
            code = _model_code(rng)
            while code in used_codes:
                code = _model_code(rng)
            used_codes.add(code)
            attrs = tuple(rng.sample(vocab, min(4, len(vocab))))
            products.append(Product(pid, category, rng.choice(brands), code, attrs))
            pid += 1
        catalog[category] = products
    return catalog


def _render(product: Product, cfg: SynthConfig, rng: random.Random) -> str:
    attrs = list(product.attributes)
    rng.shuffle(attrs)
    tokens = attrs[: rng.randint(2, len(attrs))]
    tokens += [rng.choice(_NOISE) for _ in range(cfg.noise_tokens)]
    rng.shuffle(tokens)
    title = product.phrase
    for tok in tokens:
        if len(title) + 1 + len(tok) > MAX_TITLE:
            break
        title = f"{title} {tok}"
    return title


def _history_length(cfg: SynthConfig, rng: random.Random) -> int:
    n = round(math.exp(rng.gauss(math.log(cfg.history_median), cfg.history_sigma)))
    return max(1, min(cfg.history_max, n))


def generate_synthetic(config: SynthConfig) -> SyntheticDataset:
    """Build ``config.users`` evaluation cases plus ground truth; deterministic in ``config.seed``."""
    rng = random.Random(config.seed)
    catalog = _catalog(config, rng)
    categories = sorted(catalog)
    next_id = 0
    cases, truth = [], []

    for u in range(config.users):
        user_id = f"u{u:07d}"
        category = rng.choice(categories)
        products = catalog[category]
        chosen = rng.sample(products, config.distractors + 1)
        bought = chosen[0]

        # random id order inside the recall set, so id tie-breaking carries no signal
        recall_products = list(chosen)
        rng.shuffle(recall_products)
        recall_items = []
        purchased_id = None
        for product in recall_products:
            item_id = f"i{next_id:09d}"
            next_id += 1
            recall_items.append(Item(item_id, _render(product, config, rng), category))
            if product is bought:
                purchased_id = item_id

        others = [c for c in categories if c != category]
        viewed, signal_ids = [], []
        for _ in range(_history_length(config, rng)):
            item_id = f"i{next_id:09d}"
            next_id += 1
            if rng.random() < config.signal:
                viewed.append(Item(item_id, _render(bought, config, rng), category))
                signal_ids.append(item_id)
            else:
                product = rng.choice(catalog[rng.choice(others)])
                viewed.append(Item(item_id, _render(product, config, rng), product.category))

        cases.append(EvalCase(UserHistory(user_id, tuple(viewed)), RecallSet(purchased_id, tuple(recall_items))))
        truth.append(CaseTruth(user_id, purchased_id, bought.product_id, tuple(signal_ids)))

    return SyntheticDataset(config, cases, truth)
