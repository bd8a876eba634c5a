"""Evaluation cases and JSONL ingestion.

``items.jsonl``: ``{"item_id": str, "title": str, "category": str}`` per line.
``events.jsonl``: ``{"user_id": str, "ts": int, "type": "view"|"purchase",
"item_id": str, "session_id": str}`` per line. Sessions are taken as given.
"""

from __future__ import annotations

import json
import logging
import random
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from ..uservector import Item, RecallSet, UserHistory

log = logging.getLogger(__name__)

DEFAULT_DISTRACTORS = 100


class DataError(Exception):
    """Input data is unusable (e.g. no valid evaluation cases)."""


@dataclass(frozen=True)
class EvalCase:
    history: UserHistory
    recall: RecallSet

    def __post_init__(self):
        if any(v.item_id == self.recall.purchased for v in self.history.viewed):
            raise ValueError(f"purchased item {self.recall.purchased!r} appears in the history")

    @property
    def user_id(self) -> str:
        return self.history.user_id


@dataclass
class LoadStats:
    items: int = 0
    events: int = 0
    malformed_items: int = 0
    malformed_events: int = 0
    duplicate_items: int = 0
    unknown_item_events: int = 0
    users: int = 0
    users_without_purchase: int = 0
    users_without_history: int = 0
    recall_sizes: Counter = field(default_factory=Counter)


def _parse_item(line: str):
    rec = json.loads(line)
    item_id, title, category = rec["item_id"], rec["title"], rec["category"]
    if not all(isinstance(v, str) for v in (item_id, title, category)):
        raise TypeError("item fields must be strings")
    return Item(item_id, title, category)


def _parse_event(line: str):
    rec = json.loads(line)
    user_id, ts, kind = rec["user_id"], rec["ts"], rec["type"]
    item_id, session_id = rec["item_id"], rec["session_id"]
    if not isinstance(ts, int) or isinstance(ts, bool):
        raise TypeError("ts must be an integer")
    if kind not in ("view", "purchase"):
        raise ValueError(f"bad event type {kind!r}")
    if not all(isinstance(v, str) for v in (user_id, item_id, session_id)):
        raise TypeError("id fields must be strings")
    return user_id, ts, kind, item_id, session_id


def load_dataset_with_stats(
    items: Iterable[str],
    events: Iterable[str],
    distractors: int = DEFAULT_DISTRACTORS,
    seed: int = 0,
) -> tuple[list[EvalCase], LoadStats]:
    if distractors < 0:
        raise ValueError("distractors must be >= 0")
    stats = LoadStats()

    catalog: dict[str, Item] = {}
    for line in items:
        if not line.strip():
            continue
        try:
            item = _parse_item(line)
        except (ValueError, KeyError, TypeError):
            stats.malformed_items += 1
            continue
        if item.item_id in catalog:
            stats.duplicate_items += 1
            continue
        catalog[item.item_id] = item
    stats.items = len(catalog)

    by_user: dict[str, list] = defaultdict(list)
    for line in events:
        if not line.strip():
            continue
        try:
            user_id, ts, kind, item_id, session_id = _parse_event(line)
        except (ValueError, KeyError, TypeError):
            stats.malformed_events += 1
            continue
        if item_id not in catalog:
            stats.unknown_item_events += 1
            continue
        stats.events += 1
        by_user[user_id].append((ts, len(by_user[user_id]), kind, item_id, session_id))
    stats.users = len(by_user)

    by_category: dict[str, list[str]] = defaultdict(list)
    for item in catalog.values():
        by_category[item.category].append(item.item_id)
    for ids in by_category.values():
        ids.sort()

    rng = random.Random(seed)
    cases = []
    for user_id in sorted(by_user):
        evs = sorted(by_user[user_id])
        purchases = [e for e in evs if e[2] == "purchase"]
        if not purchases:
            stats.users_without_purchase += 1
            continue
        p_ts, _, _, purchased, p_session = purchases[-1]

        seen = set()
        viewed = []
        for ts, _, kind, item_id, session_id in evs:
            if kind != "view" or ts >= p_ts or session_id == p_session:
                continue
            if item_id == purchased or item_id in seen:
                continue
            seen.add(item_id)
            viewed.append(catalog[item_id])
        if not viewed:
            stats.users_without_history += 1
            continue

        target = catalog[purchased]
        # the user's own views would trivially outrank the purchase
        pool = [i for i in by_category[target.category] if i != purchased and i not in seen]
        picked = rng.sample(pool, min(distractors, len(pool)))
        candidates = (target,) + tuple(catalog[i] for i in picked)
        stats.recall_sizes[len(candidates)] += 1
        cases.append(EvalCase(UserHistory(user_id, tuple(viewed)), RecallSet(purchased, candidates)))

    skipped = stats.malformed_items + stats.malformed_events
    if skipped:
        log.warning(
            "skipped %d malformed item lines and %d malformed event lines",
            stats.malformed_items,
            stats.malformed_events,
        )
    if not cases:
        raise DataError(
            f"no valid evaluation cases among {stats.users} users "
            f"({stats.users_without_purchase} without purchase, "
            f"{stats.users_without_history} without prior-session views)"
        )
    return cases, stats


def load_dataset(items: Iterable[str], events: Iterable[str], distractors: int = DEFAULT_DISTRACTORS, seed: int = 0) -> list[EvalCase]:
    """Assemble evaluation cases from item and event JSONL lines.

    One case per user, built around that user's last purchase. The history is
    every distinct item viewed in an earlier session, minus the purchased item
    itself; users left with an empty history are dropped. The recall set is
    the purchased item plus up to ``distractors`` items from its category
    that the user has not viewed, sampled without replacement. Malformed
    lines are skipped and counted.

    Raises :class:`DataError` when no case survives.
    """
    return load_dataset_with_stats(items, events, distractors, seed)[0]


def load_dataset_files(items_path, events_path, distractors: int = DEFAULT_DISTRACTORS, seed: int = 0):
    with open(items_path, encoding="utf-8") as items, open(events_path, encoding="utf-8") as events:
        return load_dataset_with_stats(items, events, distractors, seed)


def write_items(items: Iterable[Item], path: Path | str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for item in items:
            fh.write(json.dumps({"item_id": item.item_id, "title": item.title, "category": item.category}, ensure_ascii=False))
            fh.write("\n")
