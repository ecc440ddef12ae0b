"""Heuristic removal of bot-like accounts before any aggregation.

Three desk-scale rules on per-user activity profiles: a daily-rate cap, a
duplicate-text cap and an inter-tweet-gap floor. Each fired rule
contributes its weight to a score in [0, 1]; accounts at or above the
threshold are dropped wholesale. All caps are configuration, not constants.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from hashlib import blake2b
from typing import Iterable, Sequence

from .ingest import TweetRecord

__all__ = [
    "UserActivity",
    "BotVerdict",
    "BotConfig",
    "ActivityTracker",
    "profile_user",
    "score_user",
    "filter_corpus",
    "write_report_csv",
]


@dataclass(frozen=True)
class UserActivity:
    """Aggregate activity features for one account."""

    user_id: str
    total_tweets: int
    active_days: int
    max_tweets_per_day: int
    duplicate_text_ratio: float  # 1 - distinct normalized texts / total
    mean_inter_tweet_seconds: float  # inf for single-tweet accounts


@dataclass(frozen=True)
class BotVerdict:
    user_id: str
    score: float
    is_bot: bool
    triggered_rules: tuple[str, ...]


@dataclass(frozen=True)
class BotConfig:
    """Rule caps, weights and the decision threshold."""

    rate_cap: int = 72  # max tweets per day before the rate rule fires
    dup_cap: float = 0.8  # duplicate-text ratio cap
    gap_floor: float = 30.0  # seconds; mean gap below this fires the burst rule
    weights: tuple[float, float, float] = (1 / 3, 1 / 3, 1 / 3)  # rate, dup, burst
    threshold: float = 0.5


def _text_key(text: str) -> int:
    # Deterministic across runs, unlike hash(str).
    normalized = " ".join(text.lower().split())
    return int.from_bytes(blake2b(normalized.encode("utf-8"), digest_size=8).digest(), "big")


@dataclass
class _UserState:
    total: int = 0
    day_counts: dict = field(default_factory=dict)
    texts: set = field(default_factory=set)
    first_ts: float = math.inf
    last_ts: float = -math.inf


class ActivityTracker:
    """Streaming per-user profile accumulation (one pass over the corpus)."""

    def __init__(self):
        self._users: dict[str, _UserState] = {}

    def add(self, record: TweetRecord) -> None:
        state = self._users.get(record.user_id)
        if state is None:
            state = self._users[record.user_id] = _UserState()
        state.total += 1
        day = record.created_at.date()
        state.day_counts[day] = state.day_counts.get(day, 0) + 1
        state.texts.add(_text_key(record.text))
        ts = record.created_at.timestamp()
        state.first_ts = min(state.first_ts, ts)
        state.last_ts = max(state.last_ts, ts)

    def profiles(self) -> dict[str, UserActivity]:
        out = {}
        for user_id, s in self._users.items():
            if s.total >= 2:
                # Mean of consecutive gaps telescopes to (last-first)/(n-1).
                mean_gap = (s.last_ts - s.first_ts) / (s.total - 1)
            else:
                mean_gap = math.inf
            out[user_id] = UserActivity(
                user_id=user_id,
                total_tweets=s.total,
                active_days=len(s.day_counts),
                max_tweets_per_day=max(s.day_counts.values()),
                duplicate_text_ratio=1.0 - len(s.texts) / s.total,
                mean_inter_tweet_seconds=mean_gap,
            )
        return out


def profile_user(records: Sequence[TweetRecord]) -> UserActivity:
    """Profile one account from its records (all must share user_id)."""
    if not records:
        raise ValueError("cannot profile an empty record set")
    user_id = records[0].user_id
    for r in records:
        if r.user_id != user_id:
            raise ValueError(f"mixed users in profile input: {user_id!r} vs {r.user_id!r}")
    tracker = ActivityTracker()
    for r in records:
        tracker.add(r)
    return tracker.profiles()[user_id]


def score_user(activity: UserActivity, config: BotConfig = BotConfig()) -> BotVerdict:
    """Deterministic weighted-rule score; is_bot iff score >= threshold."""
    w_rate, w_dup, w_burst = config.weights
    fired = []
    score = 0.0
    if activity.max_tweets_per_day > config.rate_cap:
        fired.append("rate")
        score += w_rate
    if activity.duplicate_text_ratio > config.dup_cap:
        fired.append("duplication")
        score += w_dup
    if activity.mean_inter_tweet_seconds < config.gap_floor:
        fired.append("burst")
        score += w_burst
    score = min(1.0, max(0.0, score))
    return BotVerdict(
        user_id=activity.user_id,
        score=score,
        is_bot=score >= config.threshold,
        triggered_rules=tuple(fired),
    )


def filter_corpus(
    records: Iterable[TweetRecord], config: BotConfig = BotConfig()
) -> tuple[list[TweetRecord], list[BotVerdict]]:
    """Drop every record of flagged users.

    Returns the clean corpus and verdicts for all observed users (sorted by
    user id); flagged users are the ``is_bot`` subset. Idempotent: scores
    depend only on a user's own records, which removal leaves untouched.
    """
    records = list(records)
    tracker = ActivityTracker()
    for r in records:
        tracker.add(r)
    verdicts = [score_user(a, config) for _, a in sorted(tracker.profiles().items())]
    bots = {v.user_id for v in verdicts if v.is_bot}
    clean = [r for r in records if r.user_id not in bots]
    return clean, verdicts


def write_report_csv(verdicts: Iterable[BotVerdict], fh) -> None:
    writer = csv.writer(fh)
    writer.writerow(["user_id", "score", "is_bot", "triggered_rules"])
    for v in verdicts:
        writer.writerow([v.user_id, f"{v.score:.4f}", str(v.is_bot).lower(), "|".join(v.triggered_rules)])
