"""Shared fixture helpers for the test suite."""

from __future__ import annotations

from datetime import datetime, timedelta, timezone

import pytest

from electrend.ingest import TweetRecord

UTC = timezone.utc
T0 = datetime(2019, 3, 1, tzinfo=UTC)

_counter = [0]


def rec(
    user: str = "u1",
    text: str = "hola",
    ts: datetime | str | None = None,
    tags: list[str] | None = None,
    day: int | None = None,
    stance: str | None = None,
    tweet_id: str | None = None,
) -> TweetRecord:
    """Terse record builder; timestamps default to a fixed instant."""
    if ts is None:
        ts = T0 + timedelta(hours=12)
    elif isinstance(ts, str):
        ts = datetime.fromisoformat(ts)
        if ts.tzinfo is None:
            ts = ts.replace(tzinfo=UTC)
    if tweet_id is None:
        _counter[0] += 1
        tweet_id = f"t{_counter[0]}"
    if tags is None:
        tags = [t.lstrip("#").lower() for t in text.split() if t.startswith("#")]
    return TweetRecord(
        tweet_id=tweet_id,
        user_id=user,
        created_at=ts,
        text=text,
        hashtags=tags,
        day=day,
        stance=stance,
    )


def day_ts(day: int, second: int = 43200) -> datetime:
    """Timestamp inside day N of the fixture calendar (origin 2019-03-01)."""
    return T0 + timedelta(days=day - 1, seconds=second)


@pytest.fixture
def tiny_labeled():
    """Three users on one day: A pro_mp, B and C pro_ff."""
    return [
        rec(user="A", day=1, stance="pro_mp"),
        rec(user="B", day=1, stance="pro_ff"),
        rec(user="C", day=1, stance="pro_ff"),
    ]
