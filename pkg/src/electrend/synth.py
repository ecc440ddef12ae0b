"""Synthetic electorates with known ground truth, plus brute-force oracles.

The generator draws a true stance per user (FF, MP or third), a per-user
activity rate (gamma-heterogeneous Poisson), and emits tweets whose text
carries the camp's vocabulary and, with some probability, one of the
camp's seed hashtags. A per-tweet cross-talk probability flips the
signal to the opposing major formula (FF emits MP-flavored content and
vice versa), modeling classifier noise and ambivalent users. Third-camp
tweets are never flipped: the category comparison weighs only major-camp
evidence, so even rare stray FF/MP signals would expel virtually every
long-horizon third user from the Unclassified category and make the
scheduled mix unrecoverable. Optional planted bots tweet at high rate
with duplicated text, and an optional drift schedule changes the stance
mix (users redraw their stance at each drift boundary).

Everything derives from per-user RNG substreams of one seed, so output is
byte-identical regardless of generation order or parallelism.

``oracle_categories`` re-derives user verdicts by literal day-by-day
loops, sharing no summation code with the aggregation module; it is the
reference the fast path is checked against.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from datetime import date, datetime, timedelta, timezone
from hashlib import blake2b
from typing import Iterator, Mapping, Sequence

import numpy as np

from .ingest import TweetRecord
from .stance import DEFAULT_SEEDS
from .trend import TrendPoint, UserCategory

__all__ = [
    "ElectorateSpec",
    "GroundTruth",
    "generate",
    "iter_records",
    "write_corpus",
    "ground_truth",
    "oracle_categories",
    "RecoveryReport",
    "recovery_report",
    "generate_planted_tag_corpus",
]

SPEC_FORMAT_VERSION = 1

Mix = tuple[float, float, float]  # (p_ff, p_mp, p_third)

_CAMPS = ("ff", "mp", "third")

# Every synthetic tweet mentions one of these so the corpus passes the
# candidate-name ingest queries; the choice is uniform and therefore
# carries no stance signal.
_NAME_REFS = ("macri", "cfk", "kirchner", "lavagna", "pichetto", "alferdez")

_UTC = timezone.utc


def _check_mix(mix: Sequence[float], what: str) -> Mix:
    if len(mix) != 3:
        raise ValueError(f"{what} must have three components (ff, mp, third)")
    if any(p < 0 or p > 1 for p in mix):
        raise ValueError(f"{what} components must lie in [0, 1]")
    if abs(sum(mix) - 1.0) > 1e-9:
        raise ValueError(f"{what} must sum to 1, got {sum(mix)!r}")
    return tuple(float(p) for p in mix)


@dataclass(frozen=True)
class ElectorateSpec:
    """Parameters of a synthetic electorate run."""

    n_users: int
    n_days: int
    mix: Mix = (0.475, 0.309, 0.216)
    mean_rate: float = 0.5  # expected tweets per user-day
    rate_shape: float = 2.0  # gamma shape of the per-user rate; lower = more skew
    crosstalk: float = 0.05  # per-tweet probability of an opposing-formula signal (FF<->MP)
    seed_rate: float = 0.6  # probability a tweet carries a camp seed hashtag
    bot_fraction: float = 0.0  # leading fraction of users generated as bots
    bot_rate: int = 150  # bot tweets per day, identical text
    drift: tuple[tuple[int, Mix], ...] = ()  # (from_day, mix) overrides, users redraw
    start_date: date = date(2019, 3, 1)
    rng_seed: int = 20190811
    vocab_size: int = 50  # camp-specific words per camp
    common_vocab_size: int = 30

    def __post_init__(self):
        if self.n_users < 0 or self.n_days < 1:
            raise ValueError("need n_users >= 0 and n_days >= 1")
        object.__setattr__(self, "mix", _check_mix(self.mix, "mix"))
        if not 0 <= self.crosstalk < 0.5:
            raise ValueError("crosstalk must lie in [0, 0.5)")
        if not 0 <= self.seed_rate <= 1:
            raise ValueError("seed_rate must lie in [0, 1]")
        if not 0 <= self.bot_fraction < 1:
            raise ValueError("bot_fraction must lie in [0, 1)")
        if self.mean_rate <= 0 or self.rate_shape <= 0:
            raise ValueError("mean_rate and rate_shape must be positive")
        checked = tuple(
            (int(day), _check_mix(mix, f"drift mix at day {day}")) for day, mix in self.drift
        )
        for day, _ in checked:
            if not 1 < day <= self.n_days:
                raise ValueError(f"drift day {day} outside (1, n_days]")
        object.__setattr__(self, "drift", tuple(sorted(checked)))

    # -- derived views --------------------------------------------------

    @property
    def n_bots(self) -> int:
        return int(round(self.bot_fraction * self.n_users))

    @property
    def phases(self) -> list[tuple[int, Mix]]:
        """(from_day, mix) segments covering days 1..n_days."""
        return [(1, self.mix), *self.drift]

    def mix_for_day(self, day: int) -> Mix:
        current = self.mix
        for from_day, mix in self.drift:
            if day >= from_day:
                current = mix
        return current

    @property
    def run_id(self) -> str:
        digest = blake2b(
            json.dumps(self.to_dict(), sort_keys=True).encode(), digest_size=6
        )
        return digest.hexdigest()

    # -- spec file ------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "spec_version": SPEC_FORMAT_VERSION,
            "n_users": self.n_users,
            "n_days": self.n_days,
            "mix": list(self.mix),
            "mean_rate": self.mean_rate,
            "rate_shape": self.rate_shape,
            "crosstalk": self.crosstalk,
            "seed_rate": self.seed_rate,
            "bot_fraction": self.bot_fraction,
            "bot_rate": self.bot_rate,
            "drift": {str(day): list(mix) for day, mix in self.drift},
            "start_date": self.start_date.isoformat(),
            "rng_seed": self.rng_seed,
            "vocab_size": self.vocab_size,
            "common_vocab_size": self.common_vocab_size,
        }

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=1, sort_keys=True)
            fh.write("\n")

    @classmethod
    def from_dict(cls, obj: dict) -> "ElectorateSpec":
        version = obj.get("spec_version")
        if version != SPEC_FORMAT_VERSION:
            raise ValueError(f"unsupported spec version: {version!r}")
        fields = {k: v for k, v in obj.items() if k != "spec_version"}
        fields["mix"] = tuple(fields["mix"])
        fields["drift"] = tuple(
            (int(day), tuple(mix)) for day, mix in sorted(fields.get("drift", {}).items(), key=lambda kv: int(kv[0]))
        )
        fields["start_date"] = date.fromisoformat(fields["start_date"])
        return cls(**fields)

    @classmethod
    def load(cls, path: str) -> "ElectorateSpec":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


@dataclass
class GroundTruth:
    """True per-user stance and bot status, plus the scheduled daily mix."""

    run_id: str
    stance_of: dict[str, str]  # user -> camp on day 1
    is_bot: dict[str, bool]
    mix_by_day: list[Mix]  # index day-1 -> scheduled (p_ff, p_mp, p_third)

    def write_csv(self, fh) -> None:
        writer = csv.writer(fh)
        writer.writerow(["user_id", "stance", "is_bot"])
        for user_id in sorted(self.stance_of):
            writer.writerow([user_id, self.stance_of[user_id], str(self.is_bot[user_id]).lower()])


def _user_id(index: int) -> str:
    return f"u{index:06d}"


def _user_params(spec: ElectorateSpec, index: int) -> tuple[list[str], float, bool]:
    """(stance per phase, tweets/day rate, is_bot) for one user.

    Drawn from a dedicated substream so ground truth is computable without
    generating any tweets.
    """
    rng = np.random.default_rng((spec.rng_seed, index, 0))
    stances = []
    for _, mix in spec.phases:
        u = rng.random()
        if u < mix[0]:
            stances.append("ff")
        elif u < mix[0] + mix[1]:
            stances.append("mp")
        else:
            stances.append("third")
    is_bot = index < spec.n_bots
    if is_bot:
        rate = float(spec.bot_rate)
    else:
        rate = float(rng.gamma(spec.rate_shape, spec.mean_rate / spec.rate_shape))
    return stances, rate, is_bot


def ground_truth(spec: ElectorateSpec) -> GroundTruth:
    stance_of = {}
    is_bot = {}
    for index in range(spec.n_users):
        stances, _, bot = _user_params(spec, index)
        uid = _user_id(index)
        stance_of[uid] = stances[0]
        is_bot[uid] = bot
    mix_by_day = [spec.mix_for_day(d) for d in range(1, spec.n_days + 1)]
    return GroundTruth(
        run_id=spec.run_id, stance_of=stance_of, is_bot=is_bot, mix_by_day=mix_by_day
    )


def _camp_seed_lists(seed_tags: Mapping[str, str]) -> dict[str, list[str]]:
    camps: dict[str, list[str]] = {camp: [] for camp in _CAMPS}
    for tag in sorted(seed_tags):
        camps[seed_tags[tag]].append(tag)
    return camps


def _phase_starts(spec: ElectorateSpec) -> list[int]:
    return [from_day for from_day, _ in spec.phases]


def _user_records(
    spec: ElectorateSpec, index: int, seed_lists: dict[str, list[str]]
) -> Iterator[TweetRecord]:
    stances, rate, is_bot = _user_params(spec, index)
    uid = _user_id(index)
    rng = np.random.default_rng((spec.rng_seed, index, 1))
    starts = _phase_starts(spec)

    if is_bot:
        camp = stances[0]
        tag = seed_lists[camp][0] if seed_lists[camp] else None
        name = _NAME_REFS[int(rng.integers(0, len(_NAME_REFS)))]
        text = f"{name} vota vota" + (f" #{tag}" if tag else "")
        seq = 0
        for day in range(1, spec.n_days + 1):
            seconds = np.sort(rng.integers(0, 86400, spec.bot_rate))
            for s in seconds:
                created = datetime.combine(
                    spec.start_date + timedelta(days=day - 1),
                    datetime.min.time(),
                    tzinfo=_UTC,
                ) + timedelta(seconds=int(s))
                yield TweetRecord(
                    tweet_id=f"s{index}-{seq}",
                    user_id=uid,
                    created_at=created,
                    text=text,
                    hashtags=[tag] if tag else [],
                )
                seq += 1
        return

    daily = rng.poisson(rate, spec.n_days)
    total = int(daily.sum())
    if total == 0:
        return
    seconds = rng.integers(0, 86400, total)
    against = rng.random(total) < spec.crosstalk
    word_a = rng.integers(0, spec.vocab_size, total)
    word_b = rng.integers(0, spec.vocab_size, total)
    common = rng.integers(0, spec.common_vocab_size, total)
    name_pick = rng.integers(0, len(_NAME_REFS), total)
    seeded = rng.random(total) < spec.seed_rate
    seed_u = rng.random(total)

    phase = 0
    seq = 0
    for day in range(1, spec.n_days + 1):
        while phase + 1 < len(starts) and day >= starts[phase + 1]:
            phase += 1
        own = stances[phase]
        midnight = datetime.combine(
            spec.start_date + timedelta(days=day - 1), datetime.min.time(), tzinfo=_UTC
        )
        for _ in range(int(daily[day - 1])):
            camp = own
            if against[seq] and own != "third":
                camp = "mp" if own == "ff" else "ff"
            tokens = [
                _NAME_REFS[int(name_pick[seq])],
                f"{camp}word{int(word_a[seq]):02d}",
                f"{camp}word{int(word_b[seq]):02d}",
                f"comun{int(common[seq]):02d}",
            ]
            tags: list[str] = []
            if seeded[seq] and seed_lists[camp]:
                tag = seed_lists[camp][int(seed_u[seq] * len(seed_lists[camp]))]
                tokens.append(f"#{tag}")
                tags.append(tag)
            yield TweetRecord(
                tweet_id=f"s{index}-{seq}",
                user_id=uid,
                created_at=midnight + timedelta(seconds=int(seconds[seq])),
                text=" ".join(tokens),
                hashtags=tags,
            )
            seq += 1


def iter_records(
    spec: ElectorateSpec, seed_tags: Mapping[str, str] | None = None
) -> Iterator[TweetRecord]:
    """Stream the corpus user by user with bounded memory."""
    seed_lists = _camp_seed_lists(DEFAULT_SEEDS if seed_tags is None else seed_tags)
    for index in range(spec.n_users):
        yield from _user_records(spec, index, seed_lists)


def generate(
    spec: ElectorateSpec, seed_tags: Mapping[str, str] | None = None
) -> tuple[list[TweetRecord], GroundTruth]:
    """Materialize the full corpus plus its ground truth."""
    return list(iter_records(spec, seed_tags)), ground_truth(spec)


def write_corpus(
    spec: ElectorateSpec,
    corpus_path: str,
    truth_path: str | None = None,
    seed_tags: Mapping[str, str] | None = None,
) -> GroundTruth:
    """Stream the corpus to a JSONL file in the ingest input schema."""
    from .ingest import open_text, record_to_json

    with open_text(corpus_path, "wt") as fh:
        for record in iter_records(spec, seed_tags):
            fh.write(record_to_json(record))
            fh.write("\n")
    truth = ground_truth(spec)
    if truth_path:
        with open(truth_path, "w", encoding="utf-8", newline="") as fh:
            truth.write_csv(fh)
    return truth


# -- brute-force category oracle ----------------------------------------


def oracle_categories(
    counts: Mapping[str, Mapping[int, Sequence[int]]],
    mode: str,
    day: int,
    window: int | None = None,
    start_day: int | None = None,
) -> dict[str, UserCategory]:
    """Literal day-by-day evaluation of the category definitions.

    ``counts`` maps user -> day -> (n_mp, n_ff, n_other). Users that fall
    in no category (no window evidence, or silent over the cumulative
    range) are omitted. Deliberately loop-based and independent of the
    aggregation module's summation paths.
    """
    if mode == "instant":
        if window is None:
            raise ValueError("instant mode needs a window length")
        first = day - window + 1
        if first < 1:
            first = 1
    elif mode == "cumulative":
        if start_day is None:
            raise ValueError("cumulative mode needs a start day")
        if not 1 <= start_day <= day:
            raise ValueError("need 1 <= start_day <= day")
        first = start_day
    else:
        raise ValueError(f"unknown mode {mode!r}")

    verdicts: dict[str, UserCategory] = {}
    for user, day_counts in counts.items():
        total_mp = 0
        total_ff = 0
        total_other = 0
        t = first
        while t <= day:
            if t in day_counts:
                triple = day_counts[t]
                total_mp = total_mp + triple[0]
                total_ff = total_ff + triple[1]
                total_other = total_other + triple[2]
            t += 1
        if total_mp > total_ff:
            verdicts[user] = UserCategory.MP
        elif total_mp < total_ff:
            verdicts[user] = UserCategory.FF
        elif total_mp == total_ff and total_mp > 0:
            verdicts[user] = UserCategory.UNDECIDED
        elif mode == "cumulative" and total_other > 0:
            verdicts[user] = UserCategory.UNCLASSIFIED
    return verdicts


# -- estimator-vs-truth report ------------------------------------------


@dataclass(frozen=True)
class RecoveryRow:
    day: int
    est_ff: float
    est_mp: float
    true_ff: float
    true_mp: float

    @property
    def err_ff(self) -> float:
        return abs(self.est_ff - self.true_ff)

    @property
    def err_mp(self) -> float:
        return abs(self.est_mp - self.true_mp)


@dataclass(frozen=True)
class RecoveryReport:
    rows: tuple[RecoveryRow, ...]
    final_error_ff: float | None
    final_error_mp: float | None
    convergence_day: int | None  # first day from which both errors stay < 1 point


def recovery_report(
    points: Sequence[TrendPoint],
    truth: GroundTruth,
    series_run_id: str | None = None,
    convergence_tolerance: float = 1.0,
) -> RecoveryReport:
    """Per-day absolute error of the FF/MP percentages against the scheduled mix.

    Days with an empty denominator are skipped. ``series_run_id``, when
    given, must match the truth's run id (guards against comparing a
    series with the wrong generator run).
    """
    if series_run_id is not None and series_run_id != truth.run_id:
        raise ValueError(
            f"series run id {series_run_id!r} does not match truth run id {truth.run_id!r}"
        )
    rows = []
    for point in points:
        if point.pct_ff is None or point.pct_mp is None:
            continue
        mix = truth.mix_by_day[min(point.day, len(truth.mix_by_day)) - 1]
        rows.append(
            RecoveryRow(
                day=point.day,
                est_ff=point.pct_ff,
                est_mp=point.pct_mp,
                true_ff=100.0 * mix[0],
                true_mp=100.0 * mix[1],
            )
        )
    if not rows:
        return RecoveryReport(rows=(), final_error_ff=None, final_error_mp=None, convergence_day=None)

    convergence_day = None
    for row in reversed(rows):
        if max(row.err_ff, row.err_mp) >= convergence_tolerance:
            break
        convergence_day = row.day
    return RecoveryReport(
        rows=tuple(rows),
        final_error_ff=rows[-1].err_ff,
        final_error_mp=rows[-1].err_mp,
        convergence_day=convergence_day,
    )


# -- planted-partition corpus for the hashtag graph ---------------------


def generate_planted_tag_corpus(
    n_blocks: int = 3,
    tags_per_block: int = 8,
    n_tweets: int = 900,
    tags_per_tweet: int = 3,
    inter_block_prob: float = 0.08,
    rng_seed: int = 7,
    start_date: date = date(2019, 3, 1),
) -> tuple[list[TweetRecord], dict[str, int]]:
    """Tweets whose hashtags form blocks with strong intra, weak inter ties.

    Returns the records and the planted tag -> block map. Each tweet draws
    its tags from one block; with ``inter_block_prob`` it also carries one
    tag from a different block, creating the weak cross edges.
    """
    rng = np.random.default_rng(rng_seed)
    blocks = [
        [f"b{b}tag{i:02d}" for i in range(tags_per_block)] for b in range(n_blocks)
    ]
    planted = {tag: b for b, tags in enumerate(blocks) for tag in tags}
    records = []
    for i in range(n_tweets):
        b = int(rng.integers(0, n_blocks))
        picks = rng.choice(tags_per_block, size=min(tags_per_tweet, tags_per_block), replace=False)
        tags = [blocks[b][int(p)] for p in sorted(picks)]
        if n_blocks > 1 and rng.random() < inter_block_prob:
            other = int(rng.integers(0, n_blocks - 1))
            if other >= b:
                other += 1
            tags.append(blocks[other][int(rng.integers(0, tags_per_block))])
        created = datetime.combine(start_date, datetime.min.time(), tzinfo=_UTC) + timedelta(
            minutes=i
        )
        records.append(
            TweetRecord(
                tweet_id=f"p{i}",
                user_id=f"pu{i % 40}",
                created_at=created,
                text=" ".join(f"#{t}" for t in tags),
                hashtags=tags,
            )
        )
    return records, planted
