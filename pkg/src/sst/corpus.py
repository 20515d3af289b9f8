"""Retweet corpus: data model, ingestion, filtering, and serialization.

The corpus is the unit every other module operates on. It is built from a
stream of raw retweet records (newline-delimited JSON or CSV with a header
row), passed through a fixed pipeline:

    parse -> completeness filter -> dedup -> profile construction

A constructed :class:`Corpus` is immutable and safe to share across threads.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import re
from dataclasses import dataclass, replace
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import IO, Iterable, Iterator, Mapping, Sequence

logger = logging.getLogger("sst")

EMOTION_LABELS = frozenset(
    {"anger", "disgust", "fear", "joy", "sadness", "surprise", "neutral"}
)

MIN_TIMESTAMP = datetime(2000, 1, 1, tzinfo=timezone.utc)

#: Canonical field order for serialization. Optional fields are written only
#: when present, but always in this relative order.
FIELD_ORDER = (
    "record_id",
    "retweeter_id",
    "original_user_id",
    "timestamp",
    "text",
    "retweet_count",
    "reply_count",
    "like_count",
    "quote_count",
    "retweeter_followers",
    "has_media",
    "conspiracy_prob",
    "bot_score",
    "sentiment_compound",
    "toxicity",
    "emotion_label",
)

ENGAGEMENT_FIELDS = ("retweet_count", "reply_count", "like_count", "quote_count")

# Token classifiers used by clean_text. A URL is any token starting with an
# http(s) scheme or "www."; a mention is an @-handle of up to 15 word chars,
# tolerating trailing punctuation; an RT tag is a leading "RT @handle:".
_URL_PREFIX_RE = re.compile(r"^(?:https?://|www\.)", re.IGNORECASE)
_MENTION_TOKEN_RE = re.compile(r"^@[A-Za-z0-9_]{1,15}[^\w]*$")
_RT_TAG_RE = re.compile(r"^\s*rt\s+@[A-Za-z0-9_]{1,15}:?\s*", re.IGNORECASE)


class CorpusError(Exception):
    """Base class for corpus construction failures."""


class EmptyCorpusError(CorpusError):
    """No records survived parsing and filtering."""


class MissingScoresError(CorpusError):
    """An operation needed classifier scores that no record carries."""


@dataclass(frozen=True)
class RetweetRecord:
    """One retweet event linking a retweeter to an original tweeter.

    ``record_id`` may be empty when the input carried none; dedup then falls
    back to ``(retweeter_id, original_user_id, timestamp, text-hash)``.
    Engagement counts are platform totals observed at retweet time.
    """

    record_id: str
    retweeter_id: str
    original_user_id: str
    timestamp: datetime
    text: str
    retweet_count: int
    reply_count: int
    like_count: int
    quote_count: int
    retweeter_followers: int | None
    has_media: bool
    conspiracy_prob: float | None = None
    sentiment_compound: float | None = None
    toxicity: float | None = None
    emotion_label: str | None = None

    def dedup_key(self) -> tuple:
        if self.record_id:
            return ("id", self.record_id)
        digest = hashlib.sha1(self.text.encode("utf-8")).hexdigest()
        return ("derived", self.retweeter_id, self.original_user_id, self.timestamp, digest)


@dataclass(frozen=True)
class UserProfile:
    """Per-account state derived from the records an account appears in.

    ``follower_count`` is the largest follower count observed for the account
    acting as a retweeter (0 if never observed). ``bot_score`` is carried on
    records of the account's own tweets; absent when never reported.
    ``conspiracy_tweet_count`` counts authored records whose conspiracy
    probability strictly exceeds the ingest threshold.
    """

    user_id: str
    follower_count: int
    bot_score: float | None
    first_tweet_time: datetime
    conspiracy_tweet_count: int


@dataclass(frozen=True)
class Corpus:
    """Analysis-ready retweet dataset.

    Immutable once built; all profile fields are derived from ``records``,
    and ``reference_time`` is the maximum record timestamp.
    """

    records: tuple[RetweetRecord, ...]
    users: Mapping[str, UserProfile]
    reference_time: datetime

    def __len__(self) -> int:
        return len(self.records)

    def original_user_ids(self) -> set[str]:
        return {r.original_user_id for r in self.records}


@dataclass
class IngestStats:
    """Per-reason record accounting for one ingest pass."""

    records_read: int = 0
    malformed: int = 0
    non_retweet: int = 0
    bad_timestamp: int = 0
    missing_engagement: int = 0
    duplicates: int = 0
    retained: int = 0

    def dropped(self) -> int:
        return (
            self.malformed
            + self.non_retweet
            + self.bad_timestamp
            + self.missing_engagement
            + self.duplicates
        )

    def as_rows(self) -> list[tuple[str, int]]:
        return [
            ("records_read", self.records_read),
            ("malformed", self.malformed),
            ("non_retweet", self.non_retweet),
            ("bad_timestamp", self.bad_timestamp),
            ("missing_engagement", self.missing_engagement),
            ("duplicates", self.duplicates),
            ("retained", self.retained),
        ]


def parse_timestamp(value: str) -> datetime:
    """Parse an ISO-8601 instant to an aware UTC datetime at second precision.

    Naive inputs are taken as UTC. Raises ValueError for unparseable values
    and for instants before 2000-01-01T00:00:00Z.
    """
    if not isinstance(value, str) or not value:
        raise ValueError(f"not a timestamp: {value!r}")
    text = value.strip()
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    ts = datetime.fromisoformat(text)
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    ts = ts.astimezone(timezone.utc).replace(microsecond=0)
    if ts < MIN_TIMESTAMP:
        raise ValueError(f"timestamp before 2000-01-01: {value!r}")
    return ts


def format_timestamp(ts: datetime) -> str:
    return ts.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def _opt_float(raw: Mapping, key: str, lo: float, hi: float) -> float | None:
    value = raw.get(key)
    if value is None or value == "":
        return None
    out = float(value)
    if not (lo <= out <= hi):
        raise ValueError(f"{key} out of range: {out}")
    return out


def _opt_int(raw: Mapping, key: str) -> int | None:
    value = raw.get(key)
    if value is None or value == "":
        return None
    out = int(value)
    if out < 0:
        raise ValueError(f"{key} negative: {out}")
    return out


def _parse_bool(value) -> bool:
    if isinstance(value, bool):
        return value
    if isinstance(value, (int, float)):
        return bool(value)
    if isinstance(value, str):
        lowered = value.strip().lower()
        if lowered in ("true", "1", "yes"):
            return True
        if lowered in ("false", "0", "no", ""):
            return False
    raise ValueError(f"not a boolean: {value!r}")


class _Reject(Exception):
    """Internal: record dropped for the named stats bucket."""

    def __init__(self, bucket: str, detail: str = ""):
        super().__init__(detail)
        self.bucket = bucket


def _coerce_record(raw: Mapping) -> tuple[RetweetRecord, float | None]:
    """Convert one raw mapping to a record, returning (record, bot_score).

    ``bot_score`` rides on input lines but belongs to the original user's
    profile, so it is split off here rather than stored on the record.
    """
    retweeter = str(raw.get("retweeter_id") or "").strip()
    original = str(raw.get("original_user_id") or "").strip()
    if not retweeter or not original:
        raise _Reject("non_retweet", "missing retweeter_id/original_user_id")

    try:
        ts = parse_timestamp(raw.get("timestamp"))
    except (ValueError, TypeError) as exc:
        raise _Reject("bad_timestamp", str(exc))

    counts = {}
    for field in ENGAGEMENT_FIELDS:
        value = raw.get(field)
        if value is None or value == "":
            raise _Reject("missing_engagement", f"missing {field}")
        try:
            counts[field] = int(value)
        except (TypeError, ValueError):
            raise _Reject("missing_engagement", f"bad {field}: {value!r}")
        if counts[field] < 0:
            raise _Reject("missing_engagement", f"negative {field}")

    try:
        followers = _opt_int(raw, "retweeter_followers")
        has_media = _parse_bool(raw.get("has_media", False))
        conspiracy = _opt_float(raw, "conspiracy_prob", 0.0, 1.0)
        bot_score = _opt_float(raw, "bot_score", 0.0, 1.0)
        sentiment = _opt_float(raw, "sentiment_compound", -1.0, 1.0)
        toxicity = _opt_float(raw, "toxicity", 0.0, 1.0)
    except (TypeError, ValueError) as exc:
        raise _Reject("malformed", str(exc))

    emotion = raw.get("emotion_label")
    if emotion == "" or emotion is None:
        emotion = None
    elif emotion not in EMOTION_LABELS:
        raise _Reject("malformed", f"unknown emotion_label: {emotion!r}")

    record = RetweetRecord(
        record_id=str(raw.get("record_id") or "").strip(),
        retweeter_id=retweeter,
        original_user_id=original,
        timestamp=ts,
        text=str(raw.get("text") or ""),
        retweet_count=counts["retweet_count"],
        reply_count=counts["reply_count"],
        like_count=counts["like_count"],
        quote_count=counts["quote_count"],
        retweeter_followers=followers,
        has_media=has_media,
        conspiracy_prob=conspiracy,
        sentiment_compound=sentiment,
        toxicity=toxicity,
        emotion_label=emotion,
    )
    return record, bot_score


def build_corpus(
    records: Sequence[RetweetRecord],
    bot_scores: Mapping[str, float] | None = None,
    conspiracy_threshold: float = 0.9,
) -> Corpus:
    """Assemble profiles and reference time from already-clean records."""
    if not records:
        raise EmptyCorpusError("empty corpus")
    bot_scores = bot_scores or {}

    first_seen: dict[str, datetime] = {}
    followers: dict[str, int] = {}
    conspiracy_counts: dict[str, int] = {}
    for rec in records:
        for uid in (rec.original_user_id, rec.retweeter_id):
            prev = first_seen.get(uid)
            if prev is None or rec.timestamp < prev:
                first_seen[uid] = rec.timestamp
        if rec.retweeter_followers is not None:
            if rec.retweeter_followers > followers.get(rec.retweeter_id, 0):
                followers[rec.retweeter_id] = rec.retweeter_followers
        if rec.conspiracy_prob is not None and rec.conspiracy_prob > conspiracy_threshold:
            conspiracy_counts[rec.original_user_id] = (
                conspiracy_counts.get(rec.original_user_id, 0) + 1
            )

    users = {
        uid: UserProfile(
            user_id=uid,
            follower_count=followers.get(uid, 0),
            bot_score=bot_scores.get(uid),
            first_tweet_time=first_seen[uid],
            conspiracy_tweet_count=conspiracy_counts.get(uid, 0),
        )
        for uid in sorted(first_seen)
    }
    reference_time = max(rec.timestamp for rec in records)
    return Corpus(records=tuple(records), users=users, reference_time=reference_time)


def ingest(
    stream: Iterable,
    conspiracy_threshold: float = 0.9,
) -> tuple[Corpus, IngestStats]:
    """Fold a raw record stream into a Corpus.

    ``stream`` yields either raw mappings or ``(line_number, mapping)`` pairs;
    a pair with ``None`` in place of the mapping marks an unparseable line.
    Records missing any of the four engagement counts are dropped; duplicate
    records (by ``record_id``, else a derived key) keep their first
    occurrence. Raises EmptyCorpusError when nothing survives.
    """
    stats = IngestStats()
    kept: list[RetweetRecord] = []
    bot_scores: dict[str, float] = {}
    seen: set[tuple] = set()

    for item in stream:
        if isinstance(item, tuple):
            lineno, raw = item
        else:
            lineno, raw = stats.records_read + 1, item
        stats.records_read += 1
        if raw is None:
            stats.malformed += 1
            logger.warning("line %d: unparseable record", lineno)
            continue
        try:
            record, bot_score = _coerce_record(raw)
        except _Reject as rej:
            setattr(stats, rej.bucket, getattr(stats, rej.bucket) + 1)
            if rej.bucket == "bad_timestamp":
                logger.warning("line %d: rejected timestamp (%s)", lineno, rej)
            continue
        key = record.dedup_key()
        if key in seen:
            stats.duplicates += 1
            continue
        seen.add(key)
        kept.append(record)
        if bot_score is not None:
            prev = bot_scores.get(record.original_user_id)
            if prev is None or bot_score > prev:
                bot_scores[record.original_user_id] = bot_score

    stats.retained = len(kept)
    if not kept:
        raise EmptyCorpusError("empty corpus")
    corpus = build_corpus(kept, bot_scores, conspiracy_threshold)
    return corpus, stats


def filter_conspiracy(corpus: Corpus, threshold: float = 0.9) -> Corpus:
    """Keep all records of original users with >=1 record above threshold.

    Mirrors the retention rule: a user with at least one conspiracy-endorsing
    post keeps their whole retweet history; everyone else is dropped. Profiles
    are rebuilt from the surviving records, so conspiracy tweet counts reflect
    ``threshold``.
    """
    if not 0.0 <= threshold <= 1.0:
        raise ValueError(f"threshold must be in [0,1], got {threshold}")
    if all(rec.conspiracy_prob is None for rec in corpus.records):
        raise MissingScoresError("no classifier scores present")

    keep_users = {
        rec.original_user_id
        for rec in corpus.records
        if rec.conspiracy_prob is not None and rec.conspiracy_prob > threshold
    }
    kept = [rec for rec in corpus.records if rec.original_user_id in keep_users]
    if not kept:
        raise EmptyCorpusError("empty corpus")
    bot_scores = {
        uid: profile.bot_score
        for uid, profile in corpus.users.items()
        if profile.bot_score is not None
    }
    return build_corpus(kept, bot_scores, threshold)


def clean_text(text: str) -> str:
    """Strip URLs, leading RT tags, and @-mentions; keep hashtags.

    Mention tokens are removed whole, including any trailing punctuation glued
    to the handle. Whitespace is collapsed to single spaces; the result may be
    empty. Idempotent.
    """
    previous = None
    while previous != text:
        previous = text
        text = _RT_TAG_RE.sub("", text, count=1)
    tokens = [
        tok
        for tok in text.split()
        if not _URL_PREFIX_RE.match(tok) and not _MENTION_TOKEN_RE.match(tok)
    ]
    return " ".join(tokens)


# -- serialization ----------------------------------------------------------


def record_to_raw(record: RetweetRecord, bot_score: float | None) -> dict:
    """Map a record back to the input schema (canonical field order)."""
    raw: dict = {
        "record_id": record.record_id,
        "retweeter_id": record.retweeter_id,
        "original_user_id": record.original_user_id,
        "timestamp": format_timestamp(record.timestamp),
        "text": record.text,
        "retweet_count": record.retweet_count,
        "reply_count": record.reply_count,
        "like_count": record.like_count,
        "quote_count": record.quote_count,
    }
    if record.retweeter_followers is not None:
        raw["retweeter_followers"] = record.retweeter_followers
    raw["has_media"] = record.has_media
    for key, value in (
        ("conspiracy_prob", record.conspiracy_prob),
        ("bot_score", bot_score),
        ("sentiment_compound", record.sentiment_compound),
        ("toxicity", record.toxicity),
        ("emotion_label", record.emotion_label),
    ):
        if value is not None:
            raw[key] = value
    return raw


def write_jsonl(corpus: Corpus, fp: IO[str]) -> None:
    """Serialize to newline-delimited JSON, byte-stable for a given corpus."""
    for record in corpus.records:
        profile = corpus.users[record.original_user_id]
        raw = record_to_raw(record, profile.bot_score)
        fp.write(json.dumps(raw, ensure_ascii=False, separators=(",", ":")))
        fp.write("\n")


def write_csv(corpus: Corpus, fp: IO[str]) -> None:
    """Serialize to the CSV variant with the canonical header row."""
    writer = csv.DictWriter(fp, fieldnames=list(FIELD_ORDER), lineterminator="\n")
    writer.writeheader()
    for record in corpus.records:
        profile = corpus.users[record.original_user_id]
        raw = record_to_raw(record, profile.bot_score)
        row = {key: raw.get(key, "") for key in FIELD_ORDER}
        row["has_media"] = "true" if record.has_media else "false"
        writer.writerow(row)


def save(corpus: Corpus, path: str | Path) -> None:
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as fp:
        if path.suffix.lower() == ".csv":
            write_csv(corpus, fp)
        else:
            write_jsonl(corpus, fp)


def read_raw(path: str | Path) -> Iterator[tuple[int, dict | None]]:
    """Yield (line_number, raw mapping) pairs from a JSONL or CSV file.

    The format is sniffed from the first non-blank line: a leading ``{`` means
    JSONL, anything else is treated as CSV with a header row. Unparseable
    lines yield ``None`` so ingest can count them.
    """
    path = Path(path)
    with open(path, "r", encoding="utf-8", newline="") as fp:
        head = fp.readline()
        probe = head.lstrip()
        fp.seek(0)
        if probe.startswith("{") or not probe:
            for lineno, line in enumerate(fp, start=1):
                if not line.strip():
                    continue
                try:
                    yield lineno, json.loads(line)
                except json.JSONDecodeError:
                    yield lineno, None
        else:
            reader = csv.DictReader(fp)
            for lineno, row in enumerate(reader, start=2):
                if row.get(None) is not None or None in row.values():
                    yield lineno, None
                    continue
                yield lineno, dict(row)


def load(path: str | Path, conspiracy_threshold: float = 0.9) -> tuple[Corpus, IngestStats]:
    """Read and ingest a record file in one step."""
    return ingest(read_raw(path), conspiracy_threshold)


def months_active(profile: UserProfile, reference_time: datetime) -> int:
    """Activity period in 30-day months, minimum 1."""
    days = (reference_time - profile.first_tweet_time) // timedelta(days=1)
    return max(0, days) // 30 + 1
