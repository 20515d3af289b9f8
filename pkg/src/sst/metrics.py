"""The 27 influence metrics: four engagement families plus H/M/G indices.

Metrics score *original tweeters*. The unit of aggregation is the distinct
original tweet, reconstructed from retweet records by grouping on
``(original_user_id, text-hash)``; each engagement kind takes the maximum
count observed across the tweet's records (counts are running platform
totals, so the max is the latest snapshot).
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from datetime import datetime
from enum import Enum
from typing import IO, Iterable, Mapping, Sequence

from .corpus import Corpus, months_active


class EngagementKind(Enum):
    RETWEETS = "retweets"
    REPLIES = "replies"
    LIKES = "likes"
    QUOTES = "quotes"
    ENGAGEMENT_SCORE = "engagement_score"
    NORMALIZED_ENGAGEMENT_SCORE = "normalized_engagement_score"


BASE_KINDS = (
    EngagementKind.RETWEETS,
    EngagementKind.REPLIES,
    EngagementKind.LIKES,
    EngagementKind.QUOTES,
)


class MetricFamily(Enum):
    AGGREGATE = "aggregate"
    PER_TWEET = "per_tweet"
    FOLLOWER_WEIGHTED_AGGREGATE = "follower_weighted_aggregate"
    FOLLOWER_WEIGHTED_PER_TWEET = "follower_weighted_per_tweet"


def _metric_members() -> dict[str, str]:
    members = {}
    for family in MetricFamily:
        for kind in EngagementKind:
            value = f"{family.value}_{kind.value}"
            members[value.upper()] = value
    for index_id in ("h_index", "m_index", "g_index"):
        members[index_id.upper()] = index_id
    return members


MetricId = Enum("MetricId", _metric_members())

#: Reserved id for the dismantling baseline; not a member of MetricId.
OPTIMAL_METRIC_ID = "optimal"

_FAMILY_KIND_BY_ID = {
    MetricId[f"{family.value}_{kind.value}".upper()]: (family, kind)
    for family in MetricFamily
    for kind in EngagementKind
}


def metric_parts(metric: MetricId) -> tuple[MetricFamily, EngagementKind] | None:
    """Family/kind pair for a family metric, None for the H/M/G indices."""
    return _FAMILY_KIND_BY_ID.get(metric)


def parse_metric_id(value: str) -> MetricId:
    try:
        return MetricId(value)
    except ValueError:
        known = ", ".join(m.value for m in MetricId)
        raise ValueError(f"unknown metric id {value!r} (expected one of: {known})")


@dataclass(frozen=True)
class MetricTable:
    """Scores for one metric with a deterministic ranking.

    Ranking sorts by score descending, breaking ties by user_id ascending.
    """

    metric_id: str
    scores: Mapping[str, float]
    ranking: tuple[str, ...]

    @classmethod
    def from_scores(cls, metric_id: str, scores: Mapping[str, float]) -> "MetricTable":
        for user, score in scores.items():
            if not math.isfinite(score) or score < 0:
                raise ValueError(f"score for {user!r} must be finite and >= 0, got {score}")
        ranking = tuple(sorted(scores, key=lambda uid: (-scores[uid], uid)))
        return cls(metric_id=metric_id, scores=dict(scores), ranking=ranking)


@dataclass(frozen=True)
class TweetStats:
    """One reconstructed original tweet."""

    original_user_id: str
    retweets: int
    replies: int
    likes: int
    quotes: int
    top_retweeter_followers: int
    record_count: int

    def base_counts(self) -> tuple[int, int, int, int]:
        return (self.retweets, self.replies, self.likes, self.quotes)


def engagement_score(rt: int, r: int, l: int, q: int) -> int:
    """Per-tweet engagement score: plain sum of the four counts."""
    if min(rt, r, l, q) < 0:
        raise ValueError("engagement counts must be >= 0")
    return rt + r + l + q


def engagement_bounds(corpus: Corpus) -> dict[EngagementKind, tuple[int, int]]:
    """Corpus-wide (min, max) of each base engagement kind over records."""
    columns = {
        EngagementKind.RETWEETS: [rec.retweet_count for rec in corpus.records],
        EngagementKind.REPLIES: [rec.reply_count for rec in corpus.records],
        EngagementKind.LIKES: [rec.like_count for rec in corpus.records],
        EngagementKind.QUOTES: [rec.quote_count for rec in corpus.records],
    }
    return {kind: (min(vals), max(vals)) for kind, vals in columns.items()}


def _normalize(value: int, bounds: tuple[int, int]) -> float:
    lo, hi = bounds
    if hi == lo:
        return 0.0
    return (value - lo) / (hi - lo)


def normalized_engagements(corpus: Corpus) -> list[dict[EngagementKind, float]]:
    """Per-record min-max normalized engagements, parallel to corpus.records.

    Each entry maps the four base kinds to their normalized values in [0,1]
    and NORMALIZED_ENGAGEMENT_SCORE to their sum in [0,4]. Normalization uses
    corpus-wide extremes; a degenerate kind (max == min) normalizes to 0.
    """
    bounds = engagement_bounds(corpus)
    out = []
    for rec in corpus.records:
        raw = {
            EngagementKind.RETWEETS: rec.retweet_count,
            EngagementKind.REPLIES: rec.reply_count,
            EngagementKind.LIKES: rec.like_count,
            EngagementKind.QUOTES: rec.quote_count,
        }
        entry = {kind: _normalize(value, bounds[kind]) for kind, value in raw.items()}
        entry[EngagementKind.NORMALIZED_ENGAGEMENT_SCORE] = sum(entry.values())
        out.append(entry)
    return out


def collect_tweets(corpus: Corpus) -> dict[str, list[TweetStats]]:
    """Group records into distinct original tweets, keyed by author.

    Tweet identity is (original_user_id, sha1 of text). Engagement kinds take
    the maximum observed across the tweet's records; the follower weight is
    the highest follower count among observed retweeters (0 if none carried
    follower data).
    """
    acc: dict[tuple[str, str], list[int]] = {}
    for rec in corpus.records:
        digest = hashlib.sha1(rec.text.encode("utf-8")).hexdigest()
        key = (rec.original_user_id, digest)
        followers = rec.retweeter_followers or 0
        state = acc.get(key)
        if state is None:
            acc[key] = [
                rec.retweet_count,
                rec.reply_count,
                rec.like_count,
                rec.quote_count,
                followers,
                1,
            ]
        else:
            state[0] = max(state[0], rec.retweet_count)
            state[1] = max(state[1], rec.reply_count)
            state[2] = max(state[2], rec.like_count)
            state[3] = max(state[3], rec.quote_count)
            state[4] = max(state[4], followers)
            state[5] += 1

    by_user: dict[str, list[TweetStats]] = {}
    for (user, _digest), state in acc.items():
        by_user.setdefault(user, []).append(
            TweetStats(
                original_user_id=user,
                retweets=state[0],
                replies=state[1],
                likes=state[2],
                quotes=state[3],
                top_retweeter_followers=state[4],
                record_count=state[5],
            )
        )
    return by_user


def _tweet_value(
    tweet: TweetStats,
    kind: EngagementKind,
    bounds: dict[EngagementKind, tuple[int, int]],
) -> float:
    if kind is EngagementKind.ENGAGEMENT_SCORE:
        return float(engagement_score(*tweet.base_counts()))
    if kind is EngagementKind.NORMALIZED_ENGAGEMENT_SCORE:
        counts = tweet.base_counts()
        return sum(_normalize(c, bounds[k]) for c, k in zip(counts, BASE_KINDS))
    index = BASE_KINDS.index(kind)
    return float(tweet.base_counts()[index])


def _family_scores(
    tweets: Sequence[TweetStats],
    family: MetricFamily,
    kind: EngagementKind,
    bounds: dict[EngagementKind, tuple[int, int]],
) -> float:
    n = len(tweets)
    total = 0.0
    weighted = 0.0
    for tweet in tweets:
        value = _tweet_value(tweet, kind, bounds)
        total += value
        weighted += value * tweet.top_retweeter_followers
    if family is MetricFamily.AGGREGATE:
        return total
    if family is MetricFamily.PER_TWEET:
        return total / n
    if family is MetricFamily.FOLLOWER_WEIGHTED_AGGREGATE:
        return weighted
    return weighted / n


def family_metric(corpus: Corpus, family: MetricFamily, kind: EngagementKind) -> MetricTable:
    """One of the 24 family metrics over all original users."""
    bounds = engagement_bounds(corpus)
    tweets_by_user = collect_tweets(corpus)
    metric = MetricId[f"{family.value}_{kind.value}".upper()]
    scores = {
        user: _family_scores(tweets, family, kind, bounds)
        for user, tweets in tweets_by_user.items()
    }
    return MetricTable.from_scores(metric.value, scores)


def h_index(retweet_counts: Iterable[int]) -> int:
    """Largest h such that at least h tweets have >= h retweets each."""
    ordered = sorted(retweet_counts, reverse=True)
    h = 0
    for position, count in enumerate(ordered, start=1):
        if count >= position:
            h = position
        else:
            break
    return h


def g_index(retweet_counts: Iterable[int]) -> int:
    """Largest g such that the top g tweets total at least g^2 retweets."""
    ordered = sorted(retweet_counts, reverse=True)
    cumulative = 0
    g = 0
    for position, count in enumerate(ordered, start=1):
        cumulative += count
        if cumulative >= position * position:
            g = position
        else:
            break
    return g


def m_index(h: int, first_tweet_time: datetime, reference_time: datetime) -> float:
    """H-index per 30-day month of activity; the period is always >= 1."""
    days = (reference_time - first_tweet_time).days
    months = max(0, days) // 30 + 1
    return h / months


def compute_all_metrics(corpus: Corpus) -> dict[MetricId, MetricTable]:
    """All 27 metric tables; every original user appears in every table."""
    bounds = engagement_bounds(corpus)
    tweets_by_user = collect_tweets(corpus)

    tables: dict[MetricId, MetricTable] = {}
    # Per-user sums are reused across the four families of the same kind.
    for kind in EngagementKind:
        totals: dict[str, float] = {}
        weighted: dict[str, float] = {}
        counts: dict[str, int] = {}
        for user, tweets in tweets_by_user.items():
            total = 0.0
            wsum = 0.0
            for tweet in tweets:
                value = _tweet_value(tweet, kind, bounds)
                total += value
                wsum += value * tweet.top_retweeter_followers
            totals[user] = total
            weighted[user] = wsum
            counts[user] = len(tweets)
        by_family = {
            MetricFamily.AGGREGATE: totals,
            MetricFamily.PER_TWEET: {u: totals[u] / counts[u] for u in totals},
            MetricFamily.FOLLOWER_WEIGHTED_AGGREGATE: weighted,
            MetricFamily.FOLLOWER_WEIGHTED_PER_TWEET: {
                u: weighted[u] / counts[u] for u in weighted
            },
        }
        for family, scores in by_family.items():
            metric = MetricId[f"{family.value}_{kind.value}".upper()]
            tables[metric] = MetricTable.from_scores(metric.value, scores)

    h_scores = {
        user: float(h_index(t.retweets for t in tweets))
        for user, tweets in tweets_by_user.items()
    }
    g_scores = {
        user: float(g_index(t.retweets for t in tweets))
        for user, tweets in tweets_by_user.items()
    }
    m_scores = {
        user: m_index(
            int(h_scores[user]),
            corpus.users[user].first_tweet_time,
            corpus.reference_time,
        )
        for user in tweets_by_user
    }
    tables[MetricId.H_INDEX] = MetricTable.from_scores(MetricId.H_INDEX.value, h_scores)
    tables[MetricId.M_INDEX] = MetricTable.from_scores(MetricId.M_INDEX.value, m_scores)
    tables[MetricId.G_INDEX] = MetricTable.from_scores(MetricId.G_INDEX.value, g_scores)
    return tables


def format_score(score: float) -> str:
    """9-significant-digit rendering used by every tabular export."""
    return format(score, ".9g")


def write_metric_table(table: MetricTable, fp: IO[str]) -> None:
    fp.write("metric_id,rank,user_id,score\n")
    for rank, user in enumerate(table.ranking, start=1):
        fp.write(f"{table.metric_id},{rank},{user},{format_score(table.scores[user])}\n")


def write_metric_tables_combined(tables: Iterable[MetricTable], fp: IO[str]) -> None:
    fp.write("metric_id,rank,user_id,score\n")
    for table in sorted(tables, key=lambda t: t.metric_id):
        for rank, user in enumerate(table.ranking, start=1):
            fp.write(
                f"{table.metric_id},{rank},{user},{format_score(table.scores[user])}\n"
            )
