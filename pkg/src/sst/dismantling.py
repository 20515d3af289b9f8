"""Dismantling evaluation: remove top-ranked users, track remaining volume.

Removal is by a fixed precomputed ranking (no adaptive re-ranking). A curve
holds the number of retweet records remaining after the top k ranked users
and all their authored records are deleted, for every k from 0 to the full
ranking length.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import IO, Iterable, Sequence

from .corpus import Corpus
from .metrics import MetricTable, OPTIMAL_METRIC_ID, format_score


class UnknownUserError(KeyError):
    """The user is not an original tweeter in this corpus."""


class RankingMismatchError(ValueError):
    """A ranking does not cover the corpus, or two curves disagree on size."""


@dataclass(frozen=True)
class DismantlingCurve:
    metric_id: str
    points: tuple[tuple[int, int], ...]
    total_records: int

    def remaining(self) -> tuple[int, ...]:
        return tuple(rem for _, rem in self.points)


def contribution_counts(corpus: Corpus) -> Counter:
    """Authored record count per original user."""
    return Counter(rec.original_user_id for rec in corpus.records)


def impact(corpus: Corpus, user: str) -> float:
    """Share of the corpus removed by suspending one original tweeter."""
    count = contribution_counts(corpus).get(user, 0)
    if count == 0:
        raise UnknownUserError(f"unknown original user: {user!r}")
    return count / len(corpus.records)


def impact_report(corpus: Corpus) -> dict[str, float]:
    """Impact fraction for every original user; fractions sum to 1."""
    total = len(corpus.records)
    counts = contribution_counts(corpus)
    return {user: counts[user] / total for user in sorted(counts)}


def optimal_ranking(corpus: Corpus) -> MetricTable:
    """Perfect-knowledge baseline: rank by total record contribution."""
    counts = contribution_counts(corpus)
    return MetricTable.from_scores(
        OPTIMAL_METRIC_ID, {user: float(count) for user, count in counts.items()}
    )


def dismantle(corpus: Corpus, ranking: MetricTable) -> DismantlingCurve:
    """Remaining-record curve for sequential removal along a ranking.

    The ranking must cover every original user; users ranked but absent from
    the corpus remove nothing.
    """
    counts = contribution_counts(corpus)
    missing = set(counts) - set(ranking.ranking)
    if missing:
        sample = ", ".join(sorted(missing)[:5])
        raise RankingMismatchError(
            f"ranking misses {len(missing)} original user(s): {sample}"
        )
    total = len(corpus.records)
    points = [(0, total)]
    remaining = total
    for k, user in enumerate(ranking.ranking, start=1):
        remaining -= counts.get(user, 0)
        points.append((k, remaining))
    return DismantlingCurve(
        metric_id=ranking.metric_id, points=tuple(points), total_records=total
    )


def superspreader_cutoff(
    ranking: MetricTable | Sequence[str],
    fraction: float = 0.001,
    rounding: str = "ceil",
) -> list[str]:
    """Top ``fraction`` of a ranking, in rank order.

    ``rounding`` selects how the cutoff count is derived from
    ``fraction * user_count``: "ceil" (default, never empty for fraction > 0)
    or "floor".
    """
    if not 0.0 < fraction <= 1.0:
        raise ValueError(f"fraction must be in (0,1], got {fraction}")
    if rounding not in ("ceil", "floor"):
        raise ValueError(f"rounding must be 'ceil' or 'floor', got {rounding!r}")
    users = list(ranking.ranking) if isinstance(ranking, MetricTable) else list(ranking)
    op = math.ceil if rounding == "ceil" else math.floor
    count = op(fraction * len(users))
    return users[:count]


def curve_difference(
    a: DismantlingCurve, b: DismantlingCurve
) -> list[tuple[int, int]]:
    """Pointwise remaining-volume difference a - b at each removal count."""
    if a.total_records != b.total_records:
        raise RankingMismatchError(
            f"curves cover different corpora: {a.total_records} vs {b.total_records} records"
        )
    if len(a.points) != len(b.points):
        raise RankingMismatchError(
            f"curves cover different user counts: {len(a.points) - 1} vs {len(b.points) - 1}"
        )
    return [
        (removed, rem_a - rem_b)
        for (removed, rem_a), (_, rem_b) in zip(a.points, b.points)
    ]


def write_curve(curve: DismantlingCurve, fp: IO[str]) -> None:
    fp.write("metric_id,removed_users,remaining_records,remaining_fraction\n")
    total = curve.total_records
    for removed, remaining in curve.points:
        fraction = remaining / total if total else 0.0
        fp.write(f"{curve.metric_id},{removed},{remaining},{format_score(fraction)}\n")


def write_curves_long(curves: Iterable[DismantlingCurve], fp: IO[str]) -> None:
    fp.write("metric_id,removed_users,remaining_records,remaining_fraction\n")
    for curve in sorted(curves, key=lambda c: c.metric_id):
        total = curve.total_records
        for removed, remaining in curve.points:
            fraction = remaining / total if total else 0.0
            fp.write(
                f"{curve.metric_id},{removed},{remaining},{format_score(fraction)}\n"
            )


def write_difference(
    metric_a: str, metric_b: str, diffs: Sequence[tuple[int, int]], fp: IO[str]
) -> None:
    fp.write("metric_a,metric_b,removed_users,remaining_difference\n")
    for removed, delta in diffs:
        fp.write(f"{metric_a},{metric_b},{removed},{delta}\n")
