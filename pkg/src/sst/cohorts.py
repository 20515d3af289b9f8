"""Cohort assignment: bot spreaders, human superspreaders, spreaders, rest.

Every profiled user gets exactly one label. Bots are taken out first so they
cannot occupy superspreader slots; the superspreader cutoff is then applied
to the bot-free ranking.
"""

from __future__ import annotations

import logging
from enum import Enum
from typing import IO, Mapping

from .corpus import Corpus
from .dismantling import superspreader_cutoff
from .metrics import MetricTable, format_score

logger = logging.getLogger("sst")


class CohortLabel(Enum):
    BOT_SPREADER = "bot_spreader"
    HUMAN_SUPERSPREADER = "human_superspreader"
    HUMAN_SPREADER = "human_spreader"
    HUMAN_NON_SPREADER = "human_non_spreader"


def classify(
    corpus: Corpus,
    hindex_ranking: MetricTable,
    bot_threshold: float = 0.4,
    ss_fraction: float = 0.001,
    ss_rounding: str = "ceil",
) -> dict[str, CohortLabel]:
    """Assign each user in the corpus to one of the four cohorts.

    Precedence: bot score strictly above ``bot_threshold`` with at least one
    conspiracy tweet makes a BotSpreader; among the remaining (treated-as-
    human) users, the top ``ss_fraction`` of the ranking are
    HumanSuperspreaders; any other user with a conspiracy tweet is a
    HumanSpreader; everyone else a HumanNonSpreader. Users without a bot
    score are treated as human (score 0.0); their number is logged.
    """
    if not 0.0 <= bot_threshold <= 1.0:
        raise ValueError(f"bot_threshold must be in [0,1], got {bot_threshold}")

    missing_bot_scores = sum(
        1 for profile in corpus.users.values() if profile.bot_score is None
    )
    if missing_bot_scores:
        logger.warning(
            "%d user(s) lack a bot score; treating them as human", missing_bot_scores
        )

    bots = {
        uid
        for uid, profile in corpus.users.items()
        if (profile.bot_score or 0.0) > bot_threshold
        and profile.conspiracy_tweet_count >= 1
    }
    human_ranking = [uid for uid in hindex_ranking.ranking if uid not in bots]
    superspreaders = set(
        superspreader_cutoff(human_ranking, ss_fraction, ss_rounding)
    )

    labels: dict[str, CohortLabel] = {}
    for uid, profile in corpus.users.items():
        if uid in bots:
            labels[uid] = CohortLabel.BOT_SPREADER
        elif uid in superspreaders:
            labels[uid] = CohortLabel.HUMAN_SUPERSPREADER
        elif profile.conspiracy_tweet_count >= 1:
            labels[uid] = CohortLabel.HUMAN_SPREADER
        else:
            labels[uid] = CohortLabel.HUMAN_NON_SPREADER
    return labels


def write_cohorts(
    corpus: Corpus,
    labels: Mapping[str, CohortLabel],
    hindex_ranking: MetricTable,
    fp: IO[str],
) -> None:
    """Cohort table: user_id, cohort, bot_score, h_index, conspiracy count.

    Users outside the H-index ranking (e.g. retweeter-only accounts) get an
    empty h_index cell.
    """
    fp.write("user_id,cohort,bot_score,h_index,conspiracy_tweet_count\n")
    for uid in sorted(labels):
        profile = corpus.users[uid]
        bot = format_score(profile.bot_score) if profile.bot_score is not None else ""
        h = hindex_ranking.scores.get(uid)
        h_cell = format_score(h) if h is not None else ""
        fp.write(
            f"{uid},{labels[uid].value},{bot},{h_cell},{profile.conspiracy_tweet_count}\n"
        )
