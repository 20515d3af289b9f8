"""Per-tweet linguistic measurements: readability, binary features, words.

Readability expects text already passed through ``corpus.clean_text`` (URLs,
RT tags and mentions gone, hashtags kept). The binary detectors operate on
the original tweet text, since they measure what the account actually posted.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import IO, Iterable, Sequence

from .corpus import Corpus, RetweetRecord, clean_text

#: Flesch-Kincaid grades above this are treated as nonsensical outliers.
READABILITY_OUTLIER_GRADE = 25.0

_URL_RE = re.compile(r"(?:https?://|www\.)\S+", re.IGNORECASE)
_MENTION_RE = re.compile(r"@\w{1,15}")
_HASHTAG_RE = re.compile(r"#\w+")
_SENTENCE_SPLIT_RE = re.compile(r"[.!?]+(?=\s|$)")
_VOWEL_GROUP_RE = re.compile(r"[aeiouy]+")
_WORD_TOKEN_RE = re.compile(r"\w+(?:'\w+)*")

# Emoji detection: pictographs, emoticons, transport, supplemental symbols,
# and regional-indicator (flag) code points.
_EMOJI_RE = re.compile(
    "["
    "\U0001F300-\U0001F5FF"
    "\U0001F600-\U0001F64F"
    "\U0001F680-\U0001F6FF"
    "\U0001F900-\U0001F9FF"
    "\U0001F1E6-\U0001F1FF"
    "]"
)


class UnreadableTextError(ValueError):
    """Text has no countable words after tokenization."""


class SentimentLabel(Enum):
    POSITIVE = "positive"
    NEUTRAL = "neutral"
    NEGATIVE = "negative"


@dataclass(frozen=True)
class ReadabilityScore:
    grade: float
    excluded: bool


@dataclass(frozen=True)
class FeatureVector:
    has_mention: bool
    has_hashtag: bool
    has_media: bool
    has_emoji: bool
    has_exclamation: bool
    has_question: bool
    has_all_caps: bool
    raw_length: int
    unedited_length: int


BINARY_FEATURES = (
    "has_mention",
    "has_hashtag",
    "has_media",
    "has_emoji",
    "has_exclamation",
    "has_question",
    "has_all_caps",
)


def count_syllables(word: str) -> int:
    """Vowel-group heuristic syllable count, minimum one per word.

    Maximal runs of aeiouy count once; a trailing silent "e" is subtracted
    unless the word ends in "le". Non-letters are ignored.
    """
    letters = "".join(ch for ch in word.lower() if ch.isalpha())
    groups = len(_VOWEL_GROUP_RE.findall(letters))
    if groups > 1 and letters.endswith("e") and not letters.endswith("le"):
        groups -= 1
    return max(1, groups)


def _words(text: str) -> list[str]:
    return [tok for tok in text.split() if any(ch.isalnum() for ch in tok)]


def count_sentences(text: str) -> int:
    """Segments ending in .!? runs; an unterminated fragment counts as one."""
    segments = _SENTENCE_SPLIT_RE.split(text)
    count = sum(1 for seg in segments if _words(seg))
    return max(1, count)


def flesch_kincaid(cleaned_text: str) -> ReadabilityScore:
    """U.S. grade level: 0.39*(words/sentences) + 11.8*(syllables/word) - 15.59.

    Hashtag tokens count as words (the "#" is ignored for syllables). Raises
    UnreadableTextError when no words remain.
    """
    words = _words(cleaned_text)
    if not words:
        raise UnreadableTextError("unreadable text: no words")
    sentences = count_sentences(cleaned_text)
    syllables = sum(count_syllables(word) for word in words)
    grade = 0.39 * (len(words) / sentences) + 11.8 * (syllables / len(words)) - 15.59
    return ReadabilityScore(grade=grade, excluded=grade > READABILITY_OUTLIER_GRADE)


def _strip_letter_edges(token: str) -> str:
    start = 0
    end = len(token)
    while start < end and not token[start].isalpha():
        start += 1
    while end > start and not token[end - 1].isalpha():
        end -= 1
    return token[start:end]


def _has_all_caps(text: str) -> bool:
    for token in text.split():
        if token.startswith(("#", "@")):
            continue
        core = _strip_letter_edges(token)
        if len(core) >= 2 and core.isalpha() and core.isupper():
            return True
    return False


def raw_text(text: str) -> str:
    """Tweet text with URLs, mentions, and hashtags removed."""
    stripped = _URL_RE.sub("", text)
    stripped = _MENTION_RE.sub("", stripped)
    stripped = _HASHTAG_RE.sub("", stripped)
    return " ".join(stripped.split())


def extract_features(record: RetweetRecord) -> FeatureVector:
    text = record.text
    return FeatureVector(
        has_mention=bool(_MENTION_RE.search(text)),
        has_hashtag=bool(_HASHTAG_RE.search(text)),
        has_media=record.has_media,
        has_emoji=bool(_EMOJI_RE.search(text)),
        has_exclamation="!" in text,
        has_question="?" in text,
        has_all_caps=_has_all_caps(text),
        raw_length=len(raw_text(text)),
        unedited_length=len(text),
    )


def load_stopwords(path: str | Path | None = None) -> frozenset[str]:
    """Stopword set from a one-word-per-line file; default is the bundled
    192-entry filler-word list."""
    if path is None:
        data = resources.files("sst.data").joinpath("stopwords.txt").read_text("utf-8")
    else:
        data = Path(path).read_text("utf-8")
    return frozenset(word.strip().lower() for word in data.splitlines() if word.strip())


def tokenize_words(text: str, include_hashtags: bool = False) -> list[str]:
    """Case-folded word tokens; hashtag tokens are dropped unless included,
    in which case they count as the bare word without "#"."""
    folded = text.casefold()
    if include_hashtags:
        folded = folded.replace("#", " ")
    else:
        folded = _HASHTAG_RE.sub(" ", folded)
    return _WORD_TOKEN_RE.findall(folded)


def word_frequency(
    texts: Iterable[str],
    stopwords: frozenset[str] | None = None,
    include_hashtags: bool = False,
) -> list[tuple[str, int]]:
    """Ranked (word, count) list over cleaned texts.

    Sorted by count descending, then lexicographically. ``stopwords`` defaults
    to the bundled list.
    """
    if stopwords is None:
        stopwords = load_stopwords()
    counts: Counter = Counter()
    for text in texts:
        counts.update(
            tok for tok in tokenize_words(text, include_hashtags) if tok not in stopwords
        )
    return sorted(counts.items(), key=lambda item: (-item[1], item[0]))


def sentiment_label(compound: float) -> SentimentLabel:
    """Label a VADER-style compound score; the neutral band is [-0.001, 0.001]."""
    if not -1.0 <= compound <= 1.0:
        raise ValueError(f"compound score must be in [-1,1], got {compound}")
    if compound > 0.001:
        return SentimentLabel.POSITIVE
    if compound < -0.001:
        return SentimentLabel.NEGATIVE
    return SentimentLabel.NEUTRAL


def write_feature_table(corpus: Corpus, fp: IO[str]) -> None:
    """One row per record: binary features, lengths, grade, sentiment label.

    Grade is blank for unreadable (empty-after-cleaning) texts; sentiment is
    blank when the record carries no compound score.
    """
    fp.write(
        "record_id,original_user_id,"
        + ",".join(BINARY_FEATURES)
        + ",raw_length,unedited_length,grade,sentiment\n"
    )
    for record in corpus.records:
        fv = extract_features(record)
        flags = ",".join(str(int(getattr(fv, name))) for name in BINARY_FEATURES)
        try:
            grade = f"{flesch_kincaid(clean_text(record.text)).grade:.6f}"
        except UnreadableTextError:
            grade = ""
        if record.sentiment_compound is not None:
            sentiment = sentiment_label(record.sentiment_compound).value
        else:
            sentiment = ""
        fp.write(
            f"{record.record_id},{record.original_user_id},{flags},"
            f"{fv.raw_length},{fv.unedited_length},{grade},{sentiment}\n"
        )
