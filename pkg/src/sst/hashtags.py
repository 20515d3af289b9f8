"""Hashtag rankings, co-occurrence networks, and political orientation.

Hashtags are case-folded and compared without the leading "#". Frequency
ranking counts every occurrence; the co-occurrence graph deduplicates tags
within a tweet, so a tweet with k distinct hashtags adds one to each tag's
node count and one to each of the C(k,2) unordered pair edges.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from itertools import combinations
from pathlib import Path
from typing import IO, Iterable, Mapping, Sequence
from xml.sax.saxutils import escape, quoteattr

from .corpus import RetweetRecord

_HASHTAG_RE = re.compile(r"#(\w+)")


class Orientation(Enum):
    LEFT = "left"
    RIGHT = "right"
    NON_POLITICAL = "nonpolitical"


class HashtagFlag(Enum):
    CONSPIRACY = "conspiracy"
    OTHER = "other"


def extract_hashtags(text: str) -> list[str]:
    """All hashtag occurrences in a text, case-folded, without "#"."""
    return [tag.casefold() for tag in _HASHTAG_RE.findall(text)]


def top_hashtags(
    records: Iterable[RetweetRecord], n: int
) -> list[tuple[str, int]]:
    """The n most frequent hashtags (occurrence counts, lexicographic ties)."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    counts: Counter = Counter()
    for record in records:
        counts.update(extract_hashtags(record.text))
    ranked = sorted(counts.items(), key=lambda item: (-item[1], item[0]))
    return ranked[:n]


@dataclass
class CoHashtagGraph:
    """Weighted undirected co-hashtag network.

    Edge keys are sorted pairs, so (a, b) and (b, a) are the same edge and
    self-loops cannot exist.
    """

    nodes: dict[str, int] = field(default_factory=dict)
    edges: dict[tuple[str, str], int] = field(default_factory=dict)
    node_flags: dict[str, HashtagFlag] = field(default_factory=dict)

    def add_tweet(self, tags: Iterable[str], conspiracy: frozenset[str]) -> None:
        distinct = sorted(set(tags))
        for tag in distinct:
            self.nodes[tag] = self.nodes.get(tag, 0) + 1
            if tag not in self.node_flags:
                self.node_flags[tag] = (
                    HashtagFlag.CONSPIRACY if tag in conspiracy else HashtagFlag.OTHER
                )
        for pair in combinations(distinct, 2):
            self.edges[pair] = self.edges.get(pair, 0) + 1


def load_conspiracy_hashtags(path: str | Path | None = None) -> frozenset[str]:
    """Conspiracy-flag hashtag set, one per line; default is bundled."""
    if path is None:
        data = (
            resources.files("sst.data")
            .joinpath("conspiracy_hashtags.txt")
            .read_text("utf-8")
        )
    else:
        data = Path(path).read_text("utf-8")
    return frozenset(
        line.strip().lstrip("#").casefold() for line in data.splitlines() if line.strip()
    )


def build_cohashtag_graph(
    records: Iterable[RetweetRecord],
    conspiracy_lexicon: frozenset[str] = frozenset(),
) -> CoHashtagGraph:
    graph = CoHashtagGraph()
    for record in records:
        tags = extract_hashtags(record.text)
        if tags:
            graph.add_tweet(tags, conspiracy_lexicon)
    return graph


def merge_graphs(graphs: Iterable[CoHashtagGraph]) -> CoHashtagGraph:
    """Associative merge of shard graphs: counts add, flags unite.

    A tag flagged conspiracy in any shard stays conspiracy in the merge.
    """
    merged = CoHashtagGraph()
    for graph in graphs:
        for tag, count in graph.nodes.items():
            merged.nodes[tag] = merged.nodes.get(tag, 0) + count
        for pair, count in graph.edges.items():
            merged.edges[pair] = merged.edges.get(pair, 0) + count
        for tag, flag in graph.node_flags.items():
            if flag is HashtagFlag.CONSPIRACY or tag not in merged.node_flags:
                merged.node_flags[tag] = flag
    return merged


class OrientationLexicon:
    """Hashtag -> orientation lookup, case-insensitive after "#"-stripping."""

    def __init__(self, mapping: Mapping[str, Orientation]):
        self._map = {
            key.lstrip("#").casefold(): value for key, value in mapping.items()
        }

    def lookup(self, hashtag: str) -> Orientation | None:
        return self._map.get(hashtag.lstrip("#").casefold())

    def __len__(self) -> int:
        return len(self._map)

    @classmethod
    def load(cls, path: str | Path | None = None) -> "OrientationLexicon":
        """Read a (hashtag, orientation) CSV; default is the bundled lexicon."""
        if path is None:
            data = (
                resources.files("sst.data")
                .joinpath("orientation_lexicon.csv")
                .read_text("utf-8")
            )
        else:
            data = Path(path).read_text("utf-8")
        mapping: dict[str, Orientation] = {}
        for lineno, line in enumerate(data.splitlines(), start=1):
            line = line.strip()
            if not line or line.lower().startswith("hashtag,"):
                continue
            tag, _, label = line.partition(",")
            try:
                mapping[tag] = Orientation(label.strip().casefold())
            except ValueError:
                raise ValueError(f"line {lineno}: unknown orientation {label!r}")
        return cls(mapping)


def classify_orientation(
    record: RetweetRecord, lexicon: OrientationLexicon
) -> Orientation:
    """Majority orientation over the tweet's lexicon-matched hashtag
    occurrences; ties and no-match cases are non-political."""
    votes = Counter()
    for tag in extract_hashtags(record.text):
        label = lexicon.lookup(tag)
        if label in (Orientation.LEFT, Orientation.RIGHT):
            votes[label] += 1
    left, right = votes[Orientation.LEFT], votes[Orientation.RIGHT]
    if left > right:
        return Orientation.LEFT
    if right > left:
        return Orientation.RIGHT
    return Orientation.NON_POLITICAL


def classify_account_orientation(
    user_records: Sequence[RetweetRecord], lexicon: OrientationLexicon
) -> Orientation:
    """Majority over the user's political tweet labels; tie or none is
    non-political."""
    votes = Counter()
    for record in user_records:
        label = classify_orientation(record, lexicon)
        if label is not Orientation.NON_POLITICAL:
            votes[label] += 1
    left, right = votes[Orientation.LEFT], votes[Orientation.RIGHT]
    if left > right:
        return Orientation.LEFT
    if right > left:
        return Orientation.RIGHT
    return Orientation.NON_POLITICAL


def write_edgelist(graph: CoHashtagGraph, fp: IO[str], min_count: int = 1) -> None:
    """Plain "a<TAB>b<TAB>count" edge list, sorted, edges below min_count
    dropped."""
    for (a, b) in sorted(graph.edges):
        count = graph.edges[(a, b)]
        if count >= min_count:
            fp.write(f"{a}\t{b}\t{count}\n")


def write_graphml(graph: CoHashtagGraph, fp: IO[str], min_count: int = 1) -> None:
    """GraphML export with node weight/flag attributes and edge weights."""
    fp.write('<?xml version="1.0" encoding="UTF-8"?>\n')
    fp.write('<graphml xmlns="http://graphml.graphdrawing.org/xmlns">\n')
    fp.write('  <key id="weight" for="node" attr.name="weight" attr.type="int"/>\n')
    fp.write('  <key id="flag" for="node" attr.name="flag" attr.type="string"/>\n')
    fp.write('  <key id="count" for="edge" attr.name="count" attr.type="int"/>\n')
    fp.write('  <graph edgedefault="undirected">\n')
    for tag in sorted(graph.nodes):
        flag = graph.node_flags.get(tag, HashtagFlag.OTHER).value
        fp.write(f"    <node id={quoteattr(tag)}>\n")
        fp.write(f'      <data key="weight">{graph.nodes[tag]}</data>\n')
        fp.write(f'      <data key="flag">{escape(flag)}</data>\n')
        fp.write("    </node>\n")
    for (a, b) in sorted(graph.edges):
        count = graph.edges[(a, b)]
        if count < min_count:
            continue
        fp.write(f"    <edge source={quoteattr(a)} target={quoteattr(b)}>\n")
        fp.write(f'      <data key="count">{count}</data>\n')
        fp.write("    </edge>\n")
    fp.write("  </graph>\n")
    fp.write("</graphml>\n")
