"""Hashtag co-occurrence network, camp partitioning and frequency clouds.

Nodes are hashtags, edge weights count tweets containing both tags (or
distinct users, with per-user dedup). Camps come from deterministic label
propagation: synchronous rounds with lexicographic tie-breaking, plus a
min-label merge that breaks the two-cycles synchronous updates can fall
into on bipartite structures. Exports are canonical (sorted nodes and
pairs) so identical graphs serialize identically.
"""

from __future__ import annotations

import csv
from collections import Counter, defaultdict
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Sequence
from xml.sax.saxutils import quoteattr

from .ingest import TweetRecord
from .stance import Stance

__all__ = [
    "CooccurrenceGraph",
    "CampSummary",
    "CampPartition",
    "build_graph",
    "partition_graph",
    "camp_clouds",
    "write_graphml",
    "write_dot",
    "write_clouds_csv",
]

DEFAULT_MIN_COUNT = 5


@dataclass(frozen=True)
class CooccurrenceGraph:
    """Pruned co-occurrence counts: tag frequencies and pair weights."""

    node_freq: dict[str, int]
    edge_weight: dict[tuple[str, str], int]  # keys are sorted pairs, a < b
    min_count: int

    @property
    def nodes(self) -> list[str]:
        return sorted(self.node_freq)

    @property
    def edges(self) -> list[tuple[str, str, int]]:
        return [(a, b, w) for (a, b), w in sorted(self.edge_weight.items())]

    def neighbors(self) -> dict[str, list[tuple[str, int]]]:
        adj: dict[str, list[tuple[str, int]]] = {tag: [] for tag in self.node_freq}
        for (a, b), w in self.edge_weight.items():
            adj[a].append((b, w))
            adj[b].append((a, w))
        return adj


def build_graph(
    records: Iterable[TweetRecord],
    min_count: int = DEFAULT_MIN_COUNT,
    dedup_users: bool = False,
) -> CooccurrenceGraph:
    """Count tag and pair occurrences, then prune below ``min_count``.

    With ``dedup_users`` each (user, tag) and (user, pair) counts once, so
    a flooding account contributes at most 1 to any weight.
    """
    node_counts: Counter = Counter()
    pair_counts: Counter = Counter()
    seen_node: set = set()
    seen_pair: set = set()
    for record in records:
        tags = sorted(set(record.hashtags))
        for tag in tags:
            if dedup_users:
                key = (record.user_id, tag)
                if key in seen_node:
                    continue
                seen_node.add(key)
            node_counts[tag] += 1
        for a, b in combinations(tags, 2):
            if dedup_users:
                key = (record.user_id, a, b)
                if key in seen_pair:
                    continue
                seen_pair.add(key)
            pair_counts[(a, b)] += 1

    kept = {t: c for t, c in node_counts.items() if c >= min_count}
    edges = {
        pair: w
        for pair, w in pair_counts.items()
        if w >= min_count and pair[0] in kept and pair[1] in kept
    }
    return CooccurrenceGraph(node_freq=kept, edge_weight=edges, min_count=min_count)


@dataclass(frozen=True)
class CampSummary:
    camp_id: int
    size: int
    total_freq: int
    top_tags: tuple[str, ...]


@dataclass(frozen=True)
class CampPartition:
    """Every retained tag assigned to exactly one camp (0 = largest)."""

    camp_of: dict[str, int]
    camps: tuple[CampSummary, ...]


def _propagate_labels(graph: CooccurrenceGraph, max_rounds: int) -> dict[str, str]:
    labels = {tag: tag for tag in graph.node_freq}
    adj = graph.neighbors()
    order = sorted(graph.node_freq)
    previous: dict[str, str] | None = None
    for _ in range(max_rounds):
        votes: dict[str, str] = {}
        changed = False
        for tag in order:
            neigh = adj[tag]
            if not neigh:
                votes[tag] = labels[tag]
                continue
            weight_by_label: dict[str, int] = defaultdict(int)
            for other, w in neigh:
                weight_by_label[labels[other]] += w
            best = min(weight_by_label, key=lambda lab: (-weight_by_label[lab], lab))
            votes[tag] = best
            changed = changed or best != labels[tag]
        if not changed:
            break
        if previous is not None and votes == previous:
            # Two-cycle (bipartite oscillation): merge the two alternating
            # labels per node deterministically and keep going.
            votes = {tag: min(votes[tag], labels[tag]) for tag in order}
        previous = labels
        labels = votes
    return labels


def partition_graph(
    graph: CooccurrenceGraph, max_rounds: int = 100, refine: bool = False
) -> CampPartition:
    """Deterministic camp assignment for every retained tag.

    Camps are numbered by descending total frequency (ties by smallest
    member tag). ``refine`` runs an optional greedy modularity merge pass
    over the propagated camps; off by default.
    """
    if not graph.node_freq:
        raise ValueError("cannot partition an empty graph")
    labels = _propagate_labels(graph, max_rounds)
    if refine:
        labels = _merge_by_modularity(graph, labels)

    members: dict[str, list[str]] = defaultdict(list)
    for tag in sorted(labels):
        members[labels[tag]].append(tag)
    ranked = sorted(
        members.values(),
        key=lambda tags: (-sum(graph.node_freq[t] for t in tags), tags[0]),
    )
    camp_of: dict[str, int] = {}
    camps = []
    for camp_id, tags in enumerate(ranked):
        for tag in tags:
            camp_of[tag] = camp_id
        by_freq = sorted(tags, key=lambda t: (-graph.node_freq[t], t))
        camps.append(
            CampSummary(
                camp_id=camp_id,
                size=len(tags),
                total_freq=sum(graph.node_freq[t] for t in tags),
                top_tags=tuple(by_freq[:10]),
            )
        )
    return CampPartition(camp_of=camp_of, camps=tuple(camps))


def _modularity(graph: CooccurrenceGraph, labels: dict[str, str]) -> float:
    two_m = 2.0 * sum(graph.edge_weight.values())
    if two_m == 0:
        return 0.0
    degree: dict[str, float] = defaultdict(float)
    for (a, b), w in graph.edge_weight.items():
        degree[a] += w
        degree[b] += w
    intra: dict[str, float] = defaultdict(float)
    deg_sum: dict[str, float] = defaultdict(float)
    for (a, b), w in graph.edge_weight.items():
        if labels[a] == labels[b]:
            intra[labels[a]] += w
    for tag, d in degree.items():
        deg_sum[labels[tag]] += d
    communities = set(labels.values())
    return sum(2 * intra[c] / two_m - (deg_sum[c] / two_m) ** 2 for c in communities)


def _merge_by_modularity(graph: CooccurrenceGraph, labels: dict[str, str]) -> dict[str, str]:
    # Greedy pairwise merges while any merge improves modularity.
    labels = dict(labels)
    while True:
        current = _modularity(graph, labels)
        best_gain = 0.0
        best_pair: tuple[str, str] | None = None
        camp_ids = sorted(set(labels.values()))
        for a, b in combinations(camp_ids, 2):
            trial = {t: (a if lab == b else lab) for t, lab in labels.items()}
            gain = _modularity(graph, trial) - current
            if gain > best_gain + 1e-12:
                best_gain = gain
                best_pair = (a, b)
        if best_pair is None:
            return labels
        a, b = best_pair
        labels = {t: (a if lab == b else lab) for t, lab in labels.items()}


def camp_clouds(
    labeled: Iterable[tuple[TweetRecord, Stance | str]]
) -> dict[str, list[tuple[str, int]]]:
    """Tag frequencies conditioned on the tweet's stance label.

    Returns, for every stance value, tags with their counts sorted by
    descending count then tag. A tag used in several camps appears in each
    with its respective count, and per-tag counts summed over all stances
    equal the tag's corpus frequency.
    """
    per_stance: dict[str, Counter] = {s.value: Counter() for s in Stance}
    for record, stance in labeled:
        value = stance.value if isinstance(stance, Stance) else str(stance)
        counter = per_stance.setdefault(value, Counter())
        for tag in set(record.hashtags):
            counter[tag] += 1
    return {
        stance: sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
        for stance, counts in per_stance.items()
    }


# -- exports ------------------------------------------------------------


def write_graphml(
    graph: CooccurrenceGraph, fh, partition: CampPartition | None = None
) -> None:
    """Canonical GraphML with frequency/camp node attributes and edge weights."""
    fh.write('<?xml version="1.0" encoding="UTF-8"?>\n')
    fh.write('<graphml xmlns="http://graphml.graphdrawing.org/xmlns">\n')
    fh.write('  <key id="freq" for="node" attr.name="frequency" attr.type="int"/>\n')
    fh.write('  <key id="camp" for="node" attr.name="camp" attr.type="int"/>\n')
    fh.write('  <key id="weight" for="edge" attr.name="weight" attr.type="int"/>\n')
    fh.write('  <graph edgedefault="undirected">\n')
    for tag in graph.nodes:
        fh.write(f"    <node id={quoteattr(tag)}>\n")
        fh.write(f'      <data key="freq">{graph.node_freq[tag]}</data>\n')
        if partition is not None:
            fh.write(f'      <data key="camp">{partition.camp_of[tag]}</data>\n')
        fh.write("    </node>\n")
    for a, b, w in graph.edges:
        fh.write(f"    <edge source={quoteattr(a)} target={quoteattr(b)}>\n")
        fh.write(f'      <data key="weight">{w}</data>\n')
        fh.write("    </edge>\n")
    fh.write("  </graph>\n</graphml>\n")


def write_dot(graph: CooccurrenceGraph, fh, partition: CampPartition | None = None) -> None:
    """Canonical undirected DOT; camp recorded as a node attribute."""

    def q(s: str) -> str:
        return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'

    fh.write("graph hashtags {\n")
    for tag in graph.nodes:
        attrs = [f"frequency={graph.node_freq[tag]}"]
        if partition is not None:
            attrs.append(f"camp={partition.camp_of[tag]}")
        fh.write(f"  {q(tag)} [{', '.join(attrs)}];\n")
    for a, b, w in graph.edges:
        fh.write(f"  {q(a)} -- {q(b)} [weight={w}];\n")
    fh.write("}\n")


def write_clouds_csv(
    clouds: dict[str, list[tuple[str, int]]], fh, top_k: int | None = None
) -> None:
    writer = csv.writer(fh)
    writer.writerow(["camp", "rank", "tag", "count"])
    for stance in sorted(clouds):
        ranked = clouds[stance][:top_k] if top_k else clouds[stance]
        for rank, (tag, count) in enumerate(ranked, start=1):
            writer.writerow([stance, rank, tag, count])
