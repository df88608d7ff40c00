"""Parent-term co-mention networks and eigenvector centrality.

Each node is a parent term; an edge weight counts the posts mentioning both
endpoints (multiple matches under one parent count once per post). Centrality
is the dominant eigenvector of the weighted adjacency, computed by shifted
power iteration so bipartite-like components cannot oscillate.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path

import numpy as np

from .errors import DataError
from .tagger import MatchSet

log = logging.getLogger(__name__)

# relative score floor: components that decayed out of the dominant eigenspace
# are snapped to exactly zero so rankings never include numerical dust
SCORE_FLOOR = 1e-10


@dataclass
class CoMentionGraph:
    nodes: set[str]
    edges: dict[tuple[str, str], int]  # key sorted lexicographically, weight >= 1
    corpus_id: str = ""
    lexicon_version: str = ""

    def weight(self, a: str, b: str) -> int:
        return self.edges.get((min(a, b), max(a, b)), 0)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def to_tsv(self) -> str:
        lines = ["parent_a\tparent_b\tweight"]
        for (a, b), w in sorted(self.edges.items()):
            lines.append(f"{a}\t{b}\t{w}")
        return "\n".join(lines) + "\n"

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_tsv(), encoding="utf-8")

    @staticmethod
    def from_tsv(text: str) -> "CoMentionGraph":
        lines = [l for l in text.splitlines() if l.strip()]
        if not lines or lines[0] != "parent_a\tparent_b\tweight":
            raise DataError("bad edge list header")
        edges: dict[tuple[str, str], int] = {}
        nodes: set[str] = set()
        for line in lines[1:]:
            a, b, w = line.split("\t")
            key = (min(a, b), max(a, b))
            edges[key] = int(w)
            nodes.update(key)
        return CoMentionGraph(nodes, edges)


def build_network(matches: MatchSet) -> CoMentionGraph:
    """Per post, every unordered pair of distinct mentioned parents gains weight 1."""
    if not matches.matches:
        raise DataError("cannot build a network from an empty match set")
    nodes: set[str] = set()
    edges: dict[tuple[str, str], int] = {}
    for post_id, post_matches in matches.by_post().items():
        parents = sorted({m.parent_term for m in post_matches})
        nodes.update(parents)
        for a, b in combinations(parents, 2):
            edges[(a, b)] = edges.get((a, b), 0) + 1
    return CoMentionGraph(nodes, edges, matches.corpus_id, matches.lexicon_version)


@dataclass
class CentralityResult:
    scores: dict[str, float]
    dominant_eigenvalue: float
    iterations: int
    residual: float


def eigenvector_centrality(
    graph: CoMentionGraph,
    tolerance: float = 1e-12,
    max_iterations: int = 100_000,
) -> CentralityResult:
    """Dominant eigenvector of the weighted adjacency, L2-normalized, entrywise >= 0.

    Power iteration runs on A + I (same eigenvectors, spectrum shifted positive)
    from a uniform start, stopping when successive normalized vectors differ by
    less than `tolerance` in the max norm. On a disconnected graph the mass ends
    up on the component with the largest eigenvalue; isolated nodes score 0.
    """
    if not graph.edges:
        raise DataError("graph has no edges")
    names = sorted(graph.nodes)
    index = {name: i for i, name in enumerate(names)}
    n = len(names)
    adjacency = np.zeros((n, n))
    for (a, b), w in graph.edges.items():
        adjacency[index[a], index[b]] = w
        adjacency[index[b], index[a]] = w

    x = np.full(n, 1.0 / np.sqrt(n))
    iterations = 0
    residual = np.inf
    for iterations in range(1, max_iterations + 1):
        y = adjacency @ x + x
        norm = np.linalg.norm(y)
        y /= norm
        residual = float(np.max(np.abs(y - x)))
        x = y
        if residual < tolerance:
            break
    else:
        raise DataError(
            f"centrality did not converge in {max_iterations} iterations "
            f"(residual {residual:.3e})"
        )

    x[x < x.max() * SCORE_FLOOR] = 0.0
    x /= np.linalg.norm(x)
    eigenvalue = float(x @ (adjacency @ x))
    return CentralityResult(
        scores={name: float(x[index[name]]) for name in names},
        dominant_eigenvalue=eigenvalue,
        iterations=iterations,
        residual=residual,
    )


@dataclass(frozen=True)
class RankedList:
    k: int
    items: tuple[tuple[int, str, float], ...]  # (rank, parent_term, score)

    @property
    def elements(self) -> tuple[str, ...]:
        return tuple(name for _, name, _ in self.items)

    def to_tsv(self) -> str:
        lines = ["rank\tparent_term\tscore"]
        for rank, name, score in self.items:
            lines.append(f"{rank}\t{name}\t{score:.6f}")
        return "\n".join(lines) + "\n"

    @staticmethod
    def from_tsv(text: str) -> "RankedList":
        lines = [l for l in text.splitlines() if l.strip()]
        if not lines or lines[0] != "rank\tparent_term\tscore":
            raise DataError("bad ranked list header")
        items = []
        for line in lines[1:]:
            rank, name, score = line.split("\t")
            items.append((int(rank), name, float(score)))
        return RankedList(len(items), tuple(items))


def top_k(result: CentralityResult, k: int) -> RankedList:
    """Top k positive-score nodes; ties broken by name so rankings are reproducible."""
    if k < 1:
        raise DataError("k must be >= 1")
    ranked = sorted(
        ((name, score) for name, score in result.scores.items() if score > 0),
        key=lambda ns: (-ns[1], ns[0]),
    )[:k]
    return RankedList(
        k, tuple((i + 1, name, score) for i, (name, score) in enumerate(ranked))
    )
