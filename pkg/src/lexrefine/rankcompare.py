"""Top-k ranking comparison: common elements ratio, Fagin's generalized Kendall
distance, and the random-removal null model.

Fagin's distance sums penalties over unordered pairs drawn from the union of
two top-k lists: an inversion between elements both lists rank costs 1; a pair
where the list lacking one element contradicts the other list's order costs 1;
a pair split across the lists costs 1; a pair known to only one list costs the
penalty parameter p.
"""

from __future__ import annotations

import json
import logging
from bisect import bisect_right
from dataclasses import dataclass, field
from math import comb
from typing import Callable, Sequence

import numpy as np

from .annotation import FprTable
from .errors import DataError
from .lexicon import Category
from .network import (
    CentralityResult,
    RankedList,
    build_network,
    eigenvector_centrality,
    top_k,
)
from .tagger import MatchSet, filter_matches

log = logging.getLogger(__name__)

DEFAULT_PENALTY = 0.5
DEFAULT_K_VALUES = (10, 20, 50, 100, 200, 500)


def _elements(ranking) -> list[str]:
    if isinstance(ranking, RankedList):
        return list(ranking.elements)
    return list(ranking)


def _validate_pair(a: list, b: list) -> None:
    if len(set(a)) != len(a) or len(set(b)) != len(b):
        raise DataError("ranked lists must not contain duplicate elements")
    if len(a) != len(b):
        raise DataError(f"top-k lists differ in length ({len(a)} vs {len(b)})")
    if not a:
        raise DataError("empty ranked lists")


def common_elements_ratio(list_a, list_b) -> float:
    """|elements(a) & elements(b)| / k."""
    a, b = _elements(list_a), _elements(list_b)
    _validate_pair(a, b)
    return len(set(a) & set(b)) / len(a)


def _count_inversions(seq: Sequence[int]) -> int:
    """Mergesort inversion count."""
    n = len(seq)
    if n < 2:
        return 0
    work = list(seq)
    buf = [0] * n
    count = 0
    width = 1
    while width < n:
        for lo in range(0, n, 2 * width):
            mid = min(lo + width, n)
            hi = min(lo + 2 * width, n)
            i, j, k = lo, mid, lo
            while i < mid and j < hi:
                if work[i] <= work[j]:
                    buf[k] = work[i]
                    i += 1
                else:
                    buf[k] = work[j]
                    j += 1
                    count += mid - i
                k += 1
            buf[k:hi] = work[i:mid] if i < mid else work[j:hi]
            work[lo:hi] = buf[lo:hi]
        width *= 2
    return count


def fagin_k(list_a, list_b, p: float = DEFAULT_PENALTY) -> float:
    """Fagin's generalized Kendall distance between two equal-k top lists."""
    if not 0.0 <= p <= 1.0:
        raise DataError("penalty p must lie in [0, 1]")
    a, b = _elements(list_a), _elements(list_b)
    _validate_pair(a, b)
    k = len(a)
    pos_a = {e: i for i, e in enumerate(a)}
    pos_b = {e: i for i, e in enumerate(b)}
    common = [e for e in a if e in pos_b]
    z = len(common)
    absent = k - z

    # pairs split across the lists, and pairs confined to a single list
    distance = float(absent * absent) + p * absent * (absent - 1)

    # both elements shared: count order inversions
    common_by_a = sorted(common, key=lambda e: pos_a[e])
    distance += _count_inversions([pos_b[e] for e in common_by_a])

    # one element shared, the other known to one list only: the list holding both
    # must rank the shared element first, else the missing element contradicts it
    for pos, only in ((pos_a, set(a) - set(common)), (pos_b, set(b) - set(common))):
        shared_positions = sorted(pos[e] for e in common)
        for e in only:
            distance += len(shared_positions) - bisect_right(shared_positions, pos[e])
    return distance


def max_fagin_distance(k: int, z: int) -> int:
    """Worst-case distance for list length k sharing z elements: all union pairs at 1."""
    return comb(2 * k - z, 2)


def normalized_fagin_k(list_a, list_b, p: float = DEFAULT_PENALTY) -> float:
    """fagin_k scaled into [0, 1] by the worst case for the observed overlap."""
    a, b = _elements(list_a), _elements(list_b)
    distance = fagin_k(a, b, p)
    z = len(set(a) & set(b))
    ceiling = max_fagin_distance(len(a), z)
    if ceiling == 0:
        if distance == 0:
            return 0.0
        raise DataError("degenerate k=1 identical lists with nonzero distance")
    return distance / ceiling


@dataclass
class KComparison:
    k: int
    effective_k: int
    K_refined: float
    mean_K_random: float
    std_K_random: float
    p_value: float
    cer_refined: float
    mean_cer_random: float


@dataclass
class NullModelReport:
    n_samples: int
    sample_size: int
    seed: int
    freq_floor: int
    candidate_pool_size: int
    penalty: float
    k_values: tuple[int, ...]
    comparisons: list[KComparison] = field(default_factory=list)
    draws: list[list[tuple[str, str]]] | None = None  # kept only when recording is on

    def to_json(self) -> str:
        return json.dumps(
            {
                "n_samples": self.n_samples,
                "sample_size": self.sample_size,
                "seed": self.seed,
                "freq_floor": self.freq_floor,
                "candidate_pool_size": self.candidate_pool_size,
                "penalty": self.penalty,
                "k_values": list(self.k_values),
                "comparisons": [c.__dict__ for c in self.comparisons],
            },
            sort_keys=True,
            indent=2,
        ) + "\n"

    def to_tsv(self) -> str:
        lines = ["k\tK_refined\tK_random_mean\tK_random_std\tp_value"]
        for c in self.comparisons:
            lines.append(
                f"{c.k}\t{c.K_refined:g}\t{c.mean_K_random:.1f}"
                f"\t{c.std_K_random:.1f}\t{c.p_value:.3f}"
            )
        return "\n".join(lines) + "\n"


def _ranking(matches: MatchSet) -> CentralityResult:
    graph = build_network(matches)
    return eigenvector_centrality(graph)


def _paired_topk(result_a, result_b, k: int) -> tuple[RankedList, RankedList, int]:
    """Truncate both rankings to a common usable length <= k."""
    list_a = top_k(result_a, k)
    list_b = top_k(result_b, k)
    k_eff = min(len(list_a.items), len(list_b.items))
    if k_eff < k:
        log.warning("top-%d requested but only %d comparable ranks exist", k, k_eff)
    return (
        RankedList(k_eff, list_a.items[:k_eff]),
        RankedList(k_eff, list_b.items[:k_eff]),
        k_eff,
    )


def candidate_pool(
    fpr_table: FprTable,
    selected: Sequence[tuple[str, Category]],
    fpr_cap: float = 0.5,
    freq_floor: int | None = None,
) -> tuple[list[tuple[str, Category]], int]:
    """Annotated terms with fpr below the cap and corpus frequency at/above the floor.

    The floor defaults to the smallest corpus frequency among the selected terms.
    """
    chosen = set(selected)
    by_key = {(r.child_term, r.category): r for r in fpr_table.rows}
    if freq_floor is None:
        selected_rows = [by_key[key] for key in chosen if key in by_key]
        freq_floor = (
            min(r.corpus_frequency for r in selected_rows) if selected_rows else 0
        )
    pool = [
        (r.child_term, r.category)
        for r in fpr_table.rows
        if r.fpr < fpr_cap
        and r.corpus_frequency >= freq_floor
        and (r.child_term, r.category) not in chosen
    ]
    pool.sort(key=lambda key: (-by_key[key].corpus_frequency, key[0], key[1].value))
    return pool, freq_floor


def run_null_model(
    matches: MatchSet,
    fpr_table: FprTable,
    selected: Sequence[tuple[str, Category]],
    n_samples: int = 1000,
    sample_size: int = 8,
    freq_floor: int | None = None,
    seed: int = 0,
    k_values: Sequence[int] = DEFAULT_K_VALUES,
    penalty: float = DEFAULT_PENALTY,
    rebuild: Callable[[Sequence[tuple[str, Category]]], MatchSet] | None = None,
    record_draws: bool = False,
) -> NullModelReport:
    """Compare the refinement's rank impact against random same-frequency removals.

    Each of `n_samples` draws removes `sample_size` low-FPR terms from the candidate
    pool, rebuilds the network, and measures Fagin's K and the common elements ratio
    against the baseline ranking. Removal rebuilds filter the match set in place;
    pass `rebuild` (e.g. a re-tagging closure) for the exact mode. Sample i draws
    from its own PRNG substream (seed, i) so results never depend on scheduling.
    """
    if not k_values:
        raise DataError("k_values must be non-empty")
    pool, floor = candidate_pool(fpr_table, selected, freq_floor=freq_floor)
    if len(pool) < sample_size:
        raise DataError(
            f"candidate pool has {len(pool)} terms; {sample_size} needed"
        )
    if rebuild is None:
        rebuild = lambda removed: filter_matches(matches, removed)

    base = _ranking(matches)
    refined = _ranking(rebuild(selected)) if selected else base

    report = NullModelReport(
        n_samples=n_samples,
        sample_size=sample_size,
        seed=seed,
        freq_floor=floor,
        candidate_pool_size=len(pool),
        penalty=penalty,
        k_values=tuple(k_values),
    )

    refined_stats = {}
    for k in k_values:
        base_list, refined_list, k_eff = _paired_topk(base, refined, k)
        refined_stats[k] = (
            fagin_k(base_list, refined_list, penalty),
            common_elements_ratio(base_list, refined_list),
            k_eff,
        )

    if record_draws:
        report.draws = []
    k_random: dict[int, list[float]] = {k: [] for k in k_values}
    cer_random: dict[int, list[float]] = {k: [] for k in k_values}
    for i in range(n_samples):
        rng = np.random.default_rng([seed, i])
        draw = rng.choice(len(pool), size=sample_size, replace=False)
        removed = [pool[j] for j in sorted(draw)]
        if report.draws is not None:
            report.draws.append([(child, cat.value) for child, cat in removed])
        sampled = _ranking(rebuild(removed))
        for k in k_values:
            base_list, sample_list, _ = _paired_topk(base, sampled, k)
            k_random[k].append(fagin_k(base_list, sample_list, penalty))
            cer_random[k].append(common_elements_ratio(base_list, sample_list))

    for k in k_values:
        K_refined, cer_refined, k_eff = refined_stats[k]
        randoms = np.array(k_random[k])
        report.comparisons.append(
            KComparison(
                k=k,
                effective_k=k_eff,
                K_refined=K_refined,
                mean_K_random=float(randoms.mean()),
                std_K_random=float(randoms.std()),
                p_value=float(np.mean(randoms >= K_refined)),
                cer_refined=cer_refined,
                mean_cer_random=float(np.mean(cer_random[k])),
            )
        )
    return report


def matchset_discrepancy(filtered: MatchSet, retagged: MatchSet) -> dict:
    """Count how far filtering a match set strays from an exact re-tag."""
    f = {(m.post_id, m.start, m.end, m.category, m.child_term) for m in filtered.matches}
    r = {(m.post_id, m.start, m.end, m.category, m.child_term) for m in retagged.matches}
    return {
        "filtered_total": len(f),
        "retagged_total": len(r),
        "missing_from_filtered": len(r - f),
        "extra_in_filtered": len(f - r),
    }
