"""Dual-annotator labeling sessions, consensus, agreement, and false-positive rates."""

from __future__ import annotations

import json
import logging
from collections import Counter
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .corpus import AnnotationSample
from .errors import DataError
from .lexicon import Category, parse_category
from .tagger import MatchSet

log = logging.getLogger(__name__)


class Verdict(str, Enum):
    TRUE_POSITIVE = "TruePositive"
    FALSE_POSITIVE = "FalsePositive"
    UNCLEAR = "Unclear"


class Consensus(str, Enum):
    MATCH = "Match"
    MISMATCH = "Mismatch"
    UNCERTAIN = "Uncertain"


def _now_iso() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


@dataclass(frozen=True)
class Label:
    match_id: str
    annotator_id: str
    verdict: Verdict
    note: str = ""
    timestamp: str = ""

    def to_dict(self) -> dict:
        return {
            "match_id": self.match_id,
            "annotator_id": self.annotator_id,
            "verdict": self.verdict.value,
            "note": self.note,
            "timestamp": self.timestamp,
        }

    @staticmethod
    def from_dict(obj: dict) -> "Label":
        return Label(
            match_id=obj["match_id"],
            annotator_id=obj["annotator_id"],
            verdict=Verdict(obj["verdict"]),
            note=obj.get("note", ""),
            timestamp=obj.get("timestamp", ""),
        )


@dataclass(frozen=True)
class ConsensusRecord:
    match_id: str
    consensus: Consensus


def pair_consensus(a: Verdict, b: Verdict) -> Consensus:
    """Both TruePositive -> Match; both FalsePositive -> Mismatch; anything else Uncertain."""
    if a == b == Verdict.TRUE_POSITIVE:
        return Consensus.MATCH
    if a == b == Verdict.FALSE_POSITIVE:
        return Consensus.MISMATCH
    return Consensus.UNCERTAIN


class AnnotationSession:
    """Assignment of every sampled match to exactly two annotators, with blinding."""

    def __init__(
        self,
        session_id: str,
        sample_id: str,
        assignment: Mapping[str, tuple[str, str]],
    ):
        if not assignment:
            raise DataError("session needs at least one match")
        self.session_id = session_id
        self.sample_id = sample_id
        self.assignment: dict[str, tuple[str, str]] = dict(assignment)
        self.labels: dict[tuple[str, str], Label] = {}
        self.audit: list[Label] = []
        self.adjudications: dict[str, tuple[Consensus, str]] = {}

    @property
    def annotator_ids(self) -> list[str]:
        ids = set()
        for pair in self.assignment.values():
            ids.update(pair)
        return sorted(ids)

    @property
    def is_complete(self) -> bool:
        return all(
            (match_id, annotator) in self.labels
            for match_id, pair in self.assignment.items()
            for annotator in pair
        )

    @property
    def status(self) -> str:
        if self.adjudications:
            return "adjudicated"
        return "complete" if self.is_complete else "open"

    def workload(self) -> Counter:
        counts: Counter = Counter()
        for pair in self.assignment.values():
            counts.update(pair)
        return counts

    def record_label(self, label: Label) -> None:
        if self.is_complete:
            raise DataError(f"session {self.session_id} is closed")
        pair = self.assignment.get(label.match_id)
        if pair is None:
            raise DataError(f"unknown match {label.match_id!r}")
        if label.annotator_id not in pair:
            raise DataError(
                f"annotator {label.annotator_id!r} is not assigned to {label.match_id!r}"
            )
        stamped = label if label.timestamp else Label(
            label.match_id, label.annotator_id, label.verdict, label.note, _now_iso()
        )
        self.audit.append(stamped)
        self.labels[(label.match_id, label.annotator_id)] = stamped

    def pending_for(self, annotator_id: str) -> list[str]:
        return [
            match_id
            for match_id, pair in self.assignment.items()
            if annotator_id in pair and (match_id, annotator_id) not in self.labels
        ]

    def labels_of(self, annotator_id: str) -> list[Label]:
        """Only the caller's own labels; the co-annotator stays blinded until completion."""
        return [
            label
            for (match_id, aid), label in sorted(self.labels.items())
            if aid == annotator_id
        ]

    def verdict_pairs(self) -> list[tuple[str, Verdict, Verdict]]:
        if not self.is_complete:
            raise DataError("session is not complete")
        pairs = []
        for match_id in self.assignment:
            a1, a2 = self.assignment[match_id]
            pairs.append(
                (
                    match_id,
                    self.labels[(match_id, a1)].verdict,
                    self.labels[(match_id, a2)].verdict,
                )
            )
        return pairs

    def consensus(self) -> list[ConsensusRecord]:
        return [
            ConsensusRecord(match_id, pair_consensus(va, vb))
            for match_id, va, vb in self.verdict_pairs()
        ]

    def disagreements(self) -> list[str]:
        return [
            match_id
            for match_id, va, vb in self.verdict_pairs()
            if pair_consensus(va, vb) is Consensus.UNCERTAIN
        ]

    def adjudicate(self, match_id: str, consensus: Consensus, adjudicator_id: str) -> None:
        if not self.is_complete:
            raise DataError("cannot adjudicate an open session")
        if match_id not in self.assignment:
            raise DataError(f"unknown match {match_id!r}")
        self.adjudications[match_id] = (consensus, adjudicator_id)

    def effective_consensus(self) -> list[ConsensusRecord]:
        """Consensus with adjudicator overrides applied."""
        out = []
        for record in self.consensus():
            override = self.adjudications.get(record.match_id)
            out.append(
                ConsensusRecord(record.match_id, override[0]) if override else record
            )
        return out

    # -- persistence ---------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "session_id": self.session_id,
            "sample_id": self.sample_id,
            "assignment": {m: list(pair) for m, pair in self.assignment.items()},
            "labels": [l.to_dict() for l in self.audit],
            "adjudications": {
                m: {"consensus": c.value, "adjudicator_id": a}
                for m, (c, a) in self.adjudications.items()
            },
        }

    @staticmethod
    def from_dict(obj: dict) -> "AnnotationSession":
        session = AnnotationSession(
            obj["session_id"],
            obj["sample_id"],
            {m: tuple(pair) for m, pair in obj["assignment"].items()},
        )
        for label_obj in obj.get("labels", []):
            label = Label.from_dict(label_obj)
            session.audit.append(label)
            session.labels[(label.match_id, label.annotator_id)] = label
        for m, adj in obj.get("adjudications", {}).items():
            session.adjudications[m] = (Consensus(adj["consensus"]), adj["adjudicator_id"])
        return session


def create_session(
    sample: AnnotationSample,
    annotators: Sequence[str],
    seed: int = 0,
    session_id: str | None = None,
) -> AnnotationSession:
    """Assign each sampled match to exactly two annotators, balanced within +-1 task."""
    annotators = list(dict.fromkeys(annotators))
    if len(annotators) < 2:
        raise DataError("need at least two annotators")
    if not sample.match_ids:
        raise DataError("sample contains no matches")
    order = list(annotators)
    rng = np.random.Generator(np.random.PCG64(seed))
    rng.shuffle(order)
    priority = {a: i for i, a in enumerate(order)}
    load = {a: 0 for a in annotators}
    assignment: dict[str, tuple[str, str]] = {}
    for match_id in sample.match_ids:
        first, second = sorted(annotators, key=lambda a: (load[a], priority[a]))[:2]
        assignment[match_id] = (first, second)
        load[first] += 1
        load[second] += 1
    return AnnotationSession(
        session_id or f"session-{sample.sample_id}", sample.sample_id, assignment
    )


def cohen_kappa(
    labels_a: Sequence, labels_b: Sequence, classes: Sequence | None = None
) -> float:
    """Chance-corrected agreement between two label vectors."""
    if len(labels_a) != len(labels_b):
        raise DataError("label vectors differ in length")
    if not labels_a:
        raise DataError("empty label vectors")
    if classes is not None:
        allowed = set(classes)
        bad = [v for v in list(labels_a) + list(labels_b) if v not in allowed]
        if bad:
            raise DataError(f"labels outside class set: {sorted(set(map(str, bad)))}")
    n = len(labels_a)
    observed = sum(1 for a, b in zip(labels_a, labels_b) if a == b) / n
    count_a = Counter(labels_a)
    count_b = Counter(labels_b)
    expected = sum(count_a[c] * count_b[c] for c in count_a) / (n * n)
    if expected == 1.0:
        return 1.0
    return (observed - expected) / (1.0 - expected)


def kappa_from_table(table: Sequence[Sequence[int]]) -> float:
    """Cohen's kappa for a square contingency table (rows: rater A, cols: rater B)."""
    t = np.asarray(table, dtype=float)
    if t.ndim != 2 or t.shape[0] != t.shape[1]:
        raise DataError("contingency table must be square")
    n = t.sum()
    if n == 0:
        raise DataError("empty contingency table")
    observed = np.trace(t) / n
    expected = float(np.sum(t.sum(axis=1) * t.sum(axis=0)) / (n * n))
    if expected == 1.0:
        return 1.0
    return float((observed - expected) / (1.0 - expected))


@dataclass(frozen=True)
class FprRecord:
    child_term: str
    parent_term: str
    category: Category
    sample_frequency: int
    fp_count: int
    fpr: float
    corpus_frequency: int


@dataclass
class FprTable:
    rows: list[FprRecord]
    category_totals: dict[Category, tuple[int, int]] = field(default_factory=dict)
    parent_rows: list[FprRecord] = field(default_factory=list)

    def to_tsv(self) -> str:
        lines = [
            "child_term\tcategory\tparent_term\tsample_frequency\tfp_count\tfpr\tcorpus_frequency"
        ]
        for r in self.rows:
            lines.append(
                f"{r.child_term}\t{r.category.value}\t{r.parent_term}"
                f"\t{r.sample_frequency}\t{r.fp_count}\t{r.fpr:.6f}\t{r.corpus_frequency}"
            )
        return "\n".join(lines) + "\n"

    @staticmethod
    def from_tsv(text: str) -> "FprTable":
        lines = [l for l in text.splitlines() if l.strip()]
        if not lines or not lines[0].startswith("child_term\t"):
            raise DataError("bad FPR table header")
        rows = []
        for line in lines[1:]:
            cols = line.split("\t")
            if len(cols) != 7:
                raise DataError(f"bad FPR row: {line!r}")
            rows.append(
                FprRecord(
                    child_term=cols[0],
                    category=parse_category(cols[1]),
                    parent_term=cols[2],
                    sample_frequency=int(cols[3]),
                    fp_count=int(cols[4]),
                    fpr=float(cols[5]),
                    corpus_frequency=int(cols[6]),
                )
            )
        table = FprTable(rows)
        table._fill_totals()
        return table

    def _fill_totals(self) -> None:
        totals: dict[Category, tuple[int, int]] = {}
        for r in self.rows:
            fp, n = totals.get(r.category, (0, 0))
            totals[r.category] = (fp + r.fp_count, n + r.sample_frequency)
        self.category_totals = totals


def compute_fpr(
    consensus: Iterable[ConsensusRecord],
    matches: MatchSet,
    corpus_freqs: Mapping | None = None,
    strict: bool = False,
) -> FprTable:
    """Per-child-term false-positive rates over the annotated sample.

    Mismatch and Uncertain consensus both count as false positives; `strict=True`
    counts Mismatch only (sensitivity mode).
    """
    by_id = {m.match_id: m for m in matches.matches}
    freqs = corpus_freqs if corpus_freqs is not None else matches.child_frequencies
    negative = {Consensus.MISMATCH} if strict else {Consensus.MISMATCH, Consensus.UNCERTAIN}

    sample_n: Counter = Counter()
    fp_n: Counter = Counter()
    parents: dict[tuple[str, Category], str] = {}
    for record in consensus:
        match = by_id.get(record.match_id)
        if match is None:
            raise DataError(f"consensus references unknown match {record.match_id!r}")
        key = (match.child_term, match.category)
        parents[key] = match.parent_term
        sample_n[key] += 1
        if record.consensus in negative:
            fp_n[key] += 1

    rows = []
    for (child, category), n in sorted(
        sample_n.items(), key=lambda kv: (-kv[1], kv[0][0], kv[0][1].value)
    ):
        fp = fp_n[(child, category)]
        rows.append(
            FprRecord(
                child_term=child,
                parent_term=parents[(child, category)],
                category=category,
                sample_frequency=n,
                fp_count=fp,
                fpr=fp / n,
                corpus_frequency=int(freqs.get((child, category), 0)),
            )
        )
    table = FprTable(rows)
    table._fill_totals()

    # aggregate view per parent term, used by the rate-vs-frequency chart
    parent_n: Counter = Counter()
    parent_fp: Counter = Counter()
    parent_corpus: Counter = Counter()
    for r in rows:
        key = (r.parent_term, r.category)
        parent_n[key] += r.sample_frequency
        parent_fp[key] += r.fp_count
        parent_corpus[key] += r.corpus_frequency
    table.parent_rows = [
        FprRecord(
            child_term=parent,
            parent_term=parent,
            category=category,
            sample_frequency=parent_n[(parent, category)],
            fp_count=parent_fp[(parent, category)],
            fpr=parent_fp[(parent, category)] / parent_n[(parent, category)],
            corpus_frequency=parent_corpus[(parent, category)],
        )
        for (parent, category) in sorted(parent_n, key=lambda k: (-parent_n[k], k[0]))
    ]
    return table


def select_removable(
    table: FprTable, fpr_min: float = 0.5, freq_min: int = 20
) -> list[tuple[str, Category]]:
    """Child terms with fpr >= fpr_min and sample frequency >= freq_min, most frequent first."""
    if not table.rows:
        raise DataError("empty FPR table")
    picked = [
        r for r in table.rows if r.fpr >= fpr_min and r.sample_frequency >= freq_min
    ]
    picked.sort(key=lambda r: (-r.sample_frequency, -r.fpr, r.child_term))
    return [(r.child_term, r.category) for r in picked]


def save_labels(labels: Iterable[Label], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for label in labels:
            f.write(json.dumps(label.to_dict(), sort_keys=True) + "\n")


def load_labels(path: str | Path) -> list[Label]:
    out = []
    with open(path, encoding="utf-8") as f:
        for line in f:
            if line.strip():
                out.append(Label.from_dict(json.loads(line)))
    return out
