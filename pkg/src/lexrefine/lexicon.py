"""Parent/child term dictionary: loading, common-word filtering, and refinement.

Every surface form (child term) maps to a canonical parent term within one of
four categories. Parents are themselves included as child terms, so resolving
the parent surface works like any other synonym. Refinement removes individual
child terms; sibling synonyms and the parent node label survive.
"""

from __future__ import annotations

import hashlib
import json
import logging
import re
import unicodedata
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

from .errors import DataError

log = logging.getLogger(__name__)

DEFAULT_COMMON_WORD_THRESHOLD = 50.0  # occurrences per million tokens

_WS = re.compile(r"\s+")


class Category(str, Enum):
    ALLERGEN = "Allergen"
    DRUG = "Drug"
    MEDICAL_TERM = "MedicalTerm"
    NATURAL_PRODUCT = "NaturalProduct"

    @property
    def display(self) -> str:
        """Human-readable form, e.g. 'Medical Term'."""
        return {
            Category.ALLERGEN: "Allergen",
            Category.DRUG: "Drug",
            Category.MEDICAL_TERM: "Medical Term",
            Category.NATURAL_PRODUCT: "Natural Product",
        }[self]


def parse_category(token: str) -> Category:
    try:
        return Category(token)
    except ValueError:
        raise DataError(
            f"unknown category {token!r}; expected one of "
            + ", ".join(c.value for c in Category)
        ) from None


def normalize_term(surface: str) -> str:
    """Canonical surface form: NFKC, lower-case, '#' stripped, whitespace collapsed."""
    s = unicodedata.normalize("NFKC", surface).lower()
    s = _WS.sub(" ", s).strip()
    if s.startswith("#"):
        s = s[1:].strip()
    return s


@dataclass(frozen=True)
class LexiconEntry:
    child_term: str
    parent_term: str
    category: Category
    source: str
    entry_id: str


@dataclass(frozen=True)
class RemovalEvent:
    child_term: str
    category: Category
    reason: str
    timestamp: str

    def to_json(self) -> str:
        return json.dumps(
            {
                "child_term": self.child_term,
                "category": self.category.value,
                "reason": self.reason,
                "timestamp": self.timestamp,
            },
            sort_keys=True,
        )

    @staticmethod
    def from_json(line: str) -> "RemovalEvent":
        obj = json.loads(line)
        return RemovalEvent(
            child_term=obj["child_term"],
            category=parse_category(obj["category"]),
            reason=obj["reason"],
            timestamp=obj["timestamp"],
        )


@dataclass(frozen=True)
class WordFrequencyList:
    """Token -> frequency (count per million tokens) reference list."""

    frequencies: dict[str, float]

    def get(self, token: str) -> float:
        # absent means rare
        return self.frequencies.get(token, 0.0)


def _entry_id(child: str, category: Category) -> str:
    return f"{category.value}:{child}"


def _now_iso() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


class Lexicon:
    """Immutable dictionary of child->parent mappings; mutations return new values."""

    def __init__(
        self,
        entries: Iterable[LexiconEntry],
        removal_ledger: Sequence[RemovalEvent] = (),
    ):
        self._by_child: dict[tuple[str, Category], LexiconEntry] = {}
        self._children_of: dict[tuple[str, Category], set[str]] = {}
        for e in entries:
            key = (e.child_term, e.category)
            if key in self._by_child:
                prev = self._by_child[key]
                if prev.parent_term == e.parent_term:
                    raise DataError(
                        f"duplicate entry ({e.child_term!r}, {e.parent_term!r}, {e.category.value})"
                    )
                raise DataError(
                    f"conflicting parents for child {e.child_term!r} in {e.category.value}: "
                    f"{prev.parent_term!r} vs {e.parent_term!r}"
                )
            self._by_child[key] = e
            self._children_of.setdefault((e.parent_term, e.category), set()).add(
                e.child_term
            )
        self.removal_ledger: tuple[RemovalEvent, ...] = tuple(removal_ledger)
        self.version = self._content_hash()

    # -- introspection -------------------------------------------------------

    def __len__(self) -> int:
        return len(self._by_child)

    def __contains__(self, key: tuple[str, Category]) -> bool:
        return key in self._by_child

    @property
    def entries(self) -> list[LexiconEntry]:
        return sorted(
            self._by_child.values(), key=lambda e: (e.category.value, e.child_term)
        )

    def category_counts(self) -> dict[Category, int]:
        counts = {c: 0 for c in Category}
        for (_, cat) in self._by_child:
            counts[cat] += 1
        return counts

    def parents(self) -> set[tuple[str, Category]]:
        return set(self._children_of)

    def children_of(self, parent_term: str, category: Category) -> set[str]:
        return set(self._children_of.get((parent_term, category), ()))

    def resolve(self, surface: str) -> list[LexiconEntry]:
        """All entries whose child term equals the (already normalized) surface."""
        return sorted(
            (
                self._by_child[(surface, cat)]
                for cat in Category
                if (surface, cat) in self._by_child
            ),
            key=lambda e: e.category.value,
        )

    def _content_hash(self) -> str:
        h = hashlib.sha256()
        for e in self.entries:
            h.update(
                f"{e.child_term}\t{e.parent_term}\t{e.category.value}\t{e.source}\n".encode()
            )
        return h.hexdigest()[:12]

    # -- refinement ----------------------------------------------------------

    def filter_common_words(
        self,
        freq_list: WordFrequencyList,
        threshold: float = DEFAULT_COMMON_WORD_THRESHOLD,
    ) -> "Lexicon":
        """Drop single-token child terms at or above `threshold` per-million frequency.

        Multi-word children are untouched. Parents that lose their last child are
        reported (they remain usable as node labels downstream).
        """
        if threshold <= 0:
            raise DataError("common-word threshold must be > 0")
        timestamp = _now_iso()
        doomed = [
            e
            for e in self.entries
            if " " not in e.child_term and freq_list.get(e.child_term) >= threshold
        ]
        events = [
            RemovalEvent(e.child_term, e.category, "common-word", timestamp)
            for e in doomed
        ]
        return self._without(doomed, events)

    def remove_terms(
        self,
        child_terms: Iterable[tuple[str, Category]],
        with_synonyms: bool = False,
        reason: str = "refinement",
    ) -> "Lexicon":
        """Remove the named (child, category) entries; siblings and parent labels survive.

        `with_synonyms=True` expands each pair to the full synonym cluster of its
        parent (not used for reproducing the published refinement).
        """
        timestamp = _now_iso()
        doomed: dict[tuple[str, Category], LexiconEntry] = {}
        for child, category in child_terms:
            entry = self._by_child.get((child, category))
            if entry is None:
                raise DataError(f"unknown child term ({child!r}, {category.value})")
            doomed[(child, category)] = entry
            if with_synonyms:
                for sibling in self.children_of(entry.parent_term, category):
                    doomed[(sibling, category)] = self._by_child[(sibling, category)]
        events = [
            RemovalEvent(e.child_term, e.category, reason, timestamp)
            for e in sorted(
                doomed.values(), key=lambda e: (e.category.value, e.child_term)
            )
        ]
        return self._without(list(doomed.values()), events)

    def _without(
        self, doomed: Sequence[LexiconEntry], events: Sequence[RemovalEvent]
    ) -> "Lexicon":
        gone = {(e.child_term, e.category) for e in doomed}
        kept = [e for e in self._by_child.values() if (e.child_term, e.category) not in gone]
        orphaned = [
            (parent, cat)
            for (parent, cat), children in self._children_of.items()
            if all((child, cat) in gone for child in children)
        ]
        for parent, cat in orphaned:
            log.warning(
                "parent %r (%s) lost all child terms; it remains a valid node label",
                parent,
                cat.value,
            )
        return Lexicon(kept, tuple(self.removal_ledger) + tuple(events))

    # -- serialization -------------------------------------------------------

    def to_tsv(self) -> str:
        lines = ["child_term\tparent_term\tcategory\tsource"]
        for e in self.entries:
            lines.append(
                f"{e.child_term}\t{e.parent_term}\t{e.category.value}\t{e.source}"
            )
        return "\n".join(lines) + "\n"

    def save(self, path: str | Path, ledger_path: str | Path | None = None) -> None:
        Path(path).write_text(self.to_tsv(), encoding="utf-8")
        if ledger_path is not None:
            with open(ledger_path, "w", encoding="utf-8") as f:
                for event in self.removal_ledger:
                    f.write(event.to_json() + "\n")


def build_lexicon(
    rows: Iterable[tuple[str, str, Category | str, str]],
    add_parent_self_entries: bool = True,
) -> Lexicon:
    """Build a lexicon from (child, parent, category, source) rows.

    Terms are normalized; each parent is added as its own child when absent.
    """
    entries: list[LexiconEntry] = []
    seen: set[tuple[str, str, Category]] = set()
    parents: dict[tuple[str, Category], str] = {}
    for child, parent, category, source in rows:
        cat = category if isinstance(category, Category) else parse_category(category)
        child_n = normalize_term(child)
        parent_n = normalize_term(parent)
        if not child_n:
            raise DataError(f"empty child term after normalization: {child!r}")
        if not parent_n:
            raise DataError(f"empty parent term after normalization: {parent!r}")
        triple = (child_n, parent_n, cat)
        if triple in seen:
            raise DataError(f"duplicate entry ({child_n!r}, {parent_n!r}, {cat.value})")
        seen.add(triple)
        entries.append(
            LexiconEntry(child_n, parent_n, cat, source, _entry_id(child_n, cat))
        )
        parents.setdefault((parent_n, cat), source)
    if add_parent_self_entries:
        have = {(e.child_term, e.category) for e in entries}
        for (parent, cat), source in sorted(parents.items(), key=lambda kv: (kv[0][1].value, kv[0][0])):
            if (parent, cat) not in have:
                entries.append(
                    LexiconEntry(parent, parent, cat, source, _entry_id(parent, cat))
                )
    lexicon = Lexicon(entries)
    counts = lexicon.category_counts()
    log.info(
        "lexicon built: %d entries (%s)",
        len(lexicon),
        ", ".join(f"{c.value}={n}" for c, n in counts.items()),
    )
    return lexicon


def load_lexicon(path: str | Path) -> Lexicon:
    """Load a TSV lexicon with header child_term/parent_term/category/source."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read lexicon {path}: {exc}") from exc
    lines = text.splitlines()
    if not lines:
        raise DataError(f"empty lexicon file {path}")
    header = lines[0].split("\t")
    if header[:4] != ["child_term", "parent_term", "category", "source"]:
        raise DataError(f"bad lexicon header in {path}: {lines[0]!r}")
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        cols = line.split("\t")
        if len(cols) < 3:
            raise DataError(f"{path}:{lineno}: expected >= 3 tab-separated columns")
        source = cols[3] if len(cols) > 3 else ""
        try:
            rows.append((cols[0], cols[1], parse_category(cols[2]), source))
        except DataError as exc:
            raise DataError(f"{path}:{lineno}: {exc}") from None
    if not rows:
        raise DataError(f"lexicon file {path} contains no entries")
    return build_lexicon(rows)


def load_word_frequencies(path: str | Path) -> WordFrequencyList:
    """Load a TSV of token<TAB>count-per-million rows (header optional)."""
    freqs: dict[str, float] = {}
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            cols = line.split("\t")
            if lineno == 1 and cols[0].lower() in ("token", "word"):
                continue
            if len(cols) < 2:
                raise DataError(f"{path}:{lineno}: expected token<TAB>frequency")
            token = normalize_term(cols[0])
            try:
                value = float(cols[1])
            except ValueError:
                raise DataError(f"{path}:{lineno}: bad frequency {cols[1]!r}") from None
            if value < 0:
                raise DataError(f"{path}:{lineno}: negative frequency")
            if token in freqs:
                raise DataError(f"{path}:{lineno}: duplicate token {token!r}")
            freqs[token] = value
    return WordFrequencyList(freqs)


def apply_ledger(original: Lexicon, events: Sequence[RemovalEvent]) -> Lexicon:
    """Replay removal events against the original lexicon, reproducing the refined one."""
    lexicon = original
    for event in events:
        entry = lexicon._by_child.get((event.child_term, event.category))
        if entry is None:
            raise DataError(
                f"ledger replay: unknown child ({event.child_term!r}, {event.category.value})"
            )
        lexicon = lexicon._without([entry], [event])
    return lexicon


def load_ledger(path: str | Path) -> list[RemovalEvent]:
    events = []
    with open(path, encoding="utf-8") as f:
        for line in f:
            if line.strip():
                events.append(RemovalEvent.from_json(line))
    return events
