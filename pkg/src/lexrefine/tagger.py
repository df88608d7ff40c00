"""Token-sequence dictionary matching over posts.

Matching is token based, so a child term never fires inside a longer word
("hot" does not match "shotgun"). Within one category the leftmost-longest
non-overlapping match wins; matches of different categories may overlap.
"""

from __future__ import annotations

import logging
import re
import unicodedata
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence, TYPE_CHECKING

from .errors import DataError
from .lexicon import Category, Lexicon, LexiconEntry, normalize_term, parse_category

if TYPE_CHECKING:
    from .corpus import Corpus, Post

log = logging.getLogger(__name__)

_APOSTROPHES = {"'", "’"}
_HYPHEN = "-"

# ASCII fast path: same token rule as the general scan, compiled to C
_ASCII_WORD = re.compile(r"[0-9A-Za-z]+(?:['\-][0-9A-Za-z]+)*")

# per-character word-class cache; ASCII preseeded, the rest filled on demand
_WORD_CHAR: dict[str, bool] = {
    chr(c): (chr(c).isalnum()) for c in range(128)
}


@dataclass(frozen=True)
class Token:
    surface: str  # normalized
    start: int  # byte offset into the raw text (hashtag '#' excluded)
    end: int
    was_hashtag: bool
    char_start: int = 0
    char_end: int = 0


def _is_word_char(ch: str) -> bool:
    cached = _WORD_CHAR.get(ch)
    if cached is None:
        cached = unicodedata.category(ch)[0] in ("L", "N", "M")
        _WORD_CHAR[ch] = cached
    return cached


def tokenize(text: str) -> list[Token]:
    """Split on whitespace/punctuation, keeping intra-word apostrophes and hyphens."""
    if text.isascii():  # byte offsets equal character offsets
        return [
            Token(
                surface=m.group().lower(),
                start=m.start(),
                end=m.end(),
                was_hashtag=m.start() > 0 and text[m.start() - 1] == "#",
                char_start=m.start(),
                char_end=m.end(),
            )
            for m in _ASCII_WORD.finditer(text)
        ]

    byte_at = [0] * (len(text) + 1)
    for i, ch in enumerate(text):
        byte_at[i + 1] = byte_at[i] + len(ch.encode("utf-8"))

    tokens: list[Token] = []
    n = len(text)
    i = 0
    while i < n:
        ch = text[i]
        hashtag = False
        if ch == "#" and i + 1 < n and _is_word_char(text[i + 1]):
            hashtag = True
            i += 1
            ch = text[i]
        if not _is_word_char(ch):
            i += 1
            continue
        start = i
        i += 1
        while i < n:
            c = text[i]
            if _is_word_char(c):
                i += 1
            elif (
                (c in _APOSTROPHES or c == _HYPHEN)
                and i + 1 < n
                and _is_word_char(text[i + 1])
            ):
                i += 2
            else:
                break
        surface = normalize_term(text[start:i])
        if surface:
            tokens.append(
                Token(
                    surface=surface,
                    start=byte_at[start],
                    end=byte_at[i],
                    was_hashtag=hashtag,
                    char_start=start,
                    char_end=i,
                )
            )
    return tokens


@dataclass(frozen=True)
class TermMatch:
    match_id: str
    post_id: str
    child_term: str
    parent_term: str
    category: Category
    start: int  # byte offsets into the raw post text
    end: int
    sample_of: str | None = None

    def to_dict(self) -> dict:
        d = {
            "match_id": self.match_id,
            "post_id": self.post_id,
            "child_term": self.child_term,
            "parent_term": self.parent_term,
            "category": self.category.value,
            "start": self.start,
            "end": self.end,
        }
        if self.sample_of is not None:
            d["sample_of"] = self.sample_of
        return d

    @staticmethod
    def from_dict(obj: dict) -> "TermMatch":
        return TermMatch(
            match_id=obj["match_id"],
            post_id=obj["post_id"],
            child_term=obj["child_term"],
            parent_term=obj["parent_term"],
            category=parse_category(obj["category"]),
            start=int(obj["start"]),
            end=int(obj["end"]),
            sample_of=obj.get("sample_of"),
        )


@dataclass
class MatchSet:
    corpus_id: str
    lexicon_version: str
    matches: list[TermMatch]
    child_frequencies: Counter = field(default_factory=Counter)  # (child, category) -> n
    parent_frequencies: Counter = field(default_factory=Counter)  # (parent, category) -> n

    @property
    def total_matches(self) -> int:
        return len(self.matches)

    def by_post(self) -> dict[str, list[TermMatch]]:
        grouped: dict[str, list[TermMatch]] = {}
        for m in self.matches:
            grouped.setdefault(m.post_id, []).append(m)
        return grouped

    def save(self, path: str | Path) -> None:
        import json

        with open(path, "w", encoding="utf-8") as f:
            for m in self.matches:
                f.write(json.dumps(m.to_dict(), sort_keys=True) + "\n")

    @staticmethod
    def load(path: str | Path, corpus_id: str = "", lexicon_version: str = "") -> "MatchSet":
        import json

        matches = []
        with open(path, encoding="utf-8") as f:
            for line in f:
                if line.strip():
                    matches.append(TermMatch.from_dict(json.loads(line)))
        ms = MatchSet(corpus_id, lexicon_version, matches)
        for m in matches:
            ms.child_frequencies[(m.child_term, m.category)] += 1
            ms.parent_frequencies[(m.parent_term, m.category)] += 1
        return ms

    def save_frequencies(self, path: str | Path, level: str = "child") -> None:
        counter = self.child_frequencies if level == "child" else self.parent_frequencies
        lines = ["term\tcategory\tcount"]
        for (term, category), count in sorted(
            counter.items(), key=lambda kv: (-kv[1], kv[0][0], kv[0][1].value)
        ):
            lines.append(f"{term}\t{category.value}\t{count}")
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


class Matcher:
    """Immutable multi-pattern matcher over all child terms of a lexicon."""

    def __init__(self, lexicon: Lexicon):
        if len(lexicon) == 0:
            raise DataError("cannot build a matcher from an empty lexicon")
        self.lexicon_version = lexicon.version
        # first token -> patterns sharing it, longest first
        self._index: dict[str, list[tuple[tuple[str, ...], LexiconEntry]]] = {}
        self.max_pattern_len = 1
        for entry in lexicon.entries:
            pattern = tuple(t.surface for t in tokenize(entry.child_term))
            if not pattern:
                continue
            self.max_pattern_len = max(self.max_pattern_len, len(pattern))
            self._index.setdefault(pattern[0], []).append((pattern, entry))
        for bucket in self._index.values():
            bucket.sort(key=lambda pe: (-len(pe[0]), pe[1].category.value))
        log.info(
            "matcher built: %d first-token buckets, longest pattern %d tokens",
            len(self._index),
            self.max_pattern_len,
        )

    def candidates(
        self, text: str, tokens: Sequence[Token]
    ) -> list[tuple[int, int, LexiconEntry]]:
        """All (token_start, token_end, entry) pattern hits, before overlap resolution."""
        hits = []
        n = len(tokens)
        for i in range(n):
            bucket = self._index.get(tokens[i].surface)
            if not bucket:
                continue
            for pattern, entry in bucket:
                j = i + len(pattern)
                if j > n:
                    continue
                if all(tokens[i + k].surface == pattern[k] for k in range(1, len(pattern))):
                    span = text[tokens[i].char_start : tokens[j - 1].char_end]
                    if normalize_term(span) == entry.child_term:
                        hits.append((i, j, entry))
        return hits


def _select_leftmost_longest(
    candidates: list[tuple[int, int, LexiconEntry]]
) -> list[tuple[int, int, LexiconEntry]]:
    """Per category, greedily keep leftmost-longest non-overlapping hits."""
    selected = []
    by_category: dict[Category, list[tuple[int, int, LexiconEntry]]] = {}
    for hit in candidates:
        by_category.setdefault(hit[2].category, []).append(hit)
    for category in sorted(by_category, key=lambda c: c.value):
        hits = sorted(by_category[category], key=lambda h: (h[0], -(h[1] - h[0])))
        cursor = 0
        for i, j, entry in hits:
            if i >= cursor:
                selected.append((i, j, entry))
                cursor = j
    return selected


def tag_post(matcher: Matcher, post: "Post") -> list[TermMatch]:
    """Tag one post; returns matches sorted by span then category."""
    tokens = tokenize(post.text)
    if not tokens:
        return []
    chosen = _select_leftmost_longest(matcher.candidates(post.text, tokens))
    matches = []
    for i, j, entry in chosen:
        start, end = tokens[i].start, tokens[j - 1].end
        matches.append(
            TermMatch(
                match_id=f"{post.post_id}:{start}:{end}:{entry.category.value}",
                post_id=post.post_id,
                child_term=entry.child_term,
                parent_term=entry.parent_term,
                category=entry.category,
                start=start,
                end=end,
            )
        )
    matches.sort(key=lambda m: (m.start, m.end, m.category.value))
    return matches


def tag_corpus(matcher: Matcher, corpus: "Corpus") -> MatchSet:
    """Tag all posts in post order, accumulating child/parent frequency tables."""
    result = MatchSet(corpus.corpus_id, matcher.lexicon_version, [])
    for post in corpus.posts:
        for m in tag_post(matcher, post):
            result.matches.append(m)
            result.child_frequencies[(m.child_term, m.category)] += 1
            result.parent_frequencies[(m.parent_term, m.category)] += 1
    log.info(
        "tagged corpus %s: %d matches over %d posts",
        corpus.corpus_id,
        result.total_matches,
        len(corpus.posts),
    )
    return result


def build_matcher(lexicon: Lexicon) -> Matcher:
    return Matcher(lexicon)


def filter_matches(
    matches: MatchSet, removed: Iterable[tuple[str, Category]]
) -> MatchSet:
    """Drop matches of the removed child terms without re-tagging.

    Fast approximation of re-tagging with the refined lexicon: shorter same-category
    terms that a removed term suppressed are not resurrected. Use `tag_corpus` on the
    refined lexicon when exactness matters.
    """
    gone = set(removed)
    kept = [m for m in matches.matches if (m.child_term, m.category) not in gone]
    out = MatchSet(matches.corpus_id, matches.lexicon_version + "-filtered", kept)
    for m in kept:
        out.child_frequencies[(m.child_term, m.category)] += 1
        out.parent_frequencies[(m.parent_term, m.category)] += 1
    return out
