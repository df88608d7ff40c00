"""Post corpus ingestion, persistence, and seeded sampling of matched posts."""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Iterable, TYPE_CHECKING

import numpy as np

from .errors import DataError

if TYPE_CHECKING:
    from .tagger import MatchSet

log = logging.getLogger(__name__)

POST_FIELDS = ("post_id", "user_id", "timestamp", "text")


def _parse_timestamp(raw: str) -> datetime:
    value = raw[:-1] + "+00:00" if raw.endswith("Z") else raw
    try:
        return datetime.fromisoformat(value)
    except ValueError:
        raise DataError(f"unparseable timestamp {raw!r}") from None


@dataclass(frozen=True)
class Post:
    post_id: str
    user_id: str
    timestamp: datetime
    text: str
    timestamp_raw: str = ""
    extra: dict = field(default_factory=dict, compare=False)

    def to_dict(self) -> dict:
        d = dict(self.extra)
        d.update(
            post_id=self.post_id,
            user_id=self.user_id,
            timestamp=self.timestamp_raw or self.timestamp.isoformat(),
            text=self.text,
        )
        return d


@dataclass(frozen=True)
class CorpusHandle:
    corpus_id: str
    post_count: int
    source_path: str
    dedup_count: int


@dataclass
class Corpus:
    corpus_id: str
    posts: list[Post]
    source_path: str = ""
    dedup_count: int = 0

    @property
    def handle(self) -> CorpusHandle:
        return CorpusHandle(
            self.corpus_id, len(self.posts), self.source_path, self.dedup_count
        )

    def post_by_id(self, post_id: str) -> Post:
        if not hasattr(self, "_by_id"):
            self._by_id = {p.post_id: p for p in self.posts}
        return self._by_id[post_id]


def _parse_post(obj: dict) -> Post:
    missing = [k for k in POST_FIELDS if k not in obj]
    if missing:
        raise DataError(f"missing fields: {', '.join(missing)}")
    text = obj["text"]
    if not isinstance(text, str) or not text.strip():
        raise DataError("empty text")
    timestamp = _parse_timestamp(str(obj["timestamp"]))
    extra = {k: v for k, v in obj.items() if k not in POST_FIELDS}
    return Post(
        post_id=str(obj["post_id"]),
        user_id=str(obj["user_id"]),
        timestamp=timestamp,
        text=text,
        timestamp_raw=str(obj["timestamp"]),
        extra=extra,
    )


def ingest(path: str | Path, format: str = "jsonl") -> Corpus:
    """Read a JSONL corpus, dropping (user, timestamp, text) duplicates.

    Malformed lines are reported with their line numbers and skipped; a repeated
    post_id on a non-duplicate record is a hard error.
    """
    if format != "jsonl":
        raise DataError(f"unsupported corpus format {format!r}")
    path = Path(path)

    posts: list[Post] = []
    seen_ids: set[str] = set()
    seen_triples: set[tuple[str, str, str]] = set()
    dedup_count = 0
    bad_lines: list[tuple[int, str]] = []
    hasher = hashlib.sha256()
    try:
        stream = open(path, "rb")
    except OSError as exc:
        raise DataError(f"cannot read corpus {path}: {exc}") from exc
    with stream:  # one streaming pass; the dedup tuples share the posts' strings
        for lineno, raw_line in enumerate(stream, start=1):
            hasher.update(raw_line)
            line = raw_line.decode("utf-8").rstrip("\r\n")
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                if not isinstance(obj, dict):
                    raise DataError("record is not an object")
                post = _parse_post(obj)
            except (json.JSONDecodeError, DataError) as exc:
                bad_lines.append((lineno, str(exc)))
                continue
            triple = (post.user_id, post.timestamp_raw, post.text)
            if triple in seen_triples:
                dedup_count += 1
                continue
            if post.post_id in seen_ids:
                raise DataError(f"{path}:{lineno}: duplicate post_id {post.post_id!r}")
            seen_triples.add(triple)
            seen_ids.add(post.post_id)
            posts.append(post)
    corpus_id = hasher.hexdigest()[:12]
    for lineno, msg in bad_lines:
        log.warning("%s:%d: skipped malformed record (%s)", path, lineno, msg)
    if not posts:
        raise DataError(f"no valid records in {path}")
    log.info(
        "ingested %s: %d posts, %d duplicates dropped, %d malformed lines",
        path,
        len(posts),
        dedup_count,
        len(bad_lines),
    )
    return Corpus(corpus_id, posts, str(path), dedup_count)


def export(corpus: Corpus, path: str | Path) -> None:
    """Write the corpus back out as JSONL (post text round-trips byte-exactly)."""
    with open(path, "w", encoding="utf-8") as f:
        for post in corpus.posts:
            f.write(json.dumps(post.to_dict(), sort_keys=True, ensure_ascii=False) + "\n")


class CorpusStore:
    """Directory-backed store of ingested corpora, keyed by corpus_id."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        (self.root / "corpora").mkdir(parents=True, exist_ok=True)

    def add(self, corpus: Corpus) -> CorpusHandle:
        base = self.root / "corpora" / corpus.corpus_id
        export(corpus, base.with_suffix(".jsonl"))
        handle = corpus.handle
        base.with_suffix(".handle.json").write_text(
            json.dumps(handle.__dict__, sort_keys=True, indent=2) + "\n",
            encoding="utf-8",
        )
        return handle

    def get(self, corpus_id: str) -> Corpus:
        base = self.root / "corpora" / corpus_id
        jsonl = base.with_suffix(".jsonl")
        if not jsonl.exists():
            raise DataError(f"unknown corpus {corpus_id!r} in store {self.root}")
        corpus = ingest(jsonl)
        meta = json.loads(base.with_suffix(".handle.json").read_text(encoding="utf-8"))
        return Corpus(corpus_id, corpus.posts, meta["source_path"], meta["dedup_count"])

    def handles(self) -> list[CorpusHandle]:
        out = []
        for f in sorted((self.root / "corpora").glob("*.handle.json")):
            out.append(CorpusHandle(**json.loads(f.read_text(encoding="utf-8"))))
        return out


@dataclass(frozen=True)
class AnnotationSample:
    sample_id: str
    seed: int
    post_ids: tuple[str, ...]  # draw order
    match_ids: tuple[str, ...]
    counts_by_category: dict

    def to_manifest(self) -> str:
        return json.dumps(
            {
                "sample_id": self.sample_id,
                "seed": self.seed,
                "post_ids": sorted(self.post_ids),
                "match_ids": list(self.match_ids),
                "draw_order": list(self.post_ids),
                "counts_by_category": {
                    k: v for k, v in sorted(self.counts_by_category.items())
                },
            },
            sort_keys=True,
            indent=2,
        ) + "\n"

    @staticmethod
    def from_manifest(text: str) -> "AnnotationSample":
        obj = json.loads(text)
        return AnnotationSample(
            sample_id=obj["sample_id"],
            seed=obj["seed"],
            post_ids=tuple(obj["draw_order"]),
            match_ids=tuple(obj["match_ids"]),
            counts_by_category=dict(obj["counts_by_category"]),
        )


def sample_matched_posts(
    corpus: Corpus, matches: "MatchSet", n_posts: int, seed: int
) -> AnnotationSample:
    """Uniformly sample n_posts posts having >= 1 match; all their matches come along."""
    if seed is None:
        raise DataError("sampling requires an explicit seed")
    if matches.corpus_id and matches.corpus_id != corpus.corpus_id:
        raise DataError(
            f"match set belongs to corpus {matches.corpus_id!r}, not {corpus.corpus_id!r}"
        )
    by_post = matches.by_post()
    eligible = [p.post_id for p in corpus.posts if p.post_id in by_post]
    if n_posts > len(eligible):
        raise DataError(
            f"requested {n_posts} posts but only {len(eligible)} have matches"
        )
    rng = np.random.Generator(np.random.PCG64(seed))
    idx = rng.choice(len(eligible), size=n_posts, replace=False) if n_posts else []
    drawn = [eligible[i] for i in idx]
    match_ids: list[str] = []
    counts: dict[str, int] = {}
    for post_id in drawn:
        for m in by_post[post_id]:
            match_ids.append(m.match_id)
            counts[m.category.value] = counts.get(m.category.value, 0) + 1
    sample_id = f"sample-{corpus.corpus_id[:8]}-{seed}-{n_posts}"
    return AnnotationSample(
        sample_id=sample_id,
        seed=seed,
        post_ids=tuple(drawn),
        match_ids=tuple(match_ids),
        counts_by_category=counts,
    )
