#!/usr/bin/env python3
"""Non-gating scale benchmark: matcher build over a large synthetic lexicon and
tagging throughput on generated posts.

Defaults are sized for a quick run; `--full` uses production-scale cardinalities
(176k-term lexicon; pass --posts 8496124 to exercise ingestion-scale streaming,
which mainly takes disk and patience).
"""

import argparse
import resource
import time

import numpy as np

from lexrefine.corpus import Corpus, Post
from lexrefine.lexicon import Category, build_lexicon
from lexrefine.synthetic import _FILLER
from lexrefine.tagger import build_matcher, tag_corpus
from datetime import datetime, timezone

parser = argparse.ArgumentParser()
parser.add_argument("--terms", type=int, default=20_000)
parser.add_argument("--posts", type=int, default=20_000)
parser.add_argument("--full", action="store_true", help="176,278-term lexicon")
args = parser.parse_args()

n_terms = 176_278 if args.full else args.terms
rng = np.random.default_rng(0)

print(f"building a {n_terms}-term lexicon...")
categories = list(Category)
rows = []
for i in range(n_terms):
    stem = f"term{i:06x}"
    child = stem if rng.random() < 0.8 else f"{stem} {_FILLER[i % len(_FILLER)]}"
    rows.append((child, f"parent{i % (n_terms // 4 or 1):06x}", categories[i % 4], "bench"))
started = time.perf_counter()
lexicon = build_lexicon(rows)
print(f"  lexicon built in {time.perf_counter() - started:.1f}s ({len(lexicon)} entries)")

started = time.perf_counter()
matcher = build_matcher(lexicon)
rss = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss / 1024
print(f"  matcher built in {time.perf_counter() - started:.1f}s, peak RSS ~{rss:.0f} MB")

print(f"\ngenerating {args.posts} posts (~200 chars each)...")
term_pool = [e.child_term for e in lexicon.entries[: min(5000, len(lexicon))]]
posts = []
t0 = datetime(2015, 1, 1, tzinfo=timezone.utc)
for i in range(args.posts):
    words = [str(w) for w in rng.choice(_FILLER, size=30)]
    for _ in range(int(rng.integers(0, 3))):
        words.insert(int(rng.integers(0, len(words))), str(rng.choice(term_pool)))
    posts.append(Post(f"p{i}", f"u{i % 1000}", t0, " ".join(words), timestamp_raw="2015-01-01T00:00:00+00:00"))
corpus = Corpus("bench", posts)

started = time.perf_counter()
matches = tag_corpus(matcher, corpus)
elapsed = time.perf_counter() - started
rate = args.posts / elapsed
print(f"tagged {args.posts} posts in {elapsed:.1f}s -> {rate:,.0f} posts/s/core "
      f"({matches.total_matches} matches)")
print("target (non-gating): >= 10,000 posts/s/core")

# ingestion throughput: stream the same posts back in from JSONL
# (--posts 8496124 exercises the full production cardinality, given disk)
import json
import tempfile

from lexrefine.corpus import ingest

with tempfile.NamedTemporaryFile("w", suffix=".jsonl", delete=False) as f:
    for post in posts:
        f.write(json.dumps(post.to_dict()) + "\n")
    jsonl_path = f.name
started = time.perf_counter()
streamed = ingest(jsonl_path)
elapsed = time.perf_counter() - started
print(f"\ningested {streamed.handle.post_count} records in {elapsed:.1f}s "
      f"-> {streamed.handle.post_count / elapsed:,.0f} records/s (streaming, single pass)")
