#!/usr/bin/env python3
"""Walk through the core loop: tag a corpus, annotate a sample, estimate
per-term false-positive rates, and refine the lexicon.

Uses the bundled synthetic corpus, whose planted ambiguous terms play the role
the noisy dictionary terms played in the real data.
"""

from lexrefine.annotation import compute_fpr, create_session, select_removable
from lexrefine.corpus import sample_matched_posts
from lexrefine.synthetic import apply_scripted_labels, synthetic_corpus, synthetic_lexicon
from lexrefine.tagger import build_matcher, tag_corpus

SEED = 42

lexicon = synthetic_lexicon()
print(f"lexicon: {len(lexicon)} entries, version {lexicon.version}")
for category, count in lexicon.category_counts().items():
    print(f"  {category.value:15s} {count}")

corpus = synthetic_corpus(SEED, n_posts=1000)
matcher = build_matcher(lexicon)
matches = tag_corpus(matcher, corpus)
print(f"\ntagged {len(corpus.posts)} posts -> {matches.total_matches} matches")

example = matches.matches[0]
post = corpus.post_by_id(example.post_id)
raw = post.text.encode()
print(f"example match: {raw[example.start:example.end].decode()!r} -> "
      f"{example.parent_term} ({example.category.value})")
print(f"  in: {post.text[:90]}...")

# sample posts with at least one match and run a dual-annotator session;
# here two scripted annotators stand in for the human pass
sample = sample_matched_posts(corpus, matches, n_posts=600, seed=SEED)
print(f"\nsample: {len(sample.post_ids)} posts, {len(sample.match_ids)} matches")
print(f"  by category: {sample.counts_by_category}")

session = create_session(sample, ["ann1", "ann2"], seed=SEED)
apply_scripted_labels(session, {m.match_id: m.child_term for m in matches.matches}, SEED)
print(f"session complete: {session.status}")

table = compute_fpr(session.consensus(), matches)
print("\nhighest false-positive rates (sample freq >= 20):")
for row in table.rows[:12]:
    if row.sample_frequency >= 20:
        print(f"  {row.child_term:12s} n={row.sample_frequency:<4d} "
              f"fpr={row.fpr:.2f} corpus={row.corpus_frequency}")

selected = select_removable(table, fpr_min=0.5, freq_min=20)
print(f"\nselected for removal ({len(selected)}):", [c for c, _ in selected])

refined = lexicon.remove_terms(selected)
print(f"refined lexicon: {len(refined)} entries, version {refined.version}")
print(f"removal ledger: {len(refined.removal_ledger)} events, e.g. "
      f"{refined.removal_ledger[0].child_term} ({refined.removal_ledger[0].reason})")
