#!/usr/bin/env python3
"""Run the random-removal null model: is the refinement's impact on the
centrality ranking larger than removing equally frequent low-FPR terms?

Prints the K table (refined vs random mean +- std and the observed p-value)
for several list sizes k.
"""

import time

from lexrefine.annotation import compute_fpr, create_session, select_removable
from lexrefine.corpus import sample_matched_posts
from lexrefine.rankcompare import candidate_pool, run_null_model
from lexrefine.synthetic import apply_scripted_labels, synthetic_corpus, synthetic_lexicon
from lexrefine.tagger import build_matcher, tag_corpus

SEED = 42

lexicon = synthetic_lexicon()
corpus = synthetic_corpus(SEED, n_posts=1000)
matches = tag_corpus(build_matcher(lexicon), corpus)
sample = sample_matched_posts(corpus, matches, 600, seed=SEED)
session = create_session(sample, ["ann1", "ann2"], seed=SEED)
apply_scripted_labels(session, {m.match_id: m.child_term for m in matches.matches}, SEED)
table = compute_fpr(session.consensus(), matches)
selected = select_removable(table)

pool, floor = candidate_pool(table, selected)
print(f"removing {len(selected)} terms; null model draws from {len(pool)} candidates "
      f"(fpr < 0.5, corpus frequency >= {floor})")

started = time.perf_counter()
report = run_null_model(
    matches, table, selected,
    n_samples=1000, sample_size=len(selected), seed=SEED, k_values=[5, 10, 20],
)
elapsed = time.perf_counter() - started

print(f"\n1000 random removals in {elapsed:.1f}s\n")
print(f"{'k':>4} {'K_refined':>10} {'K_random':>20} {'p_value':>8} {'CER_ref':>8} {'CER_rand':>9}")
for c in report.comparisons:
    print(f"{c.k:>4} {c.K_refined:>10g} {c.mean_K_random:>12.1f} +- {c.std_K_random:<5.1f}"
          f" {c.p_value:>8.3f} {c.cer_refined:>8.2f} {c.mean_cer_random:>9.2f}")

print("\nTSV form (what `lexrefine nullmodel` writes):\n")
print(report.to_tsv())
