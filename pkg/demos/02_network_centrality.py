#!/usr/bin/env python3
"""Build co-mention networks before and after refinement and compare the
eigenvector-centrality rankings side by side.
"""

from lexrefine.annotation import compute_fpr, create_session, select_removable
from lexrefine.corpus import sample_matched_posts
from lexrefine.network import build_network, eigenvector_centrality, top_k
from lexrefine.synthetic import apply_scripted_labels, synthetic_corpus, synthetic_lexicon
from lexrefine.tagger import build_matcher, tag_corpus

SEED = 42

lexicon = synthetic_lexicon()
corpus = synthetic_corpus(SEED, n_posts=1000)
matches = tag_corpus(build_matcher(lexicon), corpus)

graph = build_network(matches)
print(f"baseline network: {len(graph.nodes)} nodes, {graph.edge_count} edges")
heaviest = max(graph.edges.items(), key=lambda kv: kv[1])
print(f"heaviest edge: {heaviest[0][0]} -- {heaviest[0][1]} (weight {heaviest[1]})")

result = eigenvector_centrality(graph)
print(f"power iteration: {result.iterations} iterations, "
      f"residual {result.residual:.1e}, dominant eigenvalue {result.dominant_eigenvalue:.2f}")

# refine and rebuild
sample = sample_matched_posts(corpus, matches, 600, seed=SEED)
session = create_session(sample, ["ann1", "ann2"], seed=SEED)
apply_scripted_labels(session, {m.match_id: m.child_term for m in matches.matches}, SEED)
selected = select_removable(compute_fpr(session.consensus(), matches))
refined_matches = tag_corpus(build_matcher(lexicon.remove_terms(selected)), corpus)
refined_result = eigenvector_centrality(build_network(refined_matches))

before = top_k(result, 15)
after = top_k(refined_result, 15)
print(f"\n{'rank':>4}  {'original':<16}{'score':>7}   {'refined':<16}{'score':>7}")
for (ra, na, sa), (rb, nb, sb) in zip(before.items, after.items):
    marker = " *" if (na, ) and any(na == c for c, _ in selected) else ""
    print(f"{ra:>4}  {na:<16}{sa:>7.3f}   {nb:<16}{sb:>7.3f}{marker}")
print("\n(* ambiguous term that the refinement removed from the dictionary)")
