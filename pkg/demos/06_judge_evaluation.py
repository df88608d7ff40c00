#!/usr/bin/env python3
"""Machine-judge evaluation: prompt rendering, verdict parsing, and MCC against
human consensus, including the two uncertainty groupings.
"""

from lexrefine.corpus import Post
from lexrefine.judge import build_prompt, evaluate_table, parse_verdict
from lexrefine.lexicon import Category
from lexrefine.synthetic import synthetic_corpus, synthetic_lexicon
from lexrefine.tagger import build_matcher, tag_post

lexicon = synthetic_lexicon()
corpus = synthetic_corpus(7, n_posts=50)
matcher = build_matcher(lexicon)

post = next(p for p in corpus.posts if tag_post(matcher, p))
match = tag_post(matcher, post)[0]
prompt = build_prompt(match, post)
print("user prompt sent to the judge:")
print(prompt.user_text)

raw = (
    "Here is my assessment.\n```json\n"
    '{"token_class": "False Positive", "reason": "used as a name, not the term sense"}\n'
    "```"
)
verdict = parse_verdict(raw, match.match_id)
print(f"parsed verdict from fenced response: {verdict.token_class.value} ({verdict.reason})")

# a full-scale judge-vs-consensus contingency table (judge rows, human columns,
# order match / mismatch / uncertain) and its MCC under both groupings
table = [[818, 10, 83], [220, 193, 170], [3, 0, 3]]
print("\njudge-vs-consensus contingency (1500 matches):")
for label, row in zip(("judge match", "judge mismatch", "judge uncertain"), table):
    print(f"  {label:16s} {row}")

grouped = evaluate_table(table, "uncertain_as_negative")
discard = evaluate_table(table, "discard_uncertain")
print(f"\nMCC, uncertain grouped with negatives: {grouped.mcc:.3f}  {grouped.confusion_2x2}")
print(f"MCC, uncertain rows/columns discarded: {discard.mcc:.3f}  {discard.confusion_2x2}")
