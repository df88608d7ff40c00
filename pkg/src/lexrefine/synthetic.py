"""Seeded synthetic corpus with planted ambiguous terms, for end-to-end runs.

The generator plants two kinds of signal: topic clusters of coherent biomedical
terms that co-occur with each other, and a handful of ambiguous terms that show
up across all clusters in non-biomedical contexts. Scripted annotators mark the
ambiguous terms as false positives, so the full pipeline should select exactly
the planted set for removal, and removing it should disrupt the co-mention
ranking far more than removing random frequent terms.
"""

from __future__ import annotations

import hashlib
from datetime import datetime, timedelta, timezone

import numpy as np

from .annotation import AnnotationSession, Label, Verdict
from .corpus import Corpus, Post
from .lexicon import Category, Lexicon, build_lexicon

# child terms planted to behave ambiguously (high scripted false-positive rate)
PLANTED_AMBIGUOUS: tuple[tuple[str, Category], ...] = (
    ("spike", Category.MEDICAL_TERM),
    ("mellow", Category.DRUG),
    ("blossom", Category.NATURAL_PRODUCT),
    ("amber", Category.ALLERGEN),
    ("breeze", Category.MEDICAL_TERM),
    ("coral", Category.NATURAL_PRODUCT),
    ("flurry", Category.MEDICAL_TERM),
    ("crumble", Category.ALLERGEN),
)

_CLUSTERS: dict[str, list[str]] = {
    # sleep complaints
    "sleep": ["insomnia", "somnolence", "drowsiness", "snoring", "bruxism", "restlessness", "nightmare"],
    # mood terms
    "mood": ["anxiety", "irritability", "apathy", "agitation", "melancholy", "rumination", "dysphoria"],
    # gastro terms
    "gastro": ["nausea", "bloating", "reflux", "cramping", "indigestion", "queasiness", "gastritis"],
    # neuro terms
    "neuro": ["migraine", "vertigo", "tremor", "tingling", "photophobia", "dizziness", "stupor"],
}

_CLUSTER_CATEGORY = Category.MEDICAL_TERM

# background parents with synonym children, to exercise parent/child resolution
_BACKGROUND: list[tuple[str, str, Category]] = [
    ("valerapax", "valerapax", Category.DRUG),
    ("v-pax", "valerapax", Category.DRUG),
    ("somnodil", "somnodil", Category.DRUG),
    ("somno", "somnodil", Category.DRUG),
    ("chamomile", "chamomile", Category.NATURAL_PRODUCT),
    ("manzanilla", "chamomile", Category.NATURAL_PRODUCT),
    ("hazelnut", "hazelnut", Category.ALLERGEN),
    ("filbert", "hazelnut", Category.ALLERGEN),
    ("sleep apnea", "sleep apnea", Category.MEDICAL_TERM),
    ("apnea", "apnea", Category.MEDICAL_TERM),
]

_FILLER = (
    "today just went with friends over some really about after before lovely "
    "sunny gray city park weekend vibes music coffecup walking thinking caught "
    "moment little big trying maybe honestly update finally posting pics from "
    "our trip such great times feeling grateful thanks everyone checking new "
    "week goals done list made plans happy place good stuff more soon"
).split()


def synthetic_lexicon() -> Lexicon:
    rows: list[tuple[str, str, Category, str]] = []
    for cluster_terms in _CLUSTERS.values():
        for term in cluster_terms:
            rows.append((term, term, _CLUSTER_CATEGORY, "synthetic"))
    for child, category in PLANTED_AMBIGUOUS:
        rows.append((child, child, category, "synthetic"))
    for child, parent, category in _BACKGROUND:
        rows.append((child, parent, category, "synthetic"))
    return build_lexicon(rows)


def _render(rng: np.random.Generator, terms: list[str]) -> str:
    """Scatter terms through filler text, sometimes as hashtags or capitalized."""
    words = [str(w) for w in rng.choice(_FILLER, size=int(rng.integers(6, 14)))]
    for term in terms:
        rendered = term
        style = rng.random()
        if style < 0.3 and " " not in term:
            rendered = "#" + term
        elif style < 0.5:
            rendered = term.capitalize()
        words.insert(int(rng.integers(0, len(words) + 1)), rendered)
    return " ".join(words)


def synthetic_corpus(seed: int, n_posts: int = 1000) -> Corpus:
    """Deterministic corpus mixing cluster posts, ambiguous-term noise, and filler."""
    rng = np.random.default_rng([seed, 0xC0FFEE])
    cluster_names = list(_CLUSTERS)
    ambiguous = [child for child, _ in PLANTED_AMBIGUOUS]
    good_children = [c for terms in _CLUSTERS.values() for c in terms]
    background_children = [child for child, _, _ in _BACKGROUND]

    posts = []
    t0 = datetime(2015, 1, 1, tzinfo=timezone.utc)
    for i in range(n_posts):
        roll = rng.random()
        if roll < 0.58:  # coherent topic post
            cluster = _CLUSTERS[cluster_names[int(rng.integers(len(cluster_names)))]]
            picks = rng.choice(cluster, size=int(rng.integers(2, 4)), replace=False)
            terms = [str(t) for t in picks]
        elif roll < 0.66:  # weak bridge between two clusters
            a, b = rng.choice(len(cluster_names), size=2, replace=False)
            terms = [
                str(rng.choice(_CLUSTERS[cluster_names[int(a)]])),
                str(rng.choice(_CLUSTERS[cluster_names[int(b)]])),
            ]
        elif roll < 0.82:  # ambiguous chatter: the planted terms co-occur as a clique
            n_amb = 2 + int(rng.random() < 0.4)
            terms = [str(t) for t in rng.choice(ambiguous, size=n_amb, replace=False)]
            extra = int(rng.integers(1, 3))
            terms += [str(t) for t in rng.choice(good_children, size=extra, replace=False)]
        elif roll < 0.88:  # background chatter with synonym-rich terms
            terms = [str(rng.choice(background_children))]
            if rng.random() < 0.4:
                terms.append(str(rng.choice(good_children)))
        else:  # pure filler
            terms = []
        posts.append(
            Post(
                post_id=f"p{i:05d}",
                user_id=f"u{int(rng.integers(0, 120)):04d}",
                timestamp=t0 + timedelta(minutes=i),
                text=_render(rng, terms),
                timestamp_raw=(t0 + timedelta(minutes=i)).isoformat(),
            )
        )
    return Corpus(corpus_id=f"synthetic-{seed}-{n_posts}", posts=posts)


_AMBIGUOUS_CHILDREN = {child for child, _ in PLANTED_AMBIGUOUS}


def scripted_verdict(seed: int, match_id: str, annotator_id: str, child_term: str) -> Verdict:
    """Deterministic annotator behavior: ambiguous children are mostly false positives."""
    digest = hashlib.sha256(f"{seed}:{match_id}:{annotator_id}".encode()).digest()
    u = int.from_bytes(digest[:8], "big") / 2**64
    if child_term in _AMBIGUOUS_CHILDREN:
        if u < 0.86:
            return Verdict.FALSE_POSITIVE
        if u < 0.93:
            return Verdict.UNCLEAR
        return Verdict.TRUE_POSITIVE
    if u < 0.93:
        return Verdict.TRUE_POSITIVE
    if u < 0.975:
        return Verdict.FALSE_POSITIVE
    return Verdict.UNCLEAR


def apply_scripted_labels(
    session: AnnotationSession, child_by_match: dict[str, str], seed: int
) -> None:
    """Fill a session with deterministic labels from the scripted annotators."""
    for match_id, pair in session.assignment.items():
        child = child_by_match[match_id]
        for annotator_id in pair:
            session.record_label(
                Label(
                    match_id=match_id,
                    annotator_id=annotator_id,
                    verdict=scripted_verdict(seed, match_id, annotator_id, child),
                    timestamp="1970-01-01T00:00:00+00:00",
                )
            )
