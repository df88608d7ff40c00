import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from lexrefine.corpus import Corpus, Post
from lexrefine.lexicon import Category, Lexicon, build_lexicon


def make_post(post_id: str, text: str, user_id: str = "u1", minute: int = 0) -> Post:
    ts = datetime(2015, 6, 1, 12, minute % 60, tzinfo=timezone.utc)
    return Post(post_id, user_id, ts, text, timestamp_raw=ts.isoformat())


def make_corpus(texts, corpus_id="test-corpus") -> Corpus:
    posts = [make_post(f"p{i}", t, minute=i) for i, t in enumerate(texts)]
    return Corpus(corpus_id, posts)


@pytest.fixture
def small_lexicon() -> Lexicon:
    rows = [
        ("weed", "Cannabis", Category.NATURAL_PRODUCT, "manual"),
        ("mary jane", "Cannabis", Category.NATURAL_PRODUCT, "manual"),
        ("420", "Cannabis", Category.NATURAL_PRODUCT, "manual"),
        ("valium", "Diazepam", Category.DRUG, "db"),
        ("hot", "Feeling hot", Category.MEDICAL_TERM, "db"),
        ("feeling hot", "Feeling hot", Category.MEDICAL_TERM, "db"),
        ("cold", "Nasopharyngitis", Category.MEDICAL_TERM, "db"),
        ("rosa", "Rosa", Category.NATURAL_PRODUCT, "db"),
        ("orange", "Orange", Category.ALLERGEN, "db"),
    ]
    return build_lexicon(rows)


# token alphabet for random tagging fixtures: short words so collisions and
# multi-word overlaps happen often
FIXTURE_WORDS = ["alba", "brix", "cusp", "dray", "erg", "flim", "gorse", "hale", "ivo", "jute"]


def random_fixture_lexicon(rng: np.random.Generator) -> Lexicon:
    categories = list(Category)
    rows = []
    seen = set()
    for _ in range(int(rng.integers(6, 16))):
        length = int(rng.integers(1, 4))
        child = " ".join(rng.choice(FIXTURE_WORDS, size=length))
        category = categories[int(rng.integers(len(categories)))]
        if (child, category) in seen:
            continue
        seen.add((child, category))
        parent = f"P-{child.split()[0]}"
        rows.append((child, parent, category, "fixture"))
    if not rows:
        rows = [("alba", "P-alba", Category.DRUG, "fixture")]
    return build_lexicon(rows)


def random_fixture_text(rng: np.random.Generator) -> str:
    parts = []
    for _ in range(int(rng.integers(3, 30))):
        word = str(rng.choice(FIXTURE_WORDS))
        style = rng.random()
        if style < 0.15:
            word = "#" + word
        elif style < 0.25:
            word = word.capitalize()
        elif style < 0.32:
            word = word + "."
        elif style < 0.36:
            word = word + ","
        parts.append(word)
    return " ".join(parts)
