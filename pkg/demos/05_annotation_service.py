#!/usr/bin/env python3
"""Drive the annotation HTTP API through a complete dual-annotator session:
task fetching (blinded), label submission, completion stats with kappa, and
an adjudication override.

Runs in-process against a temporary data directory; `lexrefine serve` exposes
the same app over a real socket.
"""

import tempfile
from pathlib import Path

from fastapi.testclient import TestClient

from lexrefine.corpus import CorpusStore, sample_matched_posts
from lexrefine.service import create_app
from lexrefine.synthetic import synthetic_corpus, synthetic_lexicon
from lexrefine.tagger import build_matcher, tag_corpus

SEED = 42

with tempfile.TemporaryDirectory() as tmp:
    data_dir = Path(tmp) / "data"
    corpus = synthetic_corpus(SEED, n_posts=60)
    store = CorpusStore(data_dir)
    store.add(corpus)
    matches = tag_corpus(build_matcher(synthetic_lexicon()), corpus)
    matches.save(data_dir / "matches.jsonl")
    sample = sample_matched_posts(corpus, matches, 10, seed=SEED)
    (data_dir / "samples").mkdir()
    (data_dir / "samples" / f"{sample.sample_id}.json").write_text(sample.to_manifest())

    client = TestClient(create_app(data_dir))

    session = client.post(
        "/api/sessions",
        json={"sample_id": sample.sample_id, "annotators": ["alice", "bob"], "seed": 1},
    ).json()
    sid = session["session_id"]
    print(f"created {sid}: {session['labels_expected']} labels expected")

    first = client.get(f"/api/sessions/{sid}/tasks", params={"annotator": "alice", "limit": 1}).json()[0]
    print("\na task card (note: no verdict fields -> blinding):")
    for key in ("child_term", "parent_term", "category", "guideline_hint"):
        print(f"  {key}: {first[key][:70]}")
    h = first["highlight"]
    print(f"  highlighted span: {first['post_text'].encode()[h['start']:h['end']].decode()!r}")

    for annotator in ("alice", "bob"):
        while True:
            tasks = client.get(
                f"/api/sessions/{sid}/tasks", params={"annotator": annotator, "limit": 20}
            ).json()
            if not tasks:
                break
            for task in tasks:
                # bob flags the first match to create one disagreement
                verdict = "TruePositive"
                if annotator == "bob" and task["match_id"] == sample.match_ids[0]:
                    verdict = "FalsePositive"
                client.post(
                    f"/api/sessions/{sid}/labels",
                    json={"match_id": task["match_id"], "annotator_id": annotator, "verdict": verdict},
                )

    stats = client.get(f"/api/sessions/{sid}/stats").json()
    print(f"\nsession {stats['status']}; kappa={stats['kappa']:.3f}")
    print(f"consensus counts: {stats['consensus_counts']}")

    rows = client.get(
        f"/api/sessions/{sid}/disagreements", headers={"x-role": "adjudicator"}
    ).json()
    print(f"\ndisagreements: {[r['match_id'] for r in rows]}")
    client.post(
        f"/api/sessions/{sid}/adjudicate",
        headers={"x-role": "adjudicator"},
        json={"match_id": rows[0]["match_id"], "consensus": "Match", "adjudicator_id": "carol"},
    )
    stats = client.get(f"/api/sessions/{sid}/stats").json()
    print(f"after adjudication: {stats['status']}, consensus {stats['consensus_counts']}")
