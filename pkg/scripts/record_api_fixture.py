#!/usr/bin/env python3
"""Record request/response pairs from the annotation service into the fixture
the frontend's fake server is checked against.

Regenerate with: python scripts/record_api_fixture.py
"""

import json
import sys
from pathlib import Path

from fastapi.testclient import TestClient

from lexrefine.corpus import CorpusStore, sample_matched_posts
from lexrefine.service import create_app
from lexrefine.synthetic import synthetic_corpus, synthetic_lexicon
from lexrefine.tagger import build_matcher, tag_corpus

OUT = Path(__file__).resolve().parent.parent / "frontend" / "fixtures" / "recorded_api.json"


def main() -> None:
    import tempfile

    with tempfile.TemporaryDirectory() as tmp:
        data_dir = Path(tmp) / "data"
        corpus = synthetic_corpus(5, n_posts=40)
        CorpusStore(data_dir).add(corpus)
        matches = tag_corpus(build_matcher(synthetic_lexicon()), corpus)
        matches.save(data_dir / "matches.jsonl")
        sample = sample_matched_posts(corpus, matches, 8, seed=5)
        (data_dir / "samples").mkdir()
        (data_dir / "samples" / f"{sample.sample_id}.json").write_text(sample.to_manifest())

        client = TestClient(create_app(data_dir))
        exchanges = []

        def record(method: str, path: str, body=None, headers=None):
            kwargs = {}
            if body is not None:
                kwargs["json"] = body
            if headers:
                kwargs["headers"] = headers
            response = getattr(client, method.lower())(path, **kwargs)
            exchanges.append(
                {
                    "method": method,
                    "path": path,
                    "body": body,
                    "headers": headers or {},
                    "status": response.status_code,
                    "response": response.json(),
                }
            )
            return response.json()

        record("GET", "/api/sessions")
        created = record(
            "POST",
            "/api/sessions",
            {"sample_id": sample.sample_id, "annotators": ["alice", "bob"], "seed": 1},
        )
        session_id = created["session_id"]

        tasks_page = record("GET", f"/api/sessions/{session_id}/tasks?annotator=alice&limit=3")
        all_tasks = record(
            "GET", f"/api/sessions/{session_id}/tasks?annotator=alice&limit=1000"
        )
        record("GET", f"/api/sessions/{session_id}/tasks?annotator=nobody&limit=5")
        record("GET", f"/api/sessions/{session_id}/stats")
        record(
            "GET",
            f"/api/sessions/{session_id}/disagreements",
            headers={"x-role": "adjudicator"},
        )

        match_ids = [t["match_id"] for t in all_tasks]

        def verdict_for(annotator: str, index: int) -> str:
            if annotator == "alice":
                return "FalsePositive" if index == 1 else "TruePositive"
            if index in (1, 2):
                return "FalsePositive"
            if index == 3:
                return "Unclear"
            return "TruePositive"

        first = {"match_id": match_ids[0], "annotator_id": "alice", "verdict": "TruePositive"}
        record("POST", f"/api/sessions/{session_id}/labels", first)
        record("POST", f"/api/sessions/{session_id}/labels", first)  # idempotent resubmit
        record(
            "POST",
            f"/api/sessions/{session_id}/labels",
            {"match_id": match_ids[0], "annotator_id": "mallory", "verdict": "Unclear"},
        )
        record("GET", f"/api/sessions/{session_id}/stats")

        for annotator in ("alice", "bob"):
            for index, match_id in enumerate(match_ids):
                if annotator == "alice" and index == 0:
                    continue  # already labeled above
                record(
                    "POST",
                    f"/api/sessions/{session_id}/labels",
                    {
                        "match_id": match_id,
                        "annotator_id": annotator,
                        "verdict": verdict_for(annotator, index),
                    },
                )

        record("GET", f"/api/sessions/{session_id}/stats")
        record("GET", f"/api/sessions/{session_id}/disagreements")  # missing role header
        rows = record(
            "GET",
            f"/api/sessions/{session_id}/disagreements",
            headers={"x-role": "adjudicator"},
        )
        record(
            "POST",
            f"/api/sessions/{session_id}/adjudicate",
            {"match_id": rows[0]["match_id"], "consensus": "Match", "adjudicator_id": "carol"},
            headers={"x-role": "adjudicator"},
        )
        record("GET", f"/api/sessions/{session_id}/stats")
        record(
            "GET",
            f"/api/sessions/{session_id}/disagreements",
            headers={"x-role": "adjudicator"},
        )
        record(
            "POST",
            f"/api/sessions/{session_id}/labels",
            {"match_id": match_ids[0], "annotator_id": "alice", "verdict": "Unclear"},
        )
        record("GET", "/api/sessions")

        fixture = {
            "setup": {
                "sample_id": sample.sample_id,
                "session_id": session_id,
                "annotators": ["alice", "bob"],
                "tasks": all_tasks,
            },
            "exchanges": exchanges,
        }
        OUT.parent.mkdir(parents=True, exist_ok=True)
        OUT.write_text(json.dumps(fixture, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        print(f"wrote {OUT} ({len(exchanges)} exchanges, {len(match_ids)} tasks)")


if __name__ == "__main__":
    sys.exit(main())
