"""HTTP API for annotation sessions and read-only pipeline artifacts.

State lives in a data directory laid out by the CLI pipeline: a corpus store,
a match set, sample manifests, and session files. Blinding is enforced here:
while a session is open, no response ever carries another annotator's verdict.
"""

from __future__ import annotations

import json
import logging
import threading
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, PlainTextResponse
from fastapi.staticfiles import StaticFiles

from .annotation import (
    AnnotationSession,
    Consensus,
    Label,
    Verdict,
    cohen_kappa,
    create_session,
)
from .corpus import AnnotationSample, Corpus, CorpusStore
from .errors import DataError
from .lexicon import Category
from .tagger import MatchSet, TermMatch

log = logging.getLogger(__name__)

GUIDELINE_HINTS = {
    Category.ALLERGEN: (
        "True when the term denotes a food, ingredient, or animal someone could "
        "be allergic to (no allergic reaction needs to be described). False for "
        "colors, names, brands, toys, or other unrelated senses."
    ),
    Category.DRUG: (
        "True when the term refers to a medicine or chemical compound being "
        "taken, discussed, or depicted. False for metaphors, song or brand "
        "names, and other non-pharmacological uses."
    ),
    Category.MEDICAL_TERM: (
        "True when the term expresses a health state, symptom, or condition of "
        "the poster or someone mentioned. False when used for weather, mood "
        "slang, popularity, or other everyday senses."
    ),
    Category.NATURAL_PRODUCT: (
        "True when the term denotes a plant or plant-derived product. False for "
        "person names, colors, places, or ornaments."
    ),
}


class ServiceState:
    """Loads pipeline artifacts from a data directory and owns session persistence."""

    def __init__(self, data_dir: str | Path):
        self.data_dir = Path(data_dir)
        if not self.data_dir.is_dir():
            raise DataError(f"data directory {self.data_dir} does not exist")
        self.lock = threading.Lock()
        self.store = CorpusStore(self.data_dir)
        handles = self.store.handles()
        if not handles:
            raise DataError(f"no corpus found under {self.data_dir}")
        self.corpus: Corpus = self.store.get(handles[0].corpus_id)
        matches_path = self.data_dir / "matches.jsonl"
        if not matches_path.exists():
            raise DataError(f"missing match set {matches_path}")
        self.matches = MatchSet.load(matches_path, self.corpus.corpus_id)
        self.match_by_id: dict[str, TermMatch] = {
            m.match_id: m for m in self.matches.matches
        }
        (self.data_dir / "sessions").mkdir(exist_ok=True)
        self.sessions: dict[str, AnnotationSession] = {}
        for path in sorted((self.data_dir / "sessions").glob("*.json")):
            session = AnnotationSession.from_dict(
                json.loads(path.read_text(encoding="utf-8"))
            )
            self.sessions[session.session_id] = session

    def sample(self, sample_id: str) -> AnnotationSample:
        path = self.data_dir / "samples" / f"{sample_id}.json"
        if not path.exists():
            raise DataError(f"unknown sample {sample_id!r}")
        return AnnotationSample.from_manifest(path.read_text(encoding="utf-8"))

    def session(self, session_id: str) -> AnnotationSession:
        session = self.sessions.get(session_id)
        if session is None:
            raise DataError(f"unknown session {session_id!r}")
        return session

    def persist(self, session: AnnotationSession) -> None:
        path = self.data_dir / "sessions" / f"{session.session_id}.json"
        path.write_text(
            json.dumps(session.to_dict(), sort_keys=True, indent=2) + "\n",
            encoding="utf-8",
        )

    def flush(self) -> None:
        with self.lock:
            for session in self.sessions.values():
                self.persist(session)

    def task_view(self, match: TermMatch) -> dict:
        post = self.corpus.post_by_id(match.post_id)
        return {
            "match_id": match.match_id,
            "post_text": post.text,
            "highlight": {"start": match.start, "end": match.end},
            "child_term": match.child_term,
            "parent_term": match.parent_term,
            "category": match.category.value,
            "guideline_hint": GUIDELINE_HINTS[match.category],
        }


def _problem(status: int, code: str, detail: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": code, "detail": detail})


def _session_summary(session: AnnotationSession) -> dict:
    total = 2 * len(session.assignment)
    return {
        "session_id": session.session_id,
        "sample_id": session.sample_id,
        "status": session.status,
        "annotators": session.annotator_ids,
        "labels_recorded": len(session.labels),
        "labels_expected": total,
    }


def create_app(data_dir: str | Path, static_dir: str | Path | None = None) -> FastAPI:
    from contextlib import asynccontextmanager

    state = ServiceState(data_dir)

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        yield
        state.flush()  # pending label writes land before shutdown

    app = FastAPI(title="lexrefine annotation service", lifespan=lifespan)
    app.state.store = state

    @app.exception_handler(DataError)
    async def handle_data_error(request: Request, exc: DataError):
        return _problem(400, "data-error", str(exc))

    @app.get("/api/sessions")
    def list_sessions():
        return [_session_summary(s) for s in state.sessions.values()]

    @app.post("/api/sessions", status_code=201)
    async def new_session(request: Request):
        body = await request.json()
        annotators = body.get("annotators", [])
        sample = state.sample(body.get("sample_id", ""))
        with state.lock:
            session = create_session(sample, annotators, seed=int(body.get("seed", 0)))
            if session.session_id in state.sessions:
                return _problem(409, "conflict", f"session {session.session_id} exists")
            state.sessions[session.session_id] = session
            state.persist(session)
        return _session_summary(session)

    @app.get("/api/sessions/{session_id}/tasks")
    def tasks(session_id: str, annotator: str, limit: int = 20):
        session = state.session(session_id)
        if annotator not in session.annotator_ids:
            return _problem(403, "unknown-annotator", f"{annotator!r} not in session")
        pending = session.pending_for(annotator)[: max(limit, 0)]
        return [state.task_view(state.match_by_id[m]) for m in pending]

    @app.post("/api/sessions/{session_id}/labels")
    async def post_label(session_id: str, request: Request):
        body = await request.json()
        session = state.session(session_id)
        try:
            verdict = Verdict(body.get("verdict", ""))
        except ValueError:
            return _problem(400, "bad-verdict", f"unknown verdict {body.get('verdict')!r}")
        label = Label(
            match_id=body.get("match_id", ""),
            annotator_id=body.get("annotator_id", ""),
            verdict=verdict,
            note=body.get("note", ""),
        )
        with state.lock:
            current = session.labels.get((label.match_id, label.annotator_id))
            if current is not None and current.verdict == label.verdict:
                return {"status": "unchanged", "match_id": label.match_id}
            try:
                session.record_label(label)
            except DataError as exc:
                code = "closed-session" if "closed" in str(exc) else "bad-assignment"
                return _problem(409 if code == "closed-session" else 403, code, str(exc))
            state.persist(session)
        return {"status": "recorded", "match_id": label.match_id}

    @app.get("/api/sessions/{session_id}/stats")
    def stats(session_id: str):
        session = state.session(session_id)
        workload = session.workload()
        out = {
            **_session_summary(session),
            "per_annotator": {
                a: {
                    "assigned": workload[a],
                    "remaining": len(session.pending_for(a)),
                }
                for a in session.annotator_ids
            },
        }
        if session.is_complete:
            pairs = session.verdict_pairs()
            out["kappa"] = cohen_kappa(
                [a.value for _, a, _ in pairs],
                [b.value for _, _, b in pairs],
                [v.value for v in Verdict],
            )
            counts: dict[str, int] = {}
            for record in session.effective_consensus():
                counts[record.consensus.value] = counts.get(record.consensus.value, 0) + 1
            out["consensus_counts"] = counts
        return out

    @app.get("/api/sessions/{session_id}/disagreements")
    def disagreements(session_id: str, request: Request):
        session = state.session(session_id)
        if not session.is_complete:
            return _problem(409, "session-open", "blinding holds until completion")
        if request.headers.get("x-role") != "adjudicator":
            return _problem(403, "not-adjudicator", "adjudicator role header required")
        rows = []
        for match_id in session.disagreements():
            a1, a2 = session.assignment[match_id]
            match = state.match_by_id[match_id]
            override = session.adjudications.get(match_id)
            rows.append(
                {
                    "match_id": match_id,
                    "task": state.task_view(match),
                    "verdicts": {
                        a1: session.labels[(match_id, a1)].verdict.value,
                        a2: session.labels[(match_id, a2)].verdict.value,
                    },
                    "adjudicated": override[0].value if override else None,
                }
            )
        return rows

    @app.post("/api/sessions/{session_id}/adjudicate")
    async def adjudicate(session_id: str, request: Request):
        body = await request.json()
        session = state.session(session_id)
        if request.headers.get("x-role") != "adjudicator":
            return _problem(403, "not-adjudicator", "adjudicator role header required")
        if not session.is_complete:
            return _problem(409, "session-open", "cannot adjudicate an open session")
        try:
            consensus = Consensus(body.get("consensus", ""))
        except ValueError:
            return _problem(400, "bad-consensus", f"unknown consensus {body.get('consensus')!r}")
        with state.lock:
            session.adjudicate(
                body.get("match_id", ""), consensus, body.get("adjudicator_id", "")
            )
            state.persist(session)
        return {"status": "adjudicated", "match_id": body.get("match_id", "")}

    @app.get("/api/fpr")
    def fpr():
        path = state.data_dir / "fpr.tsv"
        if not path.exists():
            return _problem(404, "not-found", "no FPR table has been computed")
        return PlainTextResponse(path.read_text(encoding="utf-8"), media_type="text/tab-separated-values")

    @app.get("/api/reports/{name}")
    def report(name: str):
        if "/" in name or ".." in name:
            return _problem(400, "bad-name", "report names cannot contain path separators")
        path = state.data_dir / "reports" / name
        if not path.exists():
            return _problem(404, "not-found", f"no report named {name!r}")
        text = path.read_text(encoding="utf-8")
        if name.endswith(".json"):
            return JSONResponse(content=json.loads(text))
        return PlainTextResponse(text)

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app


def serve(
    bind: str = "127.0.0.1:8422",
    data_dir: str | Path = "data",
    static_dir: str | Path | None = None,
) -> None:
    """Run the annotation service until interrupted."""
    import uvicorn

    host, _, port = bind.partition(":")
    app = create_app(data_dir, static_dir)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port or 8422), log_level="info")
