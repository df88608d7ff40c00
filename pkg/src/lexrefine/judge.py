"""Machine-judge evaluation against human consensus: prompts, parsing, MCC.

The judge client speaks a generic chat-completion HTTP contract and can run
fully offline from a fixture of recorded verdicts. Every raw response is kept
verbatim so justification text can be audited later.
"""

from __future__ import annotations

import json
import logging
import math
import os
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import httpx
import numpy as np

from .annotation import Consensus, ConsensusRecord
from .corpus import Post
from .errors import DataError
from .tagger import TermMatch

log = logging.getLogger(__name__)


class JudgeClass(str, Enum):
    TRUE_POSITIVE = "TruePositive"
    FALSE_POSITIVE = "FalsePositive"
    UNCERTAIN = "Uncertain"


_CLASS_LITERALS = {
    "True Positive": JudgeClass.TRUE_POSITIVE,
    "False Positive": JudgeClass.FALSE_POSITIVE,
    "Uncertain": JudgeClass.UNCERTAIN,
}

DEFAULT_GUIDELINES = """\
You review automatic dictionary tags on social media posts. Each post contains
one tagged term wrapped in asterisks (*term*). The dictionary maps surface terms
to a canonical parent_term within a type (Allergen, Drug, Medical Term, or
Natural Product). Decide whether the tagged occurrence actually carries the
dictionary sense.

Classify as "True Positive" when the starred term is used with the meaning of
its parent_term and type: a food or ingredient someone could be allergic to
(Allergen, whether or not a reaction is described), a medicine or chemical
compound (Drug), a health state or condition (Medical Term), or a plant or
plant-derived product (Natural Product).

Classify as "False Positive" when the occurrence carries an unrelated sense:
a color, a person or place or brand name, a song or title, a metaphor, or any
other non-biomedical usage.

Classify as "Uncertain" when the post gives too little context to decide.

Respond with JSON only, using this schema:
{"token_class": $your_classification, "reason": $your_justification}
$your_classification must be exactly one of "True Positive", "False Positive",
or "Uncertain".
"""


@dataclass(frozen=True)
class JudgePrompt:
    system_text: str
    user_text: str


@dataclass(frozen=True)
class JudgeVerdict:
    match_id: str
    token_class: JudgeClass
    reason: str
    raw_response: str = ""

    def to_dict(self) -> dict:
        return {
            "match_id": self.match_id,
            "token_class": self.token_class.value,
            "reason": self.reason,
            "raw_response": self.raw_response,
        }

    @staticmethod
    def from_dict(obj: dict) -> "JudgeVerdict":
        raw_class = obj["token_class"]
        token_class = _CLASS_LITERALS.get(raw_class)
        if token_class is None:
            try:
                token_class = JudgeClass(raw_class)
            except ValueError:
                raise DataError(f"unknown token_class {raw_class!r}") from None
        return JudgeVerdict(
            match_id=obj["match_id"],
            token_class=token_class,
            reason=obj.get("reason", ""),
            raw_response=obj.get("raw_response", ""),
        )


def build_prompt(
    match: TermMatch, post: Post, guidelines_template: str = DEFAULT_GUIDELINES
) -> JudgePrompt:
    """Wrap the matched span in asterisks and render the classification fields."""
    if match.post_id != post.post_id:
        raise DataError(f"match {match.match_id} does not belong to post {post.post_id}")
    raw = post.text.encode("utf-8")
    if not (0 <= match.start < match.end <= len(raw)):
        raise DataError(f"match offsets {match.start}..{match.end} out of range")
    try:
        before = raw[: match.start].decode("utf-8")
        span = raw[match.start : match.end].decode("utf-8")
        after = raw[match.end :].decode("utf-8")
    except UnicodeDecodeError:
        raise DataError("match offsets split a UTF-8 sequence") from None
    user_text = (
        f'post_text: "{before}*{span}*{after}"\n'
        f"matched_token: {match.child_term}\n"
        f"parent_term: {match.parent_term}\n"
        f"type: {match.category.display}\n"
    )
    return JudgePrompt(system_text=guidelines_template, user_text=user_text)


def parse_verdict(raw: str, match_id: str = "") -> JudgeVerdict:
    """Extract the first JSON object carrying token_class and reason.

    Tolerates surrounding prose and code fences; an unknown class string is an
    error rather than a silent Uncertain.
    """
    decoder = json.JSONDecoder()
    i = raw.find("{")
    while i != -1:
        try:
            obj, _ = decoder.raw_decode(raw[i:])
        except json.JSONDecodeError:
            i = raw.find("{", i + 1)
            continue
        if isinstance(obj, dict) and "token_class" in obj and "reason" in obj:
            token_class = _CLASS_LITERALS.get(obj["token_class"])
            if token_class is None:
                raise DataError(f"unknown token_class {obj['token_class']!r}")
            return JudgeVerdict(
                match_id=match_id,
                token_class=token_class,
                reason=str(obj["reason"]),
                raw_response=raw,
            )
        i = raw.find("{", i + 1)
    raise DataError("no parseable verdict object in response")


def render_verdict(verdict: JudgeVerdict) -> str:
    """Inverse of parse_verdict for round-trip checks."""
    literal = {v: k for k, v in _CLASS_LITERALS.items()}[verdict.token_class]
    return json.dumps({"token_class": literal, "reason": verdict.reason})


# -- evaluation ---------------------------------------------------------------

JUDGE_AXIS = (JudgeClass.TRUE_POSITIVE, JudgeClass.FALSE_POSITIVE, JudgeClass.UNCERTAIN)
HUMAN_AXIS = (Consensus.MATCH, Consensus.MISMATCH, Consensus.UNCERTAIN)


@dataclass
class EvalReport:
    contingency_3x3: list[list[int]]  # judge rows (match/mismatch/uncertain) x human cols
    grouping: str
    confusion_2x2: dict[str, int]  # tp, fp, fn, tn
    mcc: float
    mcc_degenerate: bool = False

    def to_json(self) -> str:
        return json.dumps(
            {
                "contingency_3x3": self.contingency_3x3,
                "grouping": self.grouping,
                "confusion_2x2": self.confusion_2x2,
                "mcc": self.mcc,
                "mcc_degenerate": self.mcc_degenerate,
            },
            sort_keys=True,
            indent=2,
        ) + "\n"


def matthews_corrcoef(tp: int, fp: int, fn: int, tn: int) -> tuple[float, bool]:
    """MCC with the 0-on-degenerate-marginal convention; returns (value, degenerate)."""
    marginals = [tp + fp, tp + fn, tn + fp, tn + fn]
    if any(m == 0 for m in marginals):
        return 0.0, True
    numerator = tp * tn - fp * fn
    denominator = math.sqrt(math.prod(marginals))
    return numerator / denominator, False


def evaluate_table(
    table: Sequence[Sequence[int]], grouping: str = "uncertain_as_negative"
) -> EvalReport:
    """Score a judge-vs-human 3x3 contingency table under the chosen grouping."""
    t = np.asarray(table, dtype=int)
    if t.shape != (3, 3):
        raise DataError("contingency table must be 3x3")
    if grouping == "uncertain_as_negative":
        tp = int(t[0, 0])
        fp = int(t[0, 1] + t[0, 2])
        fn = int(t[1, 0] + t[2, 0])
        tn = int(t[1, 1] + t[1, 2] + t[2, 1] + t[2, 2])
    elif grouping == "discard_uncertain":
        tp, fp, fn, tn = int(t[0, 0]), int(t[0, 1]), int(t[1, 0]), int(t[1, 1])
    else:
        raise DataError(f"unknown grouping {grouping!r}")
    mcc, degenerate = matthews_corrcoef(tp, fp, fn, tn)
    return EvalReport(
        contingency_3x3=t.tolist(),
        grouping=grouping,
        confusion_2x2={"tp": tp, "fp": fp, "fn": fn, "tn": tn},
        mcc=mcc,
        mcc_degenerate=degenerate,
    )


def evaluate(
    judge_verdicts: Iterable[JudgeVerdict],
    consensus: Iterable[ConsensusRecord],
    grouping: str = "uncertain_as_negative",
) -> EvalReport:
    """Build the judge-vs-consensus contingency table and score it."""
    judge_by_id = {v.match_id: v for v in judge_verdicts}
    human_by_id = {c.match_id: c for c in consensus}
    if set(judge_by_id) != set(human_by_id):
        only_judge = len(set(judge_by_id) - set(human_by_id))
        only_human = len(set(human_by_id) - set(judge_by_id))
        raise DataError(
            f"verdicts and consensus cover different matches "
            f"({only_judge} judge-only, {only_human} human-only)"
        )
    table = [[0, 0, 0], [0, 0, 0], [0, 0, 0]]
    for match_id, verdict in judge_by_id.items():
        row = JUDGE_AXIS.index(verdict.token_class)
        col = HUMAN_AXIS.index(human_by_id[match_id].consensus)
        table[row][col] += 1
    return evaluate_table(table, grouping)


# -- judge runs ---------------------------------------------------------------


@dataclass
class JudgeClientConfig:
    endpoint: str = ""
    model: str = ""
    auth_env: str = "AUTH_TOKEN"
    rate_limit_per_s: float = 2.0
    retries: int = 3
    timeout_s: float = 60.0
    max_parallel: int = 4
    mock_path: str = ""


@dataclass
class JudgeRunResult:
    verdicts: list[JudgeVerdict]
    failed: list[str] = field(default_factory=list)


class _TokenBucket:
    def __init__(self, rate_per_s: float, burst: int = 1):
        self.rate = max(rate_per_s, 1e-9)
        self.capacity = max(burst, 1)
        self.tokens = float(self.capacity)
        self.updated = time.monotonic()
        self.lock = threading.Lock()

    def acquire(self) -> None:
        while True:
            with self.lock:
                now = time.monotonic()
                self.tokens = min(self.capacity, self.tokens + (now - self.updated) * self.rate)
                self.updated = now
                if self.tokens >= 1.0:
                    self.tokens -= 1.0
                    return
                wait = (1.0 - self.tokens) / self.rate
            time.sleep(wait)


def _load_mock_fixture(path: str | Path) -> dict[str, JudgeVerdict]:
    fixture = {}
    with open(path, encoding="utf-8") as f:
        for line in f:
            if line.strip():
                verdict = JudgeVerdict.from_dict(json.loads(line))
                fixture[verdict.match_id] = verdict
    return fixture


def run_judge(
    matches: Sequence[TermMatch],
    posts_by_id: Mapping[str, Post],
    config: JudgeClientConfig,
    guidelines: str = DEFAULT_GUIDELINES,
) -> JudgeRunResult:
    """One verdict per match, via HTTP or a mock fixture; failures do not abort the run."""
    if config.mock_path:
        fixture = _load_mock_fixture(config.mock_path)
        result = JudgeRunResult([])
        for match in matches:
            verdict = fixture.get(match.match_id)
            if verdict is None:
                result.failed.append(match.match_id)
            else:
                result.verdicts.append(verdict)
        result.verdicts.sort(key=lambda v: v.match_id)
        return result

    if not config.endpoint:
        raise DataError("judge endpoint not configured (or use mock mode)")
    token = os.environ.get(config.auth_env, "")
    if not token:
        raise DataError(f"auth token environment variable {config.auth_env} is unset")

    bucket = _TokenBucket(config.rate_limit_per_s, burst=config.max_parallel)
    headers = {"Authorization": f"Bearer {token}", "Content-Type": "application/json"}

    def ask(match: TermMatch) -> JudgeVerdict:
        prompt = build_prompt(match, posts_by_id[match.post_id], guidelines)
        payload = {
            "model": config.model,
            "messages": [
                {"role": "system", "content": prompt.system_text},
                {"role": "user", "content": prompt.user_text},
            ],
        }
        delay = 1.0
        last_error: Exception | None = None
        for attempt in range(config.retries + 1):
            bucket.acquire()
            try:
                response = httpx.post(
                    config.endpoint, json=payload, headers=headers, timeout=config.timeout_s
                )
                response.raise_for_status()
                content = response.json()["choices"][0]["message"]["content"]
                return parse_verdict(content, match.match_id)
            except (httpx.HTTPError, KeyError, DataError) as exc:
                last_error = exc
                if attempt < config.retries:
                    time.sleep(delay)
                    delay *= 2
        raise DataError(f"judge call failed for {match.match_id}: {last_error}")

    result = JudgeRunResult([])
    with ThreadPoolExecutor(max_workers=config.max_parallel) as pool:
        futures = {pool.submit(ask, m): m for m in matches}
        for future, match in futures.items():
            try:
                result.verdicts.append(future.result())
            except DataError as exc:
                log.warning("%s", exc)
                result.failed.append(match.match_id)
    result.verdicts.sort(key=lambda v: v.match_id)
    result.failed.sort()
    return result


def save_verdicts(verdicts: Iterable[JudgeVerdict], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for v in verdicts:
            f.write(json.dumps(v.to_dict(), sort_keys=True) + "\n")


def load_verdicts(path: str | Path) -> list[JudgeVerdict]:
    out = []
    with open(path, encoding="utf-8") as f:
        for line in f:
            if line.strip():
                out.append(JudgeVerdict.from_dict(json.loads(line)))
    return out
