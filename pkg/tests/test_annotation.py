import itertools

import numpy as np
import pytest

from conftest import make_corpus
from lexrefine.annotation import (
    AnnotationSession,
    Consensus,
    ConsensusRecord,
    FprTable,
    Label,
    Verdict,
    cohen_kappa,
    compute_fpr,
    create_session,
    kappa_from_table,
    pair_consensus,
    select_removable,
)
from lexrefine.corpus import AnnotationSample, sample_matched_posts
from lexrefine.errors import DataError
from lexrefine.lexicon import Category, build_lexicon
from lexrefine.tagger import build_matcher, tag_corpus


def sample_of(n_matches: int) -> AnnotationSample:
    return AnnotationSample(
        sample_id="s1",
        seed=0,
        post_ids=tuple(f"p{i}" for i in range(n_matches)),
        match_ids=tuple(f"m{i}" for i in range(n_matches)),
        counts_by_category={},
    )


# -- sessions ------------------------------------------------------------------


def test_two_annotators_get_everything():
    session = create_session(sample_of(4), ["a1", "a2"])
    assert all(set(pair) == {"a1", "a2"} for pair in session.assignment.values())


def test_assignment_balanced_within_one():
    session = create_session(sample_of(100), ["a1", "a2", "a3", "a4"], seed=5)
    loads = session.workload()
    assert all(len(set(pair)) == 2 for pair in session.assignment.values())
    assert max(loads.values()) - min(loads.values()) <= 1
    assert sum(loads.values()) == 200


def test_session_creation_deterministic():
    a = create_session(sample_of(30), ["x", "y", "z"], seed=11)
    b = create_session(sample_of(30), ["x", "y", "z"], seed=11)
    assert a.assignment == b.assignment


def test_session_rejects_bad_inputs():
    with pytest.raises(DataError):
        create_session(sample_of(3), ["only-one"])
    with pytest.raises(DataError):
        create_session(sample_of(0), ["a1", "a2"])


def test_record_label_flow():
    session = create_session(sample_of(2), ["a1", "a2"])
    session.record_label(Label("m0", "a1", Verdict.TRUE_POSITIVE))
    assert len(session.labels) == 1 and len(session.audit) == 1
    # overwrite keeps one active label but two audit entries
    session.record_label(Label("m0", "a1", Verdict.FALSE_POSITIVE))
    assert len(session.labels) == 1 and len(session.audit) == 2
    assert session.labels[("m0", "a1")].verdict is Verdict.FALSE_POSITIVE
    with pytest.raises(DataError, match="not assigned"):
        session.record_label(Label("m0", "intruder", Verdict.UNCLEAR))
    with pytest.raises(DataError, match="unknown match"):
        session.record_label(Label("zz", "a1", Verdict.UNCLEAR))


def test_closed_session_rejects_labels():
    session = create_session(sample_of(1), ["a1", "a2"])
    session.record_label(Label("m0", "a1", Verdict.TRUE_POSITIVE))
    session.record_label(Label("m0", "a2", Verdict.TRUE_POSITIVE))
    assert session.status == "complete"
    with pytest.raises(DataError, match="closed"):
        session.record_label(Label("m0", "a1", Verdict.UNCLEAR))


def test_blinding_getters():
    session = create_session(sample_of(2), ["a1", "a2"])
    session.record_label(Label("m0", "a2", Verdict.FALSE_POSITIVE))
    mine = session.labels_of("a1")
    assert mine == []
    assert {l.annotator_id for l in session.labels_of("a2")} == {"a2"}
    with pytest.raises(DataError):
        session.consensus()


def test_session_roundtrip():
    session = create_session(sample_of(3), ["a1", "a2"])
    session.record_label(Label("m0", "a1", Verdict.TRUE_POSITIVE))
    again = AnnotationSession.from_dict(session.to_dict())
    assert again.assignment == session.assignment
    assert again.labels.keys() == session.labels.keys()


# -- consensus -----------------------------------------------------------------


def test_consensus_exhaustive_lookup():
    expected = {
        (Verdict.TRUE_POSITIVE, Verdict.TRUE_POSITIVE): Consensus.MATCH,
        (Verdict.FALSE_POSITIVE, Verdict.FALSE_POSITIVE): Consensus.MISMATCH,
    }
    for a, b in itertools.product(Verdict, repeat=2):
        assert pair_consensus(a, b) is expected.get((a, b), Consensus.UNCERTAIN)


def test_adjudication_overrides():
    session = create_session(sample_of(1), ["a1", "a2"])
    with pytest.raises(DataError):
        session.adjudicate("m0", Consensus.MATCH, "boss")
    session.record_label(Label("m0", "a1", Verdict.TRUE_POSITIVE))
    session.record_label(Label("m0", "a2", Verdict.FALSE_POSITIVE))
    assert session.consensus()[0].consensus is Consensus.UNCERTAIN
    assert session.disagreements() == ["m0"]
    session.adjudicate("m0", Consensus.MATCH, "boss")
    assert session.status == "adjudicated"
    assert session.effective_consensus()[0].consensus is Consensus.MATCH
    assert session.consensus()[0].consensus is Consensus.UNCERTAIN  # raw view unchanged


# -- kappa ---------------------------------------------------------------------


def test_kappa_perfect_agreement():
    assert cohen_kappa(list("TTFFU"), list("TTFFU")) == 1.0


def test_kappa_worked_example():
    a = ["T"] * 5 + ["F"] * 3 + ["T", "F"]
    b = ["T"] * 5 + ["F"] * 3 + ["F", "T"]
    assert cohen_kappa(a, b) == pytest.approx(0.28 / 0.48)


def test_kappa_from_contingency_table():
    # 3x3 master-vs-pool agreement table, N=1500
    table = [[1041, 75, 47], [29, 203, 14], [61, 22, 8]]
    assert kappa_from_table(table) == pytest.approx(0.5647, abs=5e-4)


def test_kappa_symmetry():
    rng = np.random.default_rng(4)
    a = list(rng.choice(["T", "F", "U"], size=200))
    b = list(rng.choice(["T", "F", "U"], size=200))
    assert cohen_kappa(a, b) == pytest.approx(cohen_kappa(b, a))


def test_kappa_independent_labelers_near_zero():
    rng = np.random.default_rng(99)
    a = list(rng.choice(["T", "F", "U"], size=10_000, p=[0.6, 0.3, 0.1]))
    b = list(rng.choice(["T", "F", "U"], size=10_000, p=[0.6, 0.3, 0.1]))
    assert abs(cohen_kappa(a, b)) < 0.05


def test_kappa_validation():
    with pytest.raises(DataError):
        cohen_kappa(["T"], ["T", "F"])
    with pytest.raises(DataError):
        cohen_kappa([], [])
    with pytest.raises(DataError):
        cohen_kappa(["T"], ["X"], classes=["T", "F"])


# -- false-positive rates --------------------------------------------------------


def annotated_fixture():
    lexicon = build_lexicon(
        [
            ("hot", "Feeling hot", Category.MEDICAL_TERM, "f"),
            ("brix", "P-brix", Category.DRUG, "f"),
        ]
    )
    corpus = make_corpus(["hot brix", "so hot", "brix day", "hot again"])
    matches = tag_corpus(build_matcher(lexicon), corpus)
    return matches


def test_compute_fpr_counts():
    matches = annotated_fixture()
    verdict_for = {
        "hot": [Consensus.MISMATCH, Consensus.UNCERTAIN, Consensus.MATCH],
        "brix": [Consensus.MATCH, Consensus.MATCH],
    }
    consensus = []
    seen = {"hot": 0, "brix": 0}
    for m in matches.matches:
        consensus.append(ConsensusRecord(m.match_id, verdict_for[m.child_term][seen[m.child_term]]))
        seen[m.child_term] += 1
    table = compute_fpr(consensus, matches)
    by_child = {r.child_term: r for r in table.rows}
    assert by_child["hot"].sample_frequency == 3
    assert by_child["hot"].fp_count == 2
    assert by_child["hot"].fpr == pytest.approx(2 / 3)
    assert by_child["hot"].corpus_frequency == 3
    assert by_child["brix"].fpr == 0.0
    strict = compute_fpr(consensus, matches, strict=True)
    assert {r.child_term: r.fp_count for r in strict.rows}["hot"] == 1
    # parent-level aggregation mirrors the child rows here (one child per parent)
    assert {r.parent_term for r in table.parent_rows} == {"feeling hot", "p-brix"}
    fp, n = table.category_totals[Category.MEDICAL_TERM]
    assert (fp, n) == (2, 3)


def test_compute_fpr_unknown_match():
    matches = annotated_fixture()
    with pytest.raises(DataError):
        compute_fpr([ConsensusRecord("ghost", Consensus.MATCH)], matches)


def test_compute_fpr_never_zero_over_zero():
    matches = annotated_fixture()
    table = compute_fpr([], matches)
    assert table.rows == []


def test_fpr_monotonicity():
    matches = annotated_fixture()
    consensus = [ConsensusRecord(m.match_id, Consensus.MATCH) for m in matches.matches]
    base = {r.child_term: r.fpr for r in compute_fpr(consensus, matches).rows}
    flipped = consensus[:]
    flipped[0] = ConsensusRecord(consensus[0].match_id, Consensus.MISMATCH)
    bumped = {r.child_term: r.fpr for r in compute_fpr(flipped, matches).rows}
    assert all(bumped[c] >= base[c] for c in base)


def test_fpr_table_tsv_roundtrip():
    matches = annotated_fixture()
    consensus = [ConsensusRecord(m.match_id, Consensus.MISMATCH) for m in matches.matches]
    table = compute_fpr(consensus, matches)
    again = FprTable.from_tsv(table.to_tsv())
    assert [(r.child_term, r.sample_frequency, r.fp_count) for r in again.rows] == [
        (r.child_term, r.sample_frequency, r.fp_count) for r in table.rows
    ]


# -- removal selection -----------------------------------------------------------

PUBLISHED_ROWS = [
    # child, parent, category, sample_frequency, fpr
    ("hot", "feeling hot", Category.MEDICAL_TERM, 147, 0.96),
    ("cold", "nasopharyngitis", Category.MEDICAL_TERM, 67, 0.94),
    ("euphoria", "euphoric mood", Category.MEDICAL_TERM, 47, 1.00),
    ("valium", "diazepam", Category.DRUG, 36, 0.58),
    ("death", "death", Category.MEDICAL_TERM, 32, 0.50),
    ("rose", "rose", Category.NATURAL_PRODUCT, 28, 0.86),
    ("orange", "orange", Category.ALLERGEN, 27, 0.81),
    ("ginger", "ginger", Category.ALLERGEN, 25, 0.56),
]


def published_table(extra=()) -> FprTable:
    from lexrefine.annotation import FprRecord

    rows = [
        FprRecord(child, parent, category, freq, round(fpr * freq), fpr, freq * 100)
        for child, parent, category, freq, fpr in PUBLISHED_ROWS
    ]
    rows += list(extra)
    table = FprTable(rows)
    table._fill_totals()
    return table


def test_select_removable_published_eight():
    table = published_table()
    picked = select_removable(table, 0.5, 20)
    assert picked == [(child, category) for child, _, category, _, _ in PUBLISHED_ROWS]


def test_select_removable_boundaries():
    from lexrefine.annotation import FprRecord

    table = published_table(
        extra=[
            FprRecord("megafreq", "megafreq", Category.DRUG, 10**6, 490000, 0.49, 10**6),
            FprRecord("edge", "edge", Category.DRUG, 20, 10, 0.50, 2000),
        ]
    )
    picked = select_removable(table, 0.5, 20)
    names = [c for c, _ in picked]
    assert "megafreq" not in names
    assert "edge" in names


def test_select_removable_monotone():
    table = published_table()
    base = set(select_removable(table, 0.5, 20))
    assert set(select_removable(table, 0.6, 20)) <= base
    assert set(select_removable(table, 0.5, 30)) <= base
    assert set(select_removable(table, 0.9, 100)) <= base
