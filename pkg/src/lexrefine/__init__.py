"""Dictionary tagging, annotation-driven lexicon refinement, and network impact analysis."""

from .annotation import (
    AnnotationSession,
    Consensus,
    ConsensusRecord,
    FprRecord,
    FprTable,
    Label,
    Verdict,
    cohen_kappa,
    compute_fpr,
    create_session,
    kappa_from_table,
    select_removable,
)
from .corpus import AnnotationSample, Corpus, CorpusHandle, Post, ingest, sample_matched_posts
from .errors import DataError
from .judge import (
    EvalReport,
    JudgeClass,
    JudgeClientConfig,
    JudgeVerdict,
    build_prompt,
    evaluate,
    evaluate_table,
    parse_verdict,
    run_judge,
)
from .lexicon import (
    Category,
    Lexicon,
    LexiconEntry,
    WordFrequencyList,
    apply_ledger,
    build_lexicon,
    load_lexicon,
    load_word_frequencies,
    normalize_term,
)
from .network import (
    CentralityResult,
    CoMentionGraph,
    RankedList,
    build_network,
    eigenvector_centrality,
    top_k,
)
from .rankcompare import (
    NullModelReport,
    common_elements_ratio,
    fagin_k,
    max_fagin_distance,
    normalized_fagin_k,
    run_null_model,
)
from .tagger import MatchSet, Matcher, TermMatch, Token, build_matcher, tag_corpus, tag_post, tokenize

__version__ = "0.1.0"
