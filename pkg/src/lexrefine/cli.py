"""Command-line entry point for the full pipeline.

Every stage reads and writes plain files, so re-running a stage with unchanged
inputs reproduces its outputs byte for byte. Stochastic stages require --seed.
Exit codes: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import __version__
from .annotation import (
    AnnotationSession,
    FprTable,
    cohen_kappa,
    compute_fpr,
    create_session,
    select_removable,
)
from .corpus import AnnotationSample, CorpusStore, ingest, sample_matched_posts
from .errors import DataError
from .judge import (
    JudgeClientConfig,
    evaluate,
    load_verdicts,
    run_judge,
    save_verdicts,
)
from .lexicon import (
    Category,
    load_lexicon,
    load_ledger,
    load_word_frequencies,
    parse_category,
)
from .network import CoMentionGraph, RankedList, build_network, eigenvector_centrality, top_k
from .rankcompare import (
    DEFAULT_K_VALUES,
    NullModelReport,
    common_elements_ratio,
    fagin_k,
    normalized_fagin_k,
    run_null_model,
)
from .tagger import MatchSet, build_matcher, tag_corpus

log = logging.getLogger("lexrefine")


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors exit 1, not argparse's default 2
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        sys.exit(1)


def _read_selected(path: str) -> list[tuple[str, Category]]:
    pairs = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line or line.startswith("child_term\t"):
            continue
        child, category = line.split("\t")[:2]
        pairs.append((child, parse_category(category)))
    return pairs


def _write_selected(pairs, path: str) -> None:
    lines = ["child_term\tcategory"]
    lines += [f"{child}\t{category.value}" for child, category in pairs]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _load_corpus(store_or_file: str):
    path = Path(store_or_file)
    if path.is_dir():
        store = CorpusStore(path)
        handles = store.handles()
        if not handles:
            raise DataError(f"no corpus in store {path}")
        return store.get(handles[0].corpus_id)
    return ingest(path)


def _load_session(path: str) -> AnnotationSession:
    return AnnotationSession.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


# -- subcommand implementations ------------------------------------------------


def cmd_ingest(args) -> int:
    corpus = ingest(args.path)
    store = CorpusStore(args.out)
    handle = store.add(corpus)
    print(json.dumps(handle.__dict__, sort_keys=True))
    return 0


def cmd_lexicon(args) -> int:
    lexicon = load_lexicon(args.path)
    if args.action == "load":
        refined = lexicon
    elif args.action == "filter":
        if not args.freq_list:
            raise DataError("lexicon filter needs --freq-list")
        freqs = load_word_frequencies(args.freq_list)
        refined = lexicon.filter_common_words(freqs, args.threshold)
    else:  # remove
        if not args.terms:
            raise DataError("lexicon remove needs --terms")
        pairs = _read_selected(args.terms)
        refined = lexicon.remove_terms(pairs, with_synonyms=args.with_synonyms)
    if args.out:
        refined.save(args.out, args.ledger)
    counts = refined.category_counts()
    print(
        json.dumps(
            {
                "entries": len(refined),
                "version": refined.version,
                "removed": len(refined.removal_ledger),
                "by_category": {c.value: n for c, n in counts.items()},
            },
            sort_keys=True,
        )
    )
    return 0


def cmd_tag(args) -> int:
    corpus = _load_corpus(args.corpus)
    lexicon = load_lexicon(args.lexicon)
    matcher = build_matcher(lexicon)
    matches = tag_corpus(matcher, corpus)
    matches.save(args.out)
    if args.freq_out:
        matches.save_frequencies(args.freq_out, level="child")
    if args.parent_freq_out:
        matches.save_frequencies(args.parent_freq_out, level="parent")
    print(
        json.dumps(
            {
                "corpus_id": corpus.corpus_id,
                "lexicon_version": lexicon.version,
                "total_matches": matches.total_matches,
            },
            sort_keys=True,
        )
    )
    return 0


def cmd_sample(args) -> int:
    corpus = _load_corpus(args.corpus)
    matches = MatchSet.load(args.matches, corpus.corpus_id)
    sample = sample_matched_posts(corpus, matches, args.n_posts, args.seed)
    Path(args.out).write_text(sample.to_manifest(), encoding="utf-8")
    print(
        json.dumps(
            {
                "sample_id": sample.sample_id,
                "posts": len(sample.post_ids),
                "matches": len(sample.match_ids),
                "counts_by_category": sample.counts_by_category,
            },
            sort_keys=True,
        )
    )
    return 0


def cmd_serve(args) -> int:
    from .service import serve

    serve(args.bind, args.data_dir, args.static_dir)
    return 0


def cmd_stats(args) -> int:
    if args.action == "kappa":
        session = _load_session(args.session)
        pairs = session.verdict_pairs()
        kappa = cohen_kappa([a for _, a, _ in pairs], [b for _, _, b in pairs])
        print(json.dumps({"kappa": kappa, "items": len(pairs)}, sort_keys=True))
        return 0
    if args.action == "fpr":
        session = _load_session(args.session)
        matches = MatchSet.load(args.matches)
        table = compute_fpr(session.effective_consensus(), matches, strict=args.strict)
        Path(args.out).write_text(table.to_tsv(), encoding="utf-8")
        if args.parent_out:
            parent_view = FprTable(table.parent_rows)
            Path(args.parent_out).write_text(parent_view.to_tsv(), encoding="utf-8")
        totals = {
            c.value: {"fp": fp, "n": n, "rate": fp / n if n else 0.0}
            for c, (fp, n) in sorted(table.category_totals.items(), key=lambda kv: kv[0].value)
        }
        print(json.dumps({"rows": len(table.rows), "category_totals": totals}, sort_keys=True))
        return 0
    # select
    table = FprTable.from_tsv(Path(args.fpr).read_text(encoding="utf-8"))
    picked = select_removable(table, args.fpr_min, args.freq_min)
    if args.out:
        _write_selected(picked, args.out)
    for child, category in picked:
        print(f"{child}\t{category.value}")
    return 0


def cmd_network(args) -> int:
    if args.action == "build":
        matches = MatchSet.load(args.matches)
        graph = build_network(matches)
        graph.save(args.out)
        print(
            json.dumps(
                {"nodes": len(graph.nodes), "edges": graph.edge_count}, sort_keys=True
            )
        )
        return 0
    # centrality
    graph = CoMentionGraph.from_tsv(Path(args.edges).read_text(encoding="utf-8"))
    result = eigenvector_centrality(graph, args.tolerance, args.max_iterations)
    ranked = top_k(result, args.top)
    Path(args.out).write_text(ranked.to_tsv(), encoding="utf-8")
    print(
        json.dumps(
            {
                "dominant_eigenvalue": result.dominant_eigenvalue,
                "iterations": result.iterations,
                "ranked": len(ranked.items),
            },
            sort_keys=True,
        )
    )
    return 0


def cmd_compare(args) -> int:
    list_a = RankedList.from_tsv(Path(args.a).read_text(encoding="utf-8"))
    list_b = RankedList.from_tsv(Path(args.b).read_text(encoding="utf-8"))
    if args.action == "cer":
        print(f"CER {common_elements_ratio(list_a, list_b):.6f}")
        return 0
    distance = fagin_k(list_a, list_b, args.p)
    print(f"K {distance:g}")
    if args.normalized:
        print(f"K_norm {normalized_fagin_k(list_a, list_b, args.p):.6f}")
    return 0


def cmd_nullmodel(args) -> int:
    matches = MatchSet.load(args.matches)
    table = FprTable.from_tsv(Path(args.fpr).read_text(encoding="utf-8"))
    if args.selected:
        selected = _read_selected(args.selected)
    else:
        selected = select_removable(table, args.fpr_min, args.freq_min)
    rebuild = None
    if args.retag:
        if not (args.corpus and args.lexicon):
            raise DataError("--retag needs --corpus and --lexicon")
        corpus = _load_corpus(args.corpus)
        lexicon = load_lexicon(args.lexicon)

        def rebuild(removed):
            refined = lexicon.remove_terms(removed)
            return tag_corpus(build_matcher(refined), corpus)

    report = run_null_model(
        matches,
        table,
        selected,
        n_samples=args.n_samples,
        sample_size=args.sample_size,
        freq_floor=args.freq_floor,
        seed=args.seed,
        k_values=args.k_values,
        penalty=args.p,
        rebuild=rebuild,
    )
    Path(args.out).write_text(report.to_json(), encoding="utf-8")
    if args.tsv_out:
        Path(args.tsv_out).write_text(report.to_tsv(), encoding="utf-8")
    print(report.to_tsv(), end="")
    return 0


def cmd_judge(args) -> int:
    if args.action == "run":
        corpus = _load_corpus(args.corpus)
        matches = MatchSet.load(args.matches)
        wanted = matches.matches
        if args.sample:
            sample = AnnotationSample.from_manifest(
                Path(args.sample).read_text(encoding="utf-8")
            )
            ids = set(sample.match_ids)
            wanted = [m for m in matches.matches if m.match_id in ids]
        config = JudgeClientConfig(
            endpoint=args.endpoint,
            model=args.model,
            auth_env=args.auth_env,
            rate_limit_per_s=args.rate_limit,
            retries=args.retries,
            max_parallel=args.threads,
            mock_path=args.mock or "",
        )
        posts = {p.post_id: p for p in corpus.posts}
        result = run_judge(wanted, posts, config)
        save_verdicts(result.verdicts, args.out)
        print(
            json.dumps(
                {"verdicts": len(result.verdicts), "failed": len(result.failed)},
                sort_keys=True,
            )
        )
        return 0 if not result.failed else 2
    # evaluate
    verdicts = load_verdicts(args.verdicts)
    session = _load_session(args.session)
    consensus = session.effective_consensus()
    ids = {v.match_id for v in verdicts}
    consensus = [c for c in consensus if c.match_id in ids]
    report = evaluate(verdicts, consensus, args.grouping)
    print(report.to_json(), end="")
    return 0


def cmd_report(args) -> int:
    out_dir = Path(args.dir)
    sections = []
    original = out_dir / "centrality_original.tsv"
    refined = out_dir / "centrality_refined.tsv"
    if original.exists() and refined.exists():
        a = RankedList.from_tsv(original.read_text(encoding="utf-8"))
        b = RankedList.from_tsv(refined.read_text(encoding="utf-8"))
        lines = ["Top terms by eigenvector centrality (original vs refined)"]
        lines.append(f"{'rank':>4}  {'original':<28}{'score':>8}   {'refined':<28}{'score':>8}")
        for i in range(min(20, len(a.items), len(b.items))):
            ra, na, sa = a.items[i]
            rb, nb, sb = b.items[i]
            lines.append(f"{ra:>4}  {na:<28}{sa:>8.3f}   {nb:<28}{sb:>8.3f}")
        sections.append("\n".join(lines))
    nullmodel = out_dir / "nullmodel.json"
    if nullmodel.exists():
        obj = json.loads(nullmodel.read_text(encoding="utf-8"))
        lines = ["Rank distance of refinement vs random removals"]
        lines.append(f"{'k':>5} {'K_refined':>10} {'K_random':>18} {'p_value':>8}")
        for c in obj["comparisons"]:
            lines.append(
                f"{c['k']:>5} {c['K_refined']:>10g} "
                f"{c['mean_K_random']:>10.1f} +- {c['std_K_random']:<5.1f} {c['p_value']:>8.3f}"
            )
        sections.append("\n".join(lines))
    if not sections:
        raise DataError(f"no renderable results under {out_dir}")
    text = ("\n\n".join(sections)) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    print(text, end="")
    return 0


# -- argument wiring -------------------------------------------------------------


def _k_values(text: str) -> tuple[int, ...]:
    return tuple(int(v) for v in text.split(",") if v.strip())


def build_parser() -> _Parser:
    parser = _Parser(prog="lexrefine", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--config", help="TOML file supplying defaults for any flag")
    parser.add_argument("--threads", type=int, default=4, help="global parallelism cap")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="ingest a JSONL corpus into a store")
    p.add_argument("path")
    p.add_argument("--out", required=True, help="store directory")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("lexicon", help="load, filter, or refine a lexicon TSV")
    p.add_argument("action", choices=["load", "filter", "remove"])
    p.add_argument("path")
    p.add_argument("--out")
    p.add_argument("--ledger")
    p.add_argument("--freq-list", help="word frequency TSV (filter)")
    p.add_argument("--threshold", type=float, default=50.0, help="per-million cutoff (filter)")
    p.add_argument("--terms", help="TSV of child_term/category pairs (remove)")
    p.add_argument("--with-synonyms", action="store_true")
    p.set_defaults(func=cmd_lexicon)

    p = sub.add_parser("tag", help="tag a corpus with a lexicon")
    p.add_argument("--corpus", required=True)
    p.add_argument("--lexicon", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--freq-out")
    p.add_argument("--parent-freq-out")
    p.set_defaults(func=cmd_tag)

    p = sub.add_parser("sample", help="sample matched posts for annotation")
    p.add_argument("--corpus", required=True)
    p.add_argument("--matches", required=True)
    p.add_argument("--n-posts", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("serve", help="run the annotation HTTP service")
    p.add_argument("--bind", default="127.0.0.1:8422")
    p.add_argument("--data-dir", required=True)
    p.add_argument("--static-dir")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("stats", help="agreement, FPR table, or removal selection")
    p.add_argument("action", choices=["kappa", "fpr", "select"])
    p.add_argument("--session")
    p.add_argument("--matches")
    p.add_argument("--out")
    p.add_argument("--parent-out", help="also write the per-parent aggregation (fpr)")
    p.add_argument("--strict", action="store_true", help="count Mismatch only as FP")
    p.add_argument("--fpr", help="FPR table TSV (select)")
    p.add_argument("--fpr-min", type=float, default=0.5)
    p.add_argument("--freq-min", type=int, default=20)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("network", help="build the co-mention network / rank centrality")
    p.add_argument("action", choices=["build", "centrality"])
    p.add_argument("--matches")
    p.add_argument("--edges")
    p.add_argument("--out", required=True)
    p.add_argument("--top", type=int, default=500)
    p.add_argument("--tolerance", type=float, default=1e-12)
    p.add_argument("--max-iterations", type=int, default=100_000)
    p.set_defaults(func=cmd_network)

    p = sub.add_parser("compare", help="compare two top-k ranking files")
    p.add_argument("action", choices=["cer", "fagin"])
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--p", type=float, default=0.5)
    p.add_argument("--normalized", action="store_true")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("nullmodel", help="random-removal null model")
    p.add_argument("--matches", required=True)
    p.add_argument("--fpr", required=True)
    p.add_argument("--selected", help="TSV of removed terms; default: select by thresholds")
    p.add_argument("--fpr-min", type=float, default=0.5)
    p.add_argument("--freq-min", type=int, default=20)
    p.add_argument("--n-samples", type=int, default=1000)
    p.add_argument("--sample-size", type=int, default=8)
    p.add_argument("--freq-floor", type=int)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--k-values", type=_k_values, default=DEFAULT_K_VALUES)
    p.add_argument("--p", type=float, default=0.5)
    p.add_argument("--retag", action="store_true", help="re-tag instead of filtering matches")
    p.add_argument("--corpus")
    p.add_argument("--lexicon")
    p.add_argument("--out", required=True)
    p.add_argument("--tsv-out")
    p.set_defaults(func=cmd_nullmodel)

    p = sub.add_parser("judge", help="run or evaluate a machine judge")
    p.add_argument("action", choices=["run", "evaluate"])
    p.add_argument("--corpus")
    p.add_argument("--matches")
    p.add_argument("--sample")
    p.add_argument("--endpoint", default="")
    p.add_argument("--model", default="")
    p.add_argument("--auth-env", default="AUTH_TOKEN")
    p.add_argument("--rate-limit", type=float, default=2.0)
    p.add_argument("--retries", type=int, default=3)
    p.add_argument("--mock", help="fixture JSONL for offline runs")
    p.add_argument("--out")
    p.add_argument("--verdicts")
    p.add_argument("--session")
    p.add_argument(
        "--grouping",
        choices=["uncertain_as_negative", "discard_uncertain"],
        default="uncertain_as_negative",
    )
    p.set_defaults(func=cmd_judge)

    p = sub.add_parser("report", help="render result tables from a pipeline directory")
    p.add_argument("--dir", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_report)

    return parser


def _apply_config(parser: _Parser, argv: list[str]) -> None:
    """Feed TOML values in as argparse defaults; explicit flags still win."""
    if "--config" not in argv:
        return
    path = argv[argv.index("--config") + 1]
    with open(path, "rb") as f:
        config = tomllib.load(f)
    flat: dict = {}
    for key, value in config.items():
        if isinstance(value, dict):
            flat.update(value)
        else:
            flat[key] = value
    defaults = {k.replace("-", "_"): v for k, v in flat.items()}
    if isinstance(defaults.get("k_values"), list):
        defaults["k_values"] = tuple(defaults["k_values"])
    subparsers = [parser] + [
        sub
        for action in parser._subparsers._group_actions
        if isinstance(action, argparse._SubParsersAction)
        for sub in action.choices.values()
    ]
    for sub in subparsers:
        for action in sub._actions:
            if action.dest in defaults:
                action.default = defaults[action.dest]
                action.required = False


def run(argv: list[str]) -> int:
    parser = build_parser()
    try:
        _apply_config(parser, argv)
    except (OSError, tomllib.TOMLDecodeError, IndexError) as exc:
        sys.stderr.write(f"error: cannot load config: {exc}\n")
        return 1
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # usage errors and --help/--version
        return int(exc.code or 0)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except DataError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except OSError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


def main() -> None:
    sys.exit(run(sys.argv[1:]))
