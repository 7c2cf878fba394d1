"""Command-line entry point.

One binary, six subcommands: featurize, train, eval, attack, mauve,
zipf-plot.  Every output is a file; JSON outputs embed the fully resolved
run configuration, CSV/JSONL outputs get a ``<out>.meta.json`` sidecar.
All randomness flows from --seed (default 0).
"""

from __future__ import annotations

import argparse
import os
import sys
from collections import Counter
from concurrent.futures import ProcessPoolExecutor

from . import MODEL_FORMAT_VERSION, ToolkitError, __version__
from . import attack as attack_mod
from . import mauve as mauve_mod
from . import metrics, pipeline, report
from .corpus import Document
from .featurestore import load_embeddings, read_features_csv, write_features_csv
from .svm import DEFAULT_GRID, LinearModel, grid_search
from .textproc import load_stopwords, process

_RULE_FLAGS = (
    "cliches", "idioms", "archaisms",
    "lemma_exceptions", "suffix_rules", "pos_lexicon", "abbreviations",
)


def _add_doc_inputs(p: argparse.ArgumentParser, with_sampling: bool = True):
    p.add_argument("--docs", help="labeled corpus JSONL")
    p.add_argument("--human", help="human-class corpus JSONL (label forced)")
    p.add_argument("--machine", help="machine-class corpus JSONL (label forced)")
    if with_sampling:
        p.add_argument("--n-per-class", type=int, default=None,
                       help="balanced per-class sample size (seeded)")


def _add_rule_flags(p: argparse.ArgumentParser):
    p.add_argument("--cliches", help="cliche phrase list (default: packaged)")
    p.add_argument("--idioms", help="idiom phrase list (default: packaged)")
    p.add_argument("--archaisms", help="archaism phrase list (default: packaged)")
    p.add_argument("--lemma-exceptions", help="lemma exception TSV (default: packaged)")
    p.add_argument("--suffix-rules", help="suffix rule TSV (default: packaged)")
    p.add_argument("--pos-lexicon", help="POS lexicon TSV (default: packaged)")
    p.add_argument("--abbreviations", help="abbreviation list (default: packaged)")


def _ctx_paths(args) -> dict:
    return {
        "cliches_path": args.cliches,
        "idioms_path": args.idioms,
        "archaisms_path": args.archaisms,
        "lemma_exceptions_path": args.lemma_exceptions,
        "suffix_rules_path": args.suffix_rules,
        "pos_lexicon_path": args.pos_lexicon,
        "abbreviations_path": args.abbreviations,
    }


def _resolved_config(args) -> dict:
    cfg = {k: v for k, v in vars(args).items() if k not in ("func", "command")}
    return {k: v for k, v in sorted(cfg.items())}


def _write_meta(out_path: str, command: str, args) -> None:
    report.write_json(out_path + ".meta.json", {"command": command, "config": _resolved_config(args)})


def _load_docs(args) -> list[Document]:
    return pipeline.load_labeled_docs(
        docs_path=args.docs,
        human_path=args.human,
        machine_path=args.machine,
        n_per_class=getattr(args, "n_per_class", None),
        seed=args.seed,
    )


# ---------------------------------------------------------------------------
# featurize
# ---------------------------------------------------------------------------

def cmd_featurize(args) -> int:
    docs = _load_docs(args)
    ctx_paths = _ctx_paths(args)
    ctx = pipeline.FeaturizeContext.build(**ctx_paths) if args.feature_set != "neural" else None
    emb = load_embeddings(args.embeddings) if args.embeddings else None
    names, schema_id, matrix = pipeline.build_feature_matrix(
        docs, args.feature_set, ctx=ctx, embeddings=emb, jobs=args.jobs, ctx_paths=ctx_paths
    )
    write_features_csv(args.out, [d.id for d in docs], [d.label for d in docs], names, matrix)
    _write_meta(args.out, "featurize", args)
    print(f"featurized {len(docs)} docs -> {args.out} (schema {schema_id})")
    return 0


# ---------------------------------------------------------------------------
# train
# ---------------------------------------------------------------------------

def _schema_for(names) -> str:
    from .statfeat import STAT_FEATURE_NAMES, STAT_SCHEMA_ID

    names = tuple(names)
    if names == STAT_FEATURE_NAMES:
        return STAT_SCHEMA_ID
    if all(n.startswith("e") for n in names):
        return f"neural{len(names)}"
    if names[: len(STAT_FEATURE_NAMES)] == STAT_FEATURE_NAMES:
        return f"{STAT_SCHEMA_ID}+neural{len(names) - len(STAT_FEATURE_NAMES)}"
    raise ToolkitError("cannot infer schema from feature names")


def cmd_train(args) -> int:
    ids, labels, names, matrix = read_features_csv(args.features)
    if not ids:
        raise ToolkitError("no features")
    grid = [float(v) for v in args.grid.split(",") if v.strip()]
    model = grid_search(
        matrix, labels, schema_id=_schema_for(names), feature_names=names,
        grid=grid, folds=args.folds, seed=args.seed,
    )
    model.save(args.out)
    _write_meta(args.out, "train", args)
    print(f"trained on {len(ids)} docs, C={model.c_selected} -> {args.out}")
    return 0


# ---------------------------------------------------------------------------
# eval
# ---------------------------------------------------------------------------

def cmd_eval(args) -> int:
    model = LinearModel.load(args.model)
    if args.features:
        ids, labels, names, matrix = read_features_csv(args.features)
        docs = [Document(id=i, text="(features only)", label=l) for i, l in zip(ids, labels)]
    else:
        docs = _load_docs(args)
        ctx_paths = _ctx_paths(args)
        ctx = pipeline.FeaturizeContext.build(**ctx_paths) if args.feature_set != "neural" else None
        emb = load_embeddings(args.embeddings) if args.embeddings else None
        names, _, matrix = pipeline.build_feature_matrix(
            docs, args.feature_set, ctx=ctx, embeddings=emb, jobs=args.jobs, ctx_paths=ctx_paths
        )
    if tuple(names) != model.feature_names:
        raise ToolkitError("feature schema does not match the model")
    features_by_id = {d.id: row for d, row in zip(docs, matrix)}
    counts, per_doc = metrics.evaluate(model, docs, features_by_id)

    stem = os.path.splitext(args.out)[0]
    weights = model.feature_weights()
    by_mag = model.feature_weights_by_magnitude()
    report.write_json(args.out, {
        "accuracy": metrics.accuracy(counts),
        "f1": metrics.f1(counts),
        "confusion": counts.to_dict(),
        "n_docs": counts.total,
        "model": {"schema_id": model.schema_id, "c_selected": model.c_selected},
        "config": _resolved_config(args),
    })
    report.write_csv(stem + "_predictions.csv",
                     ("id", "label", "predicted", "prob_machine"),
                     [(r["id"], r["label"], r["predicted"], r["prob_machine"]) for r in per_doc])
    report.write_csv(stem + "_weights.csv",
                     ("feature", "weight", "magnitude_rank"),
                     [(name, w, 1 + [n for n, _ in by_mag].index(name)) for name, w in weights])
    report.render_weights_figure(by_mag, stem + "_weights.png")
    print(f"accuracy {metrics.accuracy(counts):.4f}, f1 {metrics.f1(counts):.4f} -> {args.out}")
    return 0


# ---------------------------------------------------------------------------
# attack
# ---------------------------------------------------------------------------

_ATTACK_STATE: dict = {}


def _attack_init(model_path, ctx_paths, cfg_kwargs, kind, embeddings_path, doc_embeddings_path, stopwords_path):
    model = LinearModel.load(model_path)
    ctx = pipeline.FeaturizeContext.build(**ctx_paths)
    stop = load_stopwords(stopwords_path)
    config = attack_mod.AttackConfig(stopwords=stop, **cfg_kwargs)
    index = pipeline.load_word_embeddings(embeddings_path) if embeddings_path else None
    encoder = None
    if doc_embeddings_path:
        encoder = attack_mod.mean_vector_encoder(pipeline.load_word_embeddings(doc_embeddings_path))
    _ATTACK_STATE.update(
        victim=pipeline.make_stat_victim(model, ctx), ctx=ctx, config=config, kind=kind,
        index=index, encoder=encoder,
    )


def _attack_one(doc_tuple):
    doc_id, text, label = doc_tuple
    st = _ATTACK_STATE
    goal = attack_mod.goal_for_label(label)
    if st["kind"] == "dwb":
        res = attack_mod.deepwordbug(st["victim"], doc_id, text, goal, st["config"])
    else:
        res = attack_mod.textfooler(
            st["victim"], doc_id, text, goal, st["config"], st["index"],
            rules=st["ctx"].rules, doc_encoder=st["encoder"],
        )
    return res


def cmd_attack(args) -> int:
    docs = _load_docs(args)
    if args.n is not None:
        if getattr(args, "n_per_class", None) is not None:
            raise ToolkitError("--n and --n-per-class are mutually exclusive")
        if args.n > len(docs):
            raise ToolkitError(f"{len(docs)} documents available, {args.n} requested")
        from .rng import Xorshift64Star

        keep = sorted(Xorshift64Star(args.seed).sample_indices(len(docs), args.n))
        docs = [docs[i] for i in keep]
    if any(d.label is None for d in docs):
        raise ToolkitError("attack requires labeled documents")
    if args.kind == "tf" and not args.embeddings:
        raise ToolkitError("--kind tf requires --embeddings (word vectors)")
    cfg_kwargs = dict(
        max_levenshtein_total=args.max_levenshtein,
        max_candidates_per_word=args.max_candidates,
        min_word_cos=args.min_word_cos,
        query_budget=args.query_budget,
        seed=args.seed,
        min_doc_cos=args.min_doc_cos if args.doc_embeddings else None,
    )
    init_args = (
        args.model, _ctx_paths(args), cfg_kwargs, args.kind,
        args.embeddings, args.doc_embeddings, args.stopwords,
    )
    doc_tuples = [(d.id, d.text, d.label) for d in docs]
    if args.jobs > 1 and len(docs) > 1:
        workers = min(args.jobs, len(docs))
        with ProcessPoolExecutor(max_workers=workers, initializer=_attack_init, initargs=init_args) as pool:
            results = list(pool.map(_attack_one, doc_tuples, chunksize=4))
    else:
        _attack_init(*init_args)
        results = [_attack_one(t) for t in doc_tuples]
    summary = attack_mod.summarize_campaign(results, docs, args.kind)

    attack_mod.write_results_jsonl(args.out, results)
    stem = os.path.splitext(args.out)[0]
    report.write_json(stem + ".summary.json", {"summary": summary, "config": _resolved_config(args)})
    _write_meta(args.out, "attack", args)
    print(
        f"{args.kind}: success {summary['success_rate']:.3f} "
        f"({summary['n_success']}/{summary['n_attackable']} attackable), "
        f"accuracy {summary['pre_attack_accuracy']:.3f} -> {summary['post_attack_accuracy']:.3f}"
    )
    return 0


# ---------------------------------------------------------------------------
# mauve
# ---------------------------------------------------------------------------

def cmd_mauve(args) -> int:
    ref = load_embeddings(args.ref)
    p = load_embeddings(args.p)
    stem = os.path.splitext(args.out)[0]
    if args.q:
        q = load_embeddings(args.q)
        rep = mauve_mod.delta_mauve(
            ref.vectors, p.vectors, q.vectors, trials=args.trials, c=args.c,
            k_clusters=args.k_clusters, grid_size=args.grid_size, smoothing=args.smoothing,
        )
        report.write_json(args.out, {
            "mean_delta_mauve": rep.mean_delta,
            "per_trial": rep.per_trial,
            "k": rep.k,
            "c": rep.c,
            "frontier_orig": rep.frontier_orig,
            "frontier_adv": rep.frontier_adv,
            "config": _resolved_config(args),
        })
        report.render_delta_frontier_figure(rep.frontier_orig, rep.frontier_adv,
                                            stem + "_frontier.png")
        print(f"delta-MAUVE over {args.trials} trials: {rep.mean_delta:+.4f} -> {args.out}")
    else:
        rep = mauve_mod.mauve_from_embeddings(
            ref.vectors, p.vectors, k=args.k_clusters, seed=args.seed, c=args.c,
            grid_size=args.grid_size, smoothing=args.smoothing,
        )
        report.write_json(args.out, {
            "mauve": rep.mauve,
            "frontier": rep.frontier,
            "k": rep.k, "c": rep.c, "seed": rep.seed,
            "n_p": rep.n_p, "n_q": rep.n_q,
            "config": _resolved_config(args),
        })
        report.render_frontier_figure(rep.frontier, stem + "_frontier.png")
        print(f"MAUVE {rep.mauve:.4f} -> {args.out}")
    return 0


# ---------------------------------------------------------------------------
# zipf-plot
# ---------------------------------------------------------------------------

def cmd_zipf_plot(args) -> int:
    docs = _load_docs(args)
    ctx = pipeline.FeaturizeContext.build(**_ctx_paths(args))
    counts: Counter = Counter()
    for d in docs:
        counts.update(process(d.text, ctx.rules).lemmas)
    rows = report.zipf_plot_rows(counts, top_k=args.top_k)
    out_rows = [(rank, lemma, obs, theo) for rank, lemma, obs, theo in rows]
    report.write_csv(args.out, ("rank", "lemma", "observed_freq", "zipf_freq"), out_rows)
    stem = os.path.splitext(args.out)[0]
    report.render_zipf_figure(rows, stem + ".png")
    _write_meta(args.out, "zipf-plot", args)
    print(f"zipf plot data for top {len(rows)} lemmas -> {args.out}")
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gtdetect",
        description="Computer-generated text detection, adversarial attacks, and MAUVE scoring.",
    )
    parser.add_argument(
        "--version", action="version",
        version=f"gtdetect {__version__} (model format {MODEL_FORMAT_VERSION})",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("featurize", help="emit per-document feature rows as CSV")
    _add_doc_inputs(p)
    _add_rule_flags(p)
    p.add_argument("--feature-set", choices=pipeline.FEATURE_SETS, default="stat")
    p.add_argument("--embeddings", help="embedding file for neural/ensemble features")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=pipeline.default_jobs())
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_featurize)

    p = sub.add_parser("train", help="grid-search, train, and calibrate a linear SVM")
    p.add_argument("--features", required=True, help="features CSV from featurize")
    p.add_argument("--grid", default=",".join(str(c) for c in DEFAULT_GRID))
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="model JSON path")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="score labeled docs and report accuracy/F1/weights")
    p.add_argument("--model", required=True)
    p.add_argument("--features", help="features CSV (skips featurization)")
    _add_doc_inputs(p)
    _add_rule_flags(p)
    p.add_argument("--feature-set", choices=pipeline.FEATURE_SETS, default="stat")
    p.add_argument("--embeddings")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=pipeline.default_jobs())
    p.add_argument("--out", required=True, help="report JSON path")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("attack", help="run DeepWordBug or TextFooler against a model")
    p.add_argument("--model", required=True)
    p.add_argument("--kind", choices=("dwb", "tf"), required=True)
    _add_doc_inputs(p)
    p.add_argument("--n", type=int, default=None,
                   help="seeded subsample size over all loaded docs (alternative to --n-per-class)")
    _add_rule_flags(p)
    p.add_argument("--embeddings", help="word embedding file (required for tf)")
    p.add_argument("--doc-embeddings", help="word vectors for the optional document-similarity constraint")
    p.add_argument("--min-doc-cos", type=float, default=0.7)
    p.add_argument("--max-levenshtein", type=int, default=30)
    p.add_argument("--max-candidates", type=int, default=50)
    p.add_argument("--min-word-cos", type=float, default=0.5)
    p.add_argument("--query-budget", type=int, default=0)
    p.add_argument("--stopwords", help="stopword list (default: packaged)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=pipeline.default_jobs())
    p.add_argument("--out", required=True, help="results JSONL path")
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser("mauve", help="MAUVE between embedding sets, or delta-MAUVE with --q")
    p.add_argument("--ref", required=True, help="reference embeddings (human text)")
    p.add_argument("--p", required=True, help="original embeddings")
    p.add_argument("--q", help="adversarial embeddings (enables delta-MAUVE)")
    p.add_argument("--k-clusters", type=int, default=None)
    p.add_argument("--c", type=float, default=mauve_mod.DEFAULT_C)
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--grid-size", type=int, default=mauve_mod.DEFAULT_GRID_SIZE)
    p.add_argument("--smoothing", type=float, default=mauve_mod.DEFAULT_SMOOTHING)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_mauve)

    p = sub.add_parser("zipf-plot", help="rank/frequency table and figure for the top lemmas")
    _add_doc_inputs(p)
    _add_rule_flags(p)
    p.add_argument("--top-k", type=int, default=30)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="CSV path (PNG written alongside)")
    p.set_defaults(func=cmd_zipf_plot)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ToolkitError as e:
        print(f"gtdetect: error: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"gtdetect: error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
