"""Command-line interface.

Subcommands: ingest-check, train, predict, evaluate, sweep, importance.
Every option can also come from a JSON config file (--config); explicit
flags override config-file values.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import conllu, evalrep, featurize, gbdt, pipeline


def _add_experiment_options(p):
    p.add_argument("--manifest", help="path to the dataset manifest (JSON lines)")
    p.add_argument("--task", choices=["multiway-loco", "multilingual", "ngram-sweep"])
    p.add_argument("--held-out-domain", dest="held_out_domain")
    p.add_argument("--language")
    p.add_argument("--ngram-min", dest="ngram_min", type=int)
    p.add_argument("--ngram-max", dest="ngram_max", type=int)
    p.add_argument("--cross-sentences", dest="cross_sentences", action="store_true",
                   default=None, help="let n-grams span sentence boundaries")
    p.add_argument("--seed", type=int)
    p.add_argument("--out-dir", dest="out_dir")
    p.add_argument("--config", help="JSON config file; flags override its values")


def _merge_config(args):
    """Config-file values fill in anything not set on the command line."""
    merged = {}
    if getattr(args, "config", None):
        with open(args.config, encoding="utf-8") as f:
            merged.update(json.load(f))
    for key, val in vars(args).items():
        if key in ("command", "config"):
            continue
        if val is not None:
            merged[key] = val
    return merged


_CONFIG_KEYS = ("task", "ngram_min", "ngram_max", "held_out_domain", "language",
                "cross_sentences", "seed", "holdout_fraction", "top_k_importance")


def _build_experiment_config(opts):
    kwargs = {k: opts[k] for k in _CONFIG_KEYS if opts.get(k) is not None}
    hp = opts.get("hyperparams")
    if hp:
        kwargs["hyperparams"] = gbdt.Hyperparams(**hp)
    return pipeline.ExperimentConfig(**kwargs)


def _require(opts, key, flag):
    if not opts.get(key):
        raise SystemExit(f"error: {flag} is required")
    return opts[key]


def cmd_ingest_check(args):
    opts = _merge_config(args)
    manifest = pipeline.load_manifest(_require(opts, "manifest", "--manifest"))
    n_sentences = 0
    n_tokens = 0
    for rec in manifest.records:
        sents = conllu.read_conllu_file(rec.conllu_path)
        doc = conllu.extract_dep_document(sents, rec.doc_id)
        n_sentences += len(doc.sentences)
        n_tokens += sum(len(s) for s in doc.sentences)
    print(f"manifest OK: {len(manifest.records)} documents, "
          f"{n_sentences} sentences, {n_tokens} retained tokens")
    print(f"classes: {', '.join(manifest.classes)}")
    print(f"domains: {', '.join(manifest.domains)}")
    print(f"languages: {', '.join(manifest.languages)}")
    return 0


def cmd_train(args):
    opts = _merge_config(args)
    manifest = pipeline.load_manifest(_require(opts, "manifest", "--manifest"))
    config = _build_experiment_config(opts)
    out_dir = _require(opts, "out_dir", "--out-dir")
    result = pipeline.run_experiment(config, manifest, out_dir=out_dir)
    print(evalrep.report_to_text(result.report, result.importance))
    print(f"outputs written to {out_dir}")
    return 0


def cmd_sweep(args):
    opts = _merge_config(args)
    opts["task"] = "ngram-sweep"
    manifest = pipeline.load_manifest(_require(opts, "manifest", "--manifest"))
    config = _build_experiment_config(opts)
    out_dir = _require(opts, "out_dir", "--out-dir")
    result = pipeline.run_experiment(config, manifest, out_dir=out_dir)
    print("Range   Acc")
    for key, report in result.sweep_reports.items():
        print(f"{key:<8}{report.accuracy:.2f}")
    return 0


def cmd_predict(args):
    opts = _merge_config(args)
    bundle = pipeline.load_bundle(_require(opts, "bundle", "--bundle"))
    paths = opts.get("inputs") or []
    if not paths:
        raise SystemExit("error: at least one CoNLL-U input file is required")
    model = bundle.model
    for path in paths:
        sents = conllu.read_conllu_file(path)
        doc_id = opts.get("doc_id_prefix", "") + _stem(path)
        doc = conllu.extract_dep_document(sents, doc_id)
        vec = featurize.transform(doc, bundle.space)
        probs = gbdt.predict_scores(model, vec)
        label = model.class_names[int(probs.argmax())]
        prob_str = " ".join(
            f"{c}={p:.6f}" for c, p in zip(model.class_names, probs)
        )
        print(f"{doc_id}\t{label}\t{prob_str}")
    return 0


def cmd_evaluate(args):
    opts = _merge_config(args)
    bundle = pipeline.load_bundle(_require(opts, "bundle", "--bundle"))
    manifest = pipeline.load_manifest(_require(opts, "manifest", "--manifest"))
    config = bundle.config
    for key in ("task", "held_out_domain", "language", "seed"):
        if opts.get(key) is not None:
            setattr(config, key, opts[key])
    _, test_records = pipeline.resolve_split(config, manifest)
    test_docs = pipeline.load_documents(test_records)
    X = featurize.transform_corpus(test_docs, bundle.space)
    pred_idx = gbdt.predict_class_indices(bundle.model, X)
    predicted = [bundle.model.class_names[i] for i in pred_idx]
    truth = [d.class_label for d in test_docs]
    report = evalrep.evaluate(truth, predicted, manifest.classes,
                              split_descriptor={"task": config.task,
                                                "n_test": len(test_docs)})
    importance = gbdt.gain_importance(
        bundle.model, bundle.space, config.top_k_importance
    )
    if opts.get("out_dir"):
        evalrep.render_reports(report, importance, opts["out_dir"])
    print(evalrep.report_to_text(report, importance))
    return 0


def cmd_importance(args):
    opts = _merge_config(args)
    bundle = pipeline.load_bundle(_require(opts, "bundle", "--bundle"))
    top_k = opts.get("top_k") or bundle.config.top_k_importance
    for ngram, g in gbdt.gain_importance(bundle.model, bundle.space, top_k):
        print(f"{ngram}\t{g:.6f}")
    return 0


def _stem(path):
    name = path.replace("\\", "/").rsplit("/", 1)[-1]
    return name[:-7] if name.endswith(".conllu") else name


def build_parser():
    parser = argparse.ArgumentParser(
        prog="depdetect",
        description="AI-generated text detection from dependency-relation n-grams",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest-check", help="validate a manifest and its CoNLL-U files")
    p.add_argument("--manifest")
    p.add_argument("--config")
    p.set_defaults(func=cmd_ingest_check)

    p = sub.add_parser("train", help="run an experiment and persist the bundle")
    _add_experiment_options(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("sweep", help="n-gram range ablation sweep")
    _add_experiment_options(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("predict", help="classify CoNLL-U documents with a bundle")
    p.add_argument("--bundle")
    p.add_argument("--config")
    p.add_argument("inputs", nargs="*", help="CoNLL-U files, one document each")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", help="re-evaluate a bundle against a manifest")
    _add_experiment_options(p)
    p.add_argument("--bundle")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("importance", help="print top features by gain")
    p.add_argument("--bundle")
    p.add_argument("--top-k", dest="top_k", type=int)
    p.add_argument("--config")
    p.set_defaults(func=cmd_importance)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (pipeline.ManifestError, pipeline.BundleError, pipeline.ExperimentError,
            conllu.ConlluParseError, featurize.FitError, gbdt.TrainError,
            evalrep.EvaluationError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
