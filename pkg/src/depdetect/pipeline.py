"""Dataset manifests, experiment orchestration, and model persistence.

A manifest is JSON-lines: the first line declares the class/domain/
language sets, each following line is one record pointing at a CoNLL-U
file. Bundles are versioned, checksummed JSON documents holding the
feature space, the model, the config snapshot, and a fingerprint of the
training inputs.
"""

from __future__ import annotations

import copy
import hashlib
import json
import os
import random
from dataclasses import dataclass, field, asdict

import numpy as np

from . import conllu, evalrep, featurize, gbdt

BUNDLE_FORMAT_VERSION = 1

SWEEP_RANGES = [(1, 1), (1, 2), (1, 3)]


class ManifestError(ValueError):
    pass


class BundleError(ValueError):
    pass


class ExperimentError(ValueError):
    pass


@dataclass(frozen=True)
class ManifestRecord:
    doc_id: str
    conllu_path: str  # absolute, resolved against the manifest location
    class_label: str
    domain: str
    language: str


@dataclass(frozen=True)
class DatasetManifest:
    records: list
    classes: list
    domains: list
    languages: list


@dataclass
class ExperimentConfig:
    task: str = "multiway-loco"  # multiway-loco | multilingual | ngram-sweep
    ngram_min: int = 1
    ngram_max: int = 2
    held_out_domain: str | None = None
    language: str | None = None
    cross_sentences: bool = False
    seed: int = 42
    holdout_fraction: float = 0.2  # for the stratified "All" split
    top_k_importance: int = 5
    hyperparams: gbdt.Hyperparams = field(default_factory=gbdt.Hyperparams)

    def validate(self):
        if self.task not in ("multiway-loco", "multilingual", "ngram-sweep"):
            raise ExperimentError(f"unknown task {self.task!r}")
        if self.task == "multilingual" and not self.language:
            raise ExperimentError("multilingual task requires a target language")
        featurize.NgramRange(self.ngram_min, self.ngram_max)


@dataclass
class ModelBundle:
    format_version: int
    space: featurize.FeatureSpace
    model: gbdt.GbdtModel
    config: ExperimentConfig
    train_fingerprint: str


@dataclass
class ExperimentResult:
    report: evalrep.EvaluationReport
    bundle: ModelBundle
    importance: list
    sweep_reports: dict | None = None  # "(min,max)" -> report, sweep task only


# ---------------------------------------------------------------- manifests

def load_manifest(path):
    base = os.path.dirname(os.path.abspath(path))
    with open(path, encoding="utf-8") as f:
        lines = [ln for ln in (l.strip() for l in f) if ln]
    if not lines:
        raise ManifestError("empty manifest")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as e:
        raise ManifestError(f"bad manifest header: {e}") from None
    for key in ("classes", "domains", "languages"):
        if key not in header or not isinstance(header[key], list):
            raise ManifestError(f"manifest header missing {key!r} list")
    classes, domains, languages = header["classes"], header["domains"], header["languages"]

    records = []
    seen = set()
    for i, line in enumerate(lines[1:], start=2):
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as e:
            raise ManifestError(f"line {i}: bad record: {e}") from None
        missing = [k for k in ("doc_id", "conllu", "class_label", "domain", "language")
                   if k not in obj]
        if missing:
            raise ManifestError(f"line {i}: record missing fields {missing}")
        doc_id = obj["doc_id"]
        if doc_id in seen:
            raise ManifestError(f"line {i}: duplicate doc_id {doc_id!r}")
        seen.add(doc_id)
        if obj["class_label"] not in classes:
            raise ManifestError(f"record {doc_id!r}: undeclared class {obj['class_label']!r}")
        if obj["domain"] not in domains:
            raise ManifestError(f"record {doc_id!r}: undeclared domain {obj['domain']!r}")
        if obj["language"] not in languages:
            raise ManifestError(f"record {doc_id!r}: undeclared language {obj['language']!r}")
        conllu_path = obj["conllu"]
        if not os.path.isabs(conllu_path):
            conllu_path = os.path.join(base, conllu_path)
        if not os.path.isfile(conllu_path):
            raise ManifestError(f"record {doc_id!r}: missing CoNLL-U file {obj['conllu']!r}")
        records.append(ManifestRecord(doc_id, conllu_path, obj["class_label"],
                                      obj["domain"], obj["language"]))
    return DatasetManifest(records, list(classes), list(domains), list(languages))


def load_documents(records):
    docs = []
    for rec in records:
        sentences = conllu.read_conllu_file(rec.conllu_path)
        docs.append(conllu.extract_dep_document(
            sentences, rec.doc_id, rec.class_label, rec.domain, rec.language
        ))
    return docs


# ------------------------------------------------------------------- splits

def stratified_split(records, seed, holdout_fraction=0.2):
    """Per-class shuffled split; at least one record of each class held out."""
    by_class = {}
    for rec in records:
        by_class.setdefault(rec.class_label, []).append(rec)
    rng = random.Random(seed)
    train, test = [], []
    for label in sorted(by_class):
        group = sorted(by_class[label], key=lambda r: r.doc_id)
        rng.shuffle(group)
        n_test = max(1, round(len(group) * holdout_fraction))
        test.extend(group[:n_test])
        train.extend(group[n_test:])
    order = {rec.doc_id: i for i, rec in enumerate(records)}
    train.sort(key=lambda r: order[r.doc_id])
    test.sort(key=lambda r: order[r.doc_id])
    return train, test


def split_leave_one_domain_out(manifest, held_out):
    if held_out not in manifest.domains:
        raise ExperimentError(f"unknown domain {held_out!r}")
    test = [r for r in manifest.records if r.domain == held_out]
    if not test:
        raise ExperimentError(f"no records in held-out domain {held_out!r}")
    train = [r for r in manifest.records if r.domain != held_out]
    return train, test


def resolve_split(config, manifest):
    """Train/test record lists for the configured task."""
    if config.task == "multilingual":
        pool = [r for r in manifest.records if r.language == config.language]
        if not pool:
            raise ExperimentError(f"no records for language {config.language!r}")
        return stratified_split(pool, config.seed, config.holdout_fraction)
    if config.held_out_domain:
        return split_leave_one_domain_out(manifest, config.held_out_domain)
    # the "All" configuration: stratified random split
    return stratified_split(manifest.records, config.seed, config.holdout_fraction)


def train_fingerprint(docs):
    payload = json.dumps(
        sorted((d.doc_id, d.class_label, d.domain, d.language,
                [list(s) for s in d.sentences]) for d in docs),
        separators=(",", ":"),
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


# -------------------------------------------------------------- experiments

def _split_descriptor(config, train_records, test_records):
    return {
        "task": config.task,
        "held_out_domain": config.held_out_domain or "",
        "language": config.language or "",
        "ngram_range": f"({config.ngram_min},{config.ngram_max})",
        "seed": config.seed,
        "n_train": len(train_records),
        "n_test": len(test_records),
    }


def _run_single(config, manifest, out_dir=None, stem="report"):
    train_records, test_records = resolve_split(config, manifest)
    train_docs = load_documents(train_records)
    test_docs = load_documents(test_records)

    ngram_range = featurize.NgramRange(config.ngram_min, config.ngram_max)
    space = featurize.fit(train_docs, ngram_range, config.cross_sentences)
    X_train = featurize.transform_corpus(train_docs, space)
    X_test = featurize.transform_corpus(test_docs, space)

    class_names = list(manifest.classes)
    class_index = {c: i for i, c in enumerate(class_names)}
    present = sorted({d.class_label for d in train_docs})
    if len(present) < 2:
        raise ExperimentError(
            f"train split contains {len(present)} class(es); need at least 2"
        )
    y_train = np.array([class_index[d.class_label] for d in train_docs])

    model = gbdt.train(X_train, y_train, class_names, config.hyperparams)
    pred_idx = gbdt.predict_class_indices(model, X_test)
    predicted = [class_names[i] for i in pred_idx]
    truth = [d.class_label for d in test_docs]

    report = evalrep.evaluate(
        truth, predicted, class_names,
        split_descriptor=_split_descriptor(config, train_records, test_records),
    )
    importance = gbdt.gain_importance(model, space, config.top_k_importance)
    bundle = ModelBundle(
        format_version=BUNDLE_FORMAT_VERSION,
        space=space,
        model=model,
        config=config,
        train_fingerprint=train_fingerprint(train_docs),
    )
    if out_dir is not None:
        evalrep.render_reports(report, importance, out_dir, stem=stem)
        save_bundle(bundle, os.path.join(out_dir, f"{stem}.bundle.json"))
    return ExperimentResult(report, bundle, importance)


def run_experiment(config, manifest, out_dir=None):
    """Execute the configured experiment; writes reports/bundle when
    out_dir is given."""
    config.validate()
    if config.task != "ngram-sweep":
        return _run_single(config, manifest, out_dir)

    sweep_reports = {}
    last = None
    rows = []
    for lo, hi in SWEEP_RANGES:
        sub = copy.copy(config)
        sub.task = "multilingual" if config.language else "multiway-loco"
        sub.ngram_min, sub.ngram_max = lo, hi
        stem = f"range_{lo}_{hi}"
        last = _run_single(sub, manifest, out_dir, stem=stem)
        key = f"({lo},{hi})"
        sweep_reports[key] = last.report
        rows.append({"ngram_range": key, "accuracy": last.report.accuracy})
    if out_dir is not None:
        with open(os.path.join(out_dir, "sweep.json"), "w", encoding="utf-8") as f:
            json.dump(rows, f, indent=2, sort_keys=True)
            f.write("\n")
        with open(os.path.join(out_dir, "sweep.txt"), "w", encoding="utf-8") as f:
            f.write("Range   Acc\n")
            for row in rows:
                f.write(f"{row['ngram_range']:<8}{row['accuracy']:.2f}\n")
    return ExperimentResult(last.report, last.bundle, last.importance,
                            sweep_reports=sweep_reports)


# ------------------------------------------------------------- persistence

def _tree_to_dict(tree):
    return {
        "feature": tree.feature.tolist(),
        "threshold": tree.threshold.tolist(),
        "default_left": tree.default_left.tolist(),
        "left": tree.left.tolist(),
        "right": tree.right.tolist(),
        "value": tree.value.tolist(),
        "gain": tree.gain.tolist(),
        "is_leaf": tree.is_leaf.tolist(),
    }


def _tree_from_dict(d):
    return gbdt.Tree(
        feature=np.array(d["feature"], dtype=np.int64),
        threshold=np.array(d["threshold"], dtype=np.float64),
        default_left=np.array(d["default_left"], dtype=np.int8),
        left=np.array(d["left"], dtype=np.int64),
        right=np.array(d["right"], dtype=np.int64),
        value=np.array(d["value"], dtype=np.float64),
        gain=np.array(d["gain"], dtype=np.float64),
        is_leaf=np.array(d["is_leaf"], dtype=np.int8),
    )


def _config_to_dict(config):
    d = asdict(config)
    d["hyperparams"] = asdict(config.hyperparams)
    return d


def _config_from_dict(d):
    d = dict(d)
    d["hyperparams"] = gbdt.Hyperparams(**d["hyperparams"])
    return ExperimentConfig(**d)


def _bundle_payload(bundle):
    space = bundle.space
    model = bundle.model
    return {
        "feature_space": {
            "ngram_min": space.ngram_range.min_n,
            "ngram_max": space.ngram_range.max_n,
            "cross_sentences": space.cross_sentences,
            "vocabulary": space.feature_names(),
            "idf": space.idf.tolist(),
            "num_train_docs": space.num_train_docs,
        },
        "model": {
            "objective": model.objective,
            "class_names": model.class_names,
            "learning_rate": model.learning_rate,
            "base_score": model.base_score.tolist(),
            "feature_dim": model.feature_dim,
            "hyperparams": asdict(model.hyperparams),
            "gain_ledger": model.gain_ledger.tolist(),
            "train_losses": model.train_losses,
            "trees": [[_tree_to_dict(t) for t in rnd] for rnd in model.trees],
        },
        "config": _config_to_dict(bundle.config),
        "train_fingerprint": bundle.train_fingerprint,
    }


def _payload_checksum(payload):
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def save_bundle(bundle, path):
    payload = _bundle_payload(bundle)
    doc = {
        "format_version": bundle.format_version,
        "checksum": _payload_checksum(payload),
        "payload": payload,
    }
    with open(path, "w", encoding="utf-8") as f:
        json.dump(doc, f, indent=2, sort_keys=True)
        f.write("\n")


def load_bundle(path):
    with open(path, encoding="utf-8") as f:
        try:
            doc = json.load(f)
        except json.JSONDecodeError as e:
            raise BundleError(f"unreadable bundle: {e}") from None
    version = doc.get("format_version")
    if version != BUNDLE_FORMAT_VERSION:
        raise BundleError(
            f"unsupported bundle format version {version!r} "
            f"(expected {BUNDLE_FORMAT_VERSION})"
        )
    payload = doc.get("payload")
    if payload is None or _payload_checksum(payload) != doc.get("checksum"):
        raise BundleError("bundle checksum mismatch (corrupt or truncated file)")

    fs = payload["feature_space"]
    space = featurize.FeatureSpace(
        ngram_range=featurize.NgramRange(fs["ngram_min"], fs["ngram_max"]),
        vocabulary={ng: i for i, ng in enumerate(fs["vocabulary"])},
        idf=np.array(fs["idf"], dtype=np.float64),
        num_train_docs=fs["num_train_docs"],
        cross_sentences=fs["cross_sentences"],
    )
    m = payload["model"]
    model = gbdt.GbdtModel(
        objective=m["objective"],
        class_names=list(m["class_names"]),
        trees=[[_tree_from_dict(t) for t in rnd] for rnd in m["trees"]],
        learning_rate=m["learning_rate"],
        base_score=np.array(m["base_score"], dtype=np.float64),
        feature_dim=m["feature_dim"],
        hyperparams=gbdt.Hyperparams(**m["hyperparams"]),
        gain_ledger=np.array(m["gain_ledger"], dtype=np.float64),
        train_losses=list(m["train_losses"]),
    )
    if space.dim != model.feature_dim:
        raise BundleError("feature space dimension does not match the model")
    return ModelBundle(
        format_version=version,
        space=space,
        model=model,
        config=_config_from_dict(payload["config"]),
        train_fingerprint=payload["train_fingerprint"],
    )
