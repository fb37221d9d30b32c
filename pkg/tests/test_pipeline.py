import json
import os

import numpy as np
import pytest

from depdetect import featurize, gbdt, pipeline
from depdetect.cli import main as cli_main
from conftest import write_conllu


def make_manifest(root, records, classes=None, domains=None, languages=None):
    """records: list of (doc_id, sentences, class_label, domain, language)."""
    os.makedirs(os.path.join(root, "conllu"), exist_ok=True)
    classes = classes or sorted({r[2] for r in records})
    domains = domains or sorted({r[3] for r in records})
    languages = languages or sorted({r[4] for r in records})
    lines = [json.dumps({"classes": classes, "domains": domains,
                         "languages": languages})]
    for doc_id, sentences, cls, dom, lang in records:
        rel = f"conllu/{doc_id}.conllu"
        write_conllu(os.path.join(root, rel), sentences)
        lines.append(json.dumps({"doc_id": doc_id, "conllu": rel,
                                 "class_label": cls, "domain": dom,
                                 "language": lang}))
    path = os.path.join(root, "manifest.jsonl")
    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")
    return path


def simple_records(n=30):
    recs = []
    for i in range(n):
        # "ai" docs use obj, "human" docs use nsubj: trivially separable
        label = "ai" if i % 2 == 0 else "human"
        seq = ["root", "obj" if label == "ai" else "nsubj", "punct"]
        dom = "news" if i < n // 2 else "wiki"
        recs.append((f"d{i:03d}", [seq], label, dom, "en"))
    return recs


@pytest.fixture()
def manifest_path(tmp_path):
    return make_manifest(str(tmp_path), simple_records())


def test_load_manifest_ok(manifest_path):
    m = pipeline.load_manifest(manifest_path)
    assert len(m.records) == 30
    assert m.classes == ["ai", "human"]
    assert set(m.domains) == {"news", "wiki"}


def test_manifest_duplicate_doc_id(tmp_path):
    recs = simple_records(4)
    recs[1] = (recs[0][0],) + recs[1][1:]
    path = make_manifest(str(tmp_path), recs)
    with pytest.raises(pipeline.ManifestError, match="duplicate"):
        pipeline.load_manifest(path)


def test_manifest_missing_file(tmp_path):
    path = make_manifest(str(tmp_path), simple_records(4))
    os.remove(os.path.join(str(tmp_path), "conllu", "d001.conllu"))
    with pytest.raises(pipeline.ManifestError, match="d001"):
        pipeline.load_manifest(path)


def test_manifest_undeclared_class(tmp_path):
    path = make_manifest(str(tmp_path), simple_records(4), classes=["ai"])
    with pytest.raises(pipeline.ManifestError, match="undeclared class"):
        pipeline.load_manifest(path)


def test_loco_split_partition(manifest_path):
    m = pipeline.load_manifest(manifest_path)
    train, test = pipeline.split_leave_one_domain_out(m, "news")
    assert all(r.domain == "news" for r in test)
    assert all(r.domain != "news" for r in train)
    assert len(train) + len(test) == len(m.records)
    assert not {r.doc_id for r in train} & {r.doc_id for r in test}


def test_loco_unknown_domain(manifest_path):
    m = pipeline.load_manifest(manifest_path)
    with pytest.raises(pipeline.ExperimentError):
        pipeline.split_leave_one_domain_out(m, "reddit")


def test_loco_empty_domain(tmp_path):
    path = make_manifest(str(tmp_path), simple_records(6),
                         domains=["news", "wiki", "empty"])
    m = pipeline.load_manifest(path)
    with pytest.raises(pipeline.ExperimentError):
        pipeline.split_leave_one_domain_out(m, "empty")


def test_stratified_split_deterministic(manifest_path):
    m = pipeline.load_manifest(manifest_path)
    t1 = pipeline.stratified_split(m.records, seed=42)
    t2 = pipeline.stratified_split(m.records, seed=42)
    assert [r.doc_id for r in t1[0]] == [r.doc_id for r in t2[0]]
    assert [r.doc_id for r in t1[1]] == [r.doc_id for r in t2[1]]
    t3 = pipeline.stratified_split(m.records, seed=43)
    assert [r.doc_id for r in t3[1]] != [r.doc_id for r in t1[1]]


def test_stratified_split_covers_all_classes(manifest_path):
    m = pipeline.load_manifest(manifest_path)
    train, test = pipeline.stratified_split(m.records, seed=0)
    assert {r.class_label for r in test} == {"ai", "human"}
    assert len(test) == round(0.2 * 15) * 2


def test_config_validation():
    with pytest.raises(pipeline.ExperimentError):
        pipeline.ExperimentConfig(task="nope").validate()
    with pytest.raises(pipeline.ExperimentError):
        pipeline.ExperimentConfig(task="multilingual").validate()
    pipeline.ExperimentConfig(task="multilingual", language="en").validate()


def _fast_hp():
    return gbdt.Hyperparams(num_rounds=10, min_samples_per_leaf=2)


def test_run_experiment_loco(manifest_path, tmp_path):
    m = pipeline.load_manifest(manifest_path)
    config = pipeline.ExperimentConfig(
        task="multiway-loco", held_out_domain="wiki", hyperparams=_fast_hp()
    )
    out = str(tmp_path / "out")
    result = pipeline.run_experiment(config, m, out_dir=out)
    assert result.report.accuracy == 100.0
    assert os.path.isfile(os.path.join(out, "report.txt"))
    assert os.path.isfile(os.path.join(out, "report.json"))
    assert os.path.isfile(os.path.join(out, "report.bundle.json"))
    # no test-domain record may enter training
    train_records, _ = pipeline.resolve_split(config, m)
    docs = pipeline.load_documents(train_records)
    assert result.bundle.train_fingerprint == pipeline.train_fingerprint(docs)
    assert all(r.domain != "wiki" for r in train_records)


def test_run_experiment_multilingual(manifest_path):
    m = pipeline.load_manifest(manifest_path)
    config = pipeline.ExperimentConfig(
        task="multilingual", language="en", hyperparams=_fast_hp()
    )
    result = pipeline.run_experiment(config, m)
    assert result.bundle.model.objective == "binary-logistic"
    assert result.report.accuracy == 100.0


def test_run_experiment_insufficient_classes(tmp_path):
    recs = [(f"d{i}", [["root"]], "ai", "news" if i < 3 else "wiki", "en")
            for i in range(6)]
    recs.append(("h0", [["root", "nsubj"]], "human", "wiki", "en"))
    path = make_manifest(str(tmp_path), recs)
    m = pipeline.load_manifest(path)
    config = pipeline.ExperimentConfig(task="multiway-loco",
                                       held_out_domain="wiki",
                                       hyperparams=_fast_hp())
    with pytest.raises(pipeline.ExperimentError, match="class"):
        pipeline.run_experiment(config, m)


def test_sweep_writes_one_row_per_range(manifest_path, tmp_path):
    m = pipeline.load_manifest(manifest_path)
    config = pipeline.ExperimentConfig(task="ngram-sweep", hyperparams=_fast_hp())
    out = str(tmp_path / "sweep")
    result = pipeline.run_experiment(config, m, out_dir=out)
    assert sorted(result.sweep_reports) == ["(1,1)", "(1,2)", "(1,3)"]
    rows = json.load(open(os.path.join(out, "sweep.json")))
    assert [r["ngram_range"] for r in rows] == ["(1,1)", "(1,2)", "(1,3)"]


def test_bundle_round_trip(manifest_path, tmp_path):
    m = pipeline.load_manifest(manifest_path)
    config = pipeline.ExperimentConfig(task="multiway-loco",
                                       held_out_domain="wiki",
                                       hyperparams=_fast_hp())
    result = pipeline.run_experiment(config, m)
    path = str(tmp_path / "b.json")
    pipeline.save_bundle(result.bundle, path)
    loaded = pipeline.load_bundle(path)
    rng = np.random.default_rng(0)
    X = rng.uniform(0, 1, size=(50, result.bundle.space.dim))
    assert np.array_equal(
        gbdt.predict_proba(result.bundle.model, X),
        gbdt.predict_proba(loaded.model, X),
    )
    assert np.array_equal(loaded.model.gain_ledger, result.bundle.model.gain_ledger)
    assert loaded.train_fingerprint == result.bundle.train_fingerprint


def test_bundle_truncated_file(manifest_path, tmp_path):
    m = pipeline.load_manifest(manifest_path)
    config = pipeline.ExperimentConfig(task="multiway-loco",
                                       held_out_domain="wiki",
                                       hyperparams=_fast_hp())
    result = pipeline.run_experiment(config, m)
    path = str(tmp_path / "b.json")
    pipeline.save_bundle(result.bundle, path)
    blob = open(path).read()
    # corrupt a digit inside the payload, keeping valid JSON
    corrupted = blob.replace('"num_train_docs": 15', '"num_train_docs": 16')
    assert corrupted != blob
    with open(path, "w") as f:
        f.write(corrupted)
    with pytest.raises(pipeline.BundleError, match="checksum"):
        pipeline.load_bundle(path)
    # truncation is also rejected
    with open(path, "w") as f:
        f.write(blob[: len(blob) // 2])
    with pytest.raises(pipeline.BundleError):
        pipeline.load_bundle(path)


def test_bundle_version_mismatch(tmp_path):
    path = str(tmp_path / "b.json")
    with open(path, "w") as f:
        json.dump({"format_version": 99, "checksum": "", "payload": {}}, f)
    with pytest.raises(pipeline.BundleError, match="version"):
        pipeline.load_bundle(path)


def test_end_to_end_determinism(manifest_path, tmp_path):
    m = pipeline.load_manifest(manifest_path)
    blobs = []
    for name in ("a", "b"):
        out = str(tmp_path / name)
        config = pipeline.ExperimentConfig(task="multiway-loco",
                                           held_out_domain="wiki",
                                           hyperparams=_fast_hp())
        pipeline.run_experiment(config, m, out_dir=out)
        blobs.append({
            fn: open(os.path.join(out, fn), "rb").read()
            for fn in ("report.txt", "report.json", "report.bundle.json")
        })
    assert blobs[0] == blobs[1]


# ------------------------------------------------------------------ CLI

def test_cli_ingest_check(manifest_path, capsys):
    assert cli_main(["ingest-check", "--manifest", manifest_path]) == 0
    out = capsys.readouterr().out
    assert "30 documents" in out


def test_cli_ingest_check_bad_manifest(tmp_path, capsys):
    path = str(tmp_path / "m.jsonl")
    with open(path, "w") as f:
        f.write("{not json\n")
    assert cli_main(["ingest-check", "--manifest", path]) == 1
    assert "error" in capsys.readouterr().err


def test_cli_train_predict_importance(manifest_path, tmp_path, capsys):
    out = str(tmp_path / "out")
    config_path = str(tmp_path / "config.json")
    with open(config_path, "w") as f:
        json.dump({"hyperparams": {"num_rounds": 10, "min_samples_per_leaf": 2}}, f)
    rc = cli_main([
        "train", "--manifest", manifest_path, "--task", "multiway-loco",
        "--held-out-domain", "wiki", "--out-dir", out,
        "--config", config_path,
    ])
    assert rc == 0
    bundle_path = os.path.join(out, "report.bundle.json")

    sample = os.path.join(os.path.dirname(manifest_path), "conllu", "d000.conllu")
    capsys.readouterr()
    rc = cli_main(["predict", "--bundle", bundle_path, sample])
    assert rc == 0
    line = capsys.readouterr().out.strip()
    doc_id, label, probs = line.split("\t")
    assert doc_id == "d000"
    assert label == "ai"

    rc = cli_main(["importance", "--bundle", bundle_path, "--top-k", "3"])
    assert rc == 0
    out_lines = capsys.readouterr().out.strip().splitlines()
    assert 1 <= len(out_lines) <= 3


def test_cli_predict_unparseable_input(manifest_path, tmp_path, capsys):
    out = str(tmp_path / "out")
    rc = cli_main([
        "train", "--manifest", manifest_path, "--task", "multiway-loco",
        "--held-out-domain", "wiki", "--out-dir", out,
    ])
    assert rc == 0
    bad = str(tmp_path / "bad.conllu")
    with open(bad, "w") as f:
        f.write("1\tbroken\n")
    capsys.readouterr()
    rc = cli_main(["predict", "--bundle",
                   os.path.join(out, "report.bundle.json"), bad])
    assert rc == 1
    assert "line 1" in capsys.readouterr().err


def test_cli_flag_overrides_config(manifest_path, tmp_path):
    config_path = str(tmp_path / "config.json")
    with open(config_path, "w") as f:
        json.dump({"task": "multiway-loco", "held_out_domain": "news",
                   "hyperparams": {"num_rounds": 5, "min_samples_per_leaf": 2}}, f)
    out = str(tmp_path / "out")
    rc = cli_main(["train", "--manifest", manifest_path,
                   "--held-out-domain", "wiki", "--out-dir", out,
                   "--config", config_path])
    assert rc == 0
    bundle = pipeline.load_bundle(os.path.join(out, "report.bundle.json"))
    assert bundle.config.held_out_domain == "wiki"


def test_cli_predict_empty_document(manifest_path, tmp_path, capsys):
    out = str(tmp_path / "out")
    cli_main(["train", "--manifest", manifest_path, "--task", "multiway-loco",
              "--held-out-domain", "wiki", "--out-dir", out])
    empty = str(tmp_path / "empty.conllu")
    open(empty, "w").close()
    capsys.readouterr()
    rc = cli_main(["predict", "--bundle",
                   os.path.join(out, "report.bundle.json"), empty])
    assert rc == 0
    line = capsys.readouterr().out.strip()
    assert line.startswith("empty\t")
