import json
import os
import random
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))  # make oracles/helpers importable


NOISE_LABELS = ["advmod", "amod", "case", "nmod", "nsubj", "obj"]


def write_conllu(path, sentences):
    """Write label sequences as a minimal 10-column CoNLL-U file."""
    with open(path, "w", encoding="utf-8") as f:
        for seq in sentences:
            for i, deprel in enumerate(seq, start=1):
                cols = [str(i), "x", "_", "_", "_", "_", "0", deprel, "_", "_"]
                f.write("\t".join(cols) + "\n")
            f.write("\n")


def make_bigram_signal_corpus(root, n_per_class=120, seed=7):
    """Synthetic dataset where only the bigram "punct dep" separates classes.

    Paired documents share identical noise sentences, so unigram counts
    are class-identical by construction. "ai" documents carry two
    ["punct", "dep"] sentences; "human" documents carry the same labels
    split into singleton sentences, so the bigram never forms.
    """
    conllu_dir = os.path.join(root, "conllu")
    os.makedirs(conllu_dir, exist_ok=True)
    lines = [json.dumps({
        "classes": ["ai", "human"],
        "domains": ["synthetic"],
        "languages": ["en"],
    })]
    for i in range(n_per_class):
        rng = random.Random(seed * 100003 + i)
        noise = [
            [rng.choice(NOISE_LABELS) for _ in range(rng.randint(5, 10))]
            for _ in range(rng.randint(4, 7))
        ]
        for cls in ("ai", "human"):
            if cls == "ai":
                sentences = noise + [["punct", "dep"], ["punct", "dep"]]
            else:
                sentences = noise + [["punct"], ["dep"], ["punct"], ["dep"]]
            doc_id = f"{cls}_{i:04d}"
            rel = f"conllu/{doc_id}.conllu"
            write_conllu(os.path.join(root, rel), sentences)
            lines.append(json.dumps({
                "doc_id": doc_id,
                "conllu": rel,
                "class_label": cls,
                "domain": "synthetic",
                "language": "en",
            }))
    manifest_path = os.path.join(root, "manifest.jsonl")
    with open(manifest_path, "w", encoding="utf-8") as f:
        f.write("\n".join(lines) + "\n")
    return manifest_path


@pytest.fixture(scope="session")
def bigram_signal_manifest(tmp_path_factory):
    root = tmp_path_factory.mktemp("bigram_signal")
    return make_bigram_signal_corpus(str(root))
