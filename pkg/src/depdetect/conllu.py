"""CoNLL-U reading reduced to dependency relation labels.

Everything except the DEPREL column (and token ids, needed to recognize
multiword ranges and empty nodes) is discarded on the way in.
"""

from __future__ import annotations

from dataclasses import dataclass


class ConlluParseError(ValueError):
    """Malformed CoNLL-U input; carries the 1-based line number."""

    def __init__(self, message, line_number):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


@dataclass(frozen=True)
class ConlluSentence:
    """One sentence block: (id, deprel) pairs plus its comment lines."""

    tokens: tuple  # tuple of (id, deprel)
    sent_metadata: tuple = ()


@dataclass(frozen=True)
class DepDocument:
    """One document's dependency-label sequences, one per sentence."""

    doc_id: str
    sentences: tuple  # tuple of tuples of normalized deprel strings
    class_label: str = ""
    domain: str = ""
    language: str = ""


def parse_conllu(stream):
    """Parse CoNLL-U text into a list of ConlluSentence.

    `stream` is a str or an iterable of lines. Token lines must have 10
    tab-separated columns; multiword-token ranges (id with "-") and empty
    nodes (id with ".") are skipped. Comments are kept verbatim.
    """
    if isinstance(stream, str):
        lines = stream.split("\n")
    else:
        lines = [ln.rstrip("\n") for ln in stream]

    sentences = []
    tokens = []
    metadata = []

    def flush():
        nonlocal tokens, metadata
        if tokens or metadata:
            sentences.append(ConlluSentence(tuple(tokens), tuple(metadata)))
        tokens = []
        metadata = []

    for lineno, line in enumerate(lines, start=1):
        if line == "":
            flush()
            continue
        if line.startswith("#"):
            metadata.append(line)
            continue
        cols = line.split("\t")
        if len(cols) != 10:
            raise ConlluParseError(
                f"expected 10 tab-separated columns, got {len(cols)}", lineno
            )
        tok_id = cols[0]
        if "-" in tok_id or "." in tok_id:
            continue  # multiword range / empty node: no basic-layer deprel
        try:
            idx = int(tok_id)
        except ValueError:
            raise ConlluParseError(f"bad token id {tok_id!r}", lineno) from None
        if idx < 1:
            raise ConlluParseError(f"token id must be positive, got {idx}", lineno)
        tokens.append((idx, cols[7]))
    flush()
    return sentences


def read_conllu_file(path):
    """parse_conllu over a UTF-8 file on disk."""
    with open(path, encoding="utf-8") as f:
        return parse_conllu(f)


def extract_dep_document(sentences, doc_id, class_label="", domain="", language=""):
    """Reduce parsed sentences to lowercase deprel sequences.

    Tokens with deprel "_" (unannotated) are dropped; sentence and token
    order are preserved.
    """
    seqs = tuple(
        tuple(deprel.lower() for _, deprel in sent.tokens if deprel != "_")
        for sent in sentences
    )
    return DepDocument(
        doc_id=doc_id,
        sentences=seqs,
        class_label=class_label,
        domain=domain,
        language=language,
    )
