"""Evaluation metrics and report rendering.

Macro-averaged precision/recall/F1 plus accuracy on a 0-100 scale, the
full confusion matrix, and the distribution of errors over predicted
classes. Micro-averaged variants ride along in the structured report.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import numpy as np


class EvaluationError(ValueError):
    pass


@dataclass(frozen=True)
class ConfusionMatrix:
    class_names: list
    counts: np.ndarray  # (K, K) int64; rows true, columns predicted

    @property
    def total(self):
        return int(self.counts.sum())


@dataclass(frozen=True)
class ErrorDistribution:
    by_predicted_class: dict  # class name -> percentage of all errors
    no_errors: bool


@dataclass(frozen=True)
class EvaluationReport:
    precision: float  # macro, [0, 100]
    recall: float
    f1: float
    accuracy: float
    micro_precision: float
    micro_recall: float
    micro_f1: float
    confusion: ConfusionMatrix
    error_dist: ErrorDistribution
    split_descriptor: dict = field(default_factory=dict)


def confusion_matrix(true_labels, predicted_labels, class_names):
    index = {c: i for i, c in enumerate(class_names)}
    counts = np.zeros((len(class_names), len(class_names)), dtype=np.int64)
    for t, p in zip(true_labels, predicted_labels):
        counts[index[t], index[p]] += 1
    return ConfusionMatrix(list(class_names), counts)


def error_distribution(confusion):
    """Share of all misclassifications landing in each predicted class."""
    cm = confusion.counts
    off_diag_per_col = cm.sum(axis=0) - np.diag(cm)
    total_errors = int(off_diag_per_col.sum())
    if total_errors == 0:
        return ErrorDistribution({}, no_errors=True)
    dist = {
        c: float(off_diag_per_col[i]) / total_errors * 100.0
        for i, c in enumerate(confusion.class_names)
    }
    return ErrorDistribution(dist, no_errors=False)


def evaluate(true_labels, predicted_labels, class_names, split_descriptor=None):
    """Score predictions against truth.

    Per-class precision/recall are 0 when their denominator is 0, so the
    macro average stays defined when a class is never predicted or never
    occurs.
    """
    if len(true_labels) != len(predicted_labels):
        raise EvaluationError(
            f"{len(true_labels)} true labels vs {len(predicted_labels)} predictions"
        )
    if not true_labels:
        raise EvaluationError("cannot evaluate an empty label list")
    known = set(class_names)
    for lab in true_labels:
        if lab not in known:
            raise EvaluationError(f"unknown true label {lab!r}")
    for lab in predicted_labels:
        if lab not in known:
            raise EvaluationError(f"unknown predicted label {lab!r}")

    confusion = confusion_matrix(true_labels, predicted_labels, class_names)
    cm = confusion.counts.astype(np.float64)
    tp = np.diag(cm)
    pred_per_class = cm.sum(axis=0)
    true_per_class = cm.sum(axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        prec = np.where(pred_per_class > 0, tp / pred_per_class, 0.0)
        rec = np.where(true_per_class > 0, tp / true_per_class, 0.0)
        f1 = np.where(prec + rec > 0, 2 * prec * rec / (prec + rec), 0.0)

    total = confusion.total
    correct = float(tp.sum())
    micro_p = correct / pred_per_class.sum()  # == accuracy for single-label
    micro_r = correct / true_per_class.sum()
    micro_f1 = 2 * micro_p * micro_r / (micro_p + micro_r) if micro_p + micro_r else 0.0

    return EvaluationReport(
        precision=float(prec.mean() * 100.0),
        recall=float(rec.mean() * 100.0),
        f1=float(f1.mean() * 100.0),
        accuracy=correct / total * 100.0,
        micro_precision=micro_p * 100.0,
        micro_recall=micro_r * 100.0,
        micro_f1=micro_f1 * 100.0,
        confusion=confusion,
        error_dist=error_distribution(confusion),
        split_descriptor=dict(split_descriptor or {}),
    )


# ---------------------------------------------------------------- rendering

def report_to_dict(report, importance=None):
    return {
        "split": report.split_descriptor,
        "metrics": {
            "precision": report.precision,
            "recall": report.recall,
            "f1": report.f1,
            "accuracy": report.accuracy,
            "micro_precision": report.micro_precision,
            "micro_recall": report.micro_recall,
            "micro_f1": report.micro_f1,
        },
        "confusion": {
            "class_names": report.confusion.class_names,
            "counts": report.confusion.counts.tolist(),
        },
        "error_distribution": {
            "no_errors": report.error_dist.no_errors,
            "by_predicted_class": {
                c: round(v, 6) for c, v in report.error_dist.by_predicted_class.items()
            },
        },
        "importance": [
            {"ngram": ng, "gain": g} for ng, g in (importance or [])
        ],
    }


def report_to_text(report, importance=None):
    lines = []
    if report.split_descriptor:
        desc = ", ".join(f"{k}={v}" for k, v in sorted(report.split_descriptor.items()))
        lines.append(f"# split: {desc}")
    lines.append("Prec    Recall  F1      Acc")
    lines.append(
        f"{report.precision:.2f}".ljust(8)
        + f"{report.recall:.2f}".ljust(8)
        + f"{report.f1:.2f}".ljust(8)
        + f"{report.accuracy:.2f}"
    )
    lines.append("")
    lines.append("Confusion matrix (rows = true, columns = predicted):")
    width = max(len(c) for c in report.confusion.class_names) + 2
    header = " " * width + "".join(c.rjust(width) for c in report.confusion.class_names)
    lines.append(header)
    for i, c in enumerate(report.confusion.class_names):
        row = c.ljust(width) + "".join(
            str(int(v)).rjust(width) for v in report.confusion.counts[i]
        )
        lines.append(row)
    lines.append("")
    lines.append("Error distribution by predicted class:")
    if report.error_dist.no_errors:
        lines.append("  (no errors)")
    else:
        for c in report.confusion.class_names:
            pct = report.error_dist.by_predicted_class.get(c, 0.0)
            lines.append(f"  {c}: {pct:.2f}%")
    lines.append("")
    lines.append("Top features by gain:")
    if importance:
        for ng, g in importance:
            lines.append(f"  {ng}: {g:.6f}")
    else:
        lines.append("  (none)")
    lines.append("")
    return "\n".join(lines)


def render_reports(report, importance, out_dir, stem="report"):
    """Write the text and JSON report files; returns their paths."""
    os.makedirs(out_dir, exist_ok=True)
    txt_path = os.path.join(out_dir, f"{stem}.txt")
    json_path = os.path.join(out_dir, f"{stem}.json")
    with open(txt_path, "w", encoding="utf-8") as f:
        f.write(report_to_text(report, importance))
    with open(json_path, "w", encoding="utf-8") as f:
        json.dump(report_to_dict(report, importance), f, indent=2, sort_keys=True)
        f.write("\n")
    return txt_path, json_path
