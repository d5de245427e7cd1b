"""Exact evaluation metrics: binary TPR/FPR/precision/accuracy, multiclass
macro/weighted F1 and balanced accuracy, and open-set known/unknown recall.

Zero-denominator metrics are reported as None (undefined), never coerced to 0.
"Macro accuracy" and "balanced accuracy" are one quantity (mean per-class
recall) emitted under both names.
"""

from __future__ import annotations

import dataclasses
from typing import Optional, Sequence

import numpy as np


@dataclasses.dataclass
class ConfusionMatrix:
    classes: list
    counts: np.ndarray  # rows = truth, columns = prediction

    @property
    def total(self) -> int:
        return int(self.counts.sum())


def confusion(y_true: Sequence, y_pred: Sequence, classes: Sequence) -> ConfusionMatrix:
    if len(y_true) != len(y_pred):
        raise ValueError("y_true and y_pred must have equal length")
    if len(y_true) == 0:
        raise ValueError("empty inputs")
    index = {c: i for i, c in enumerate(classes)}
    counts = np.zeros((len(classes), len(classes)), dtype=np.int64)
    for t, p in zip(y_true, y_pred):
        if t not in index:
            raise ValueError(f"true label {t!r} outside class list")
        if p not in index:
            raise ValueError(f"predicted label {p!r} outside class list")
        counts[index[t], index[p]] += 1
    return ConfusionMatrix(classes=list(classes), counts=counts)


@dataclasses.dataclass
class MetricBlock:
    """One evaluation's worth of metrics; None marks an undefined value."""

    accuracy: Optional[float] = None
    tpr: Optional[float] = None
    fpr: Optional[float] = None
    precision: Optional[float] = None
    macro_f1: Optional[float] = None
    weighted_f1: Optional[float] = None
    macro_accuracy: Optional[float] = None
    micro_accuracy: Optional[float] = None
    per_class: Optional[dict] = None
    known_recall: Optional[float] = None
    unknown_recall: Optional[float] = None
    zero_support_classes: Optional[list] = None

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        if out["per_class"] is not None:
            out["per_class"] = {str(k): v for k, v in out["per_class"].items()}
        if out["zero_support_classes"] is not None:
            out["zero_support_classes"] = [str(c) for c in out["zero_support_classes"]]
        return out


def _ratio(num: float, den: float) -> Optional[float]:
    return num / den if den > 0 else None


def binary_metrics(cm: ConfusionMatrix, positive) -> MetricBlock:
    """Binary confusion with the attack side as positive class."""
    if cm.counts.shape != (2, 2):
        raise ValueError("binary metrics need a 2x2 confusion matrix")
    pos = cm.classes.index(positive)
    neg = 1 - pos
    tp = int(cm.counts[pos, pos])
    fn = int(cm.counts[pos, neg])
    fp = int(cm.counts[neg, pos])
    tn = int(cm.counts[neg, neg])
    return MetricBlock(
        accuracy=_ratio(tp + tn, tp + tn + fp + fn),
        tpr=_ratio(tp, tp + fn),
        fpr=_ratio(fp, fp + tn),
        precision=_ratio(tp, tp + fp),
    )


def multiclass_metrics(cm: ConfusionMatrix) -> MetricBlock:
    """Per-class one-vs-rest precision/recall/F1 plus macro/weighted summaries.

    Classes with zero support are excluded from macro means and reported in
    ``zero_support_classes``.
    """
    n = cm.counts.shape[0]
    if cm.counts.shape != (n, n):
        raise ValueError("confusion matrix must be square")
    support = cm.counts.sum(axis=1)
    predicted = cm.counts.sum(axis=0)
    diag = np.diag(cm.counts)

    per_class: dict = {}
    zero_support = []
    f1s, recalls, weights = [], [], []
    for i, cls in enumerate(cm.classes):
        rec = _ratio(diag[i], support[i])
        prec = _ratio(diag[i], predicted[i])
        if rec is not None and prec is not None and (rec + prec) > 0:
            f1 = 2 * prec * rec / (prec + rec)
        elif rec is not None and prec is not None:
            f1 = 0.0
        else:
            f1 = None
        per_class[cls] = {"precision": prec, "recall": rec, "f1": f1}
        if support[i] == 0:
            zero_support.append(cls)
            continue
        recalls.append(rec)
        # With support > 0, recall is defined; an undefined precision means no
        # predictions hit this class, so F1 degrades to 0.
        f1s.append(f1 if f1 is not None else 0.0)
        weights.append(support[i])

    total = cm.total
    if not recalls:
        return MetricBlock(per_class=per_class, zero_support_classes=zero_support)
    weights_arr = np.asarray(weights, dtype=np.float64)
    return MetricBlock(
        macro_f1=float(np.mean(f1s)),
        weighted_f1=float(np.sum(np.asarray(f1s) * weights_arr) / weights_arr.sum()),
        macro_accuracy=float(np.mean(recalls)),
        micro_accuracy=float(np.trace(cm.counts) / total),
        accuracy=float(np.trace(cm.counts) / total),
        per_class=per_class,
        zero_support_classes=zero_support,
    )


def openset_recall(truth_flags: Sequence[str], pools: Sequence[str]) -> tuple[Optional[float], Optional[float]]:
    """Recall of known-attack routing and unknown-attack routing.

    ``truth_flags`` are "known"/"unknown" per attack sample; ``pools`` are the
    pool names each sample was routed to.
    """
    if len(truth_flags) != len(pools):
        raise ValueError("length mismatch")
    known_total = sum(1 for t in truth_flags if t == "known")
    unknown_total = sum(1 for t in truth_flags if t == "unknown")
    known_hit = sum(
        1 for t, p in zip(truth_flags, pools) if t == "known" and p == "KnownAttackPool"
    )
    unknown_hit = sum(
        1 for t, p in zip(truth_flags, pools) if t == "unknown" and p == "UnknownPool"
    )
    return _ratio(known_hit, known_total), _ratio(unknown_hit, unknown_total)


def aggregate(blocks: Sequence[MetricBlock]) -> dict:
    """Mean and sample stddev (n-1) per metric across runs.

    A single block yields stddev 0.0 with ``n`` recording the degeneracy.
    """
    if not blocks:
        raise ValueError("need at least one metric block")
    scalar_fields = [
        "accuracy",
        "tpr",
        "fpr",
        "precision",
        "macro_f1",
        "weighted_f1",
        "macro_accuracy",
        "micro_accuracy",
        "known_recall",
        "unknown_recall",
    ]
    out: dict = {"n": len(blocks)}
    for field in scalar_fields:
        values = [getattr(b, field) for b in blocks if getattr(b, field) is not None]
        if not values:
            continue
        mean = float(np.mean(values))
        if len(values) > 1 and min(values) != max(values):
            std = float(np.std(values, ddof=1))
        else:
            std = 0.0
        out[field] = {"mean": mean, "std": std, "n": len(values)}
    return out


def entropy(p: np.ndarray) -> float:
    """Shannon entropy in nats; 0·ln 0 taken as 0."""
    p = np.asarray(p, dtype=np.float64)
    nz = p[p > 0]
    return float(-np.sum(nz * np.log(nz)))
