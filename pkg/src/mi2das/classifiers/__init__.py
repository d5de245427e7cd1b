"""Supervised attack classifiers behind one contract: fit on labeled attack
flows from the known classes, emit calibrated class distributions.

The default downstream classifier is the random forest.
"""

from __future__ import annotations

import dataclasses
import enum
from typing import Optional, Sequence, Union

import numpy as np

from ..labels import ClassLabel, code_of, label_of
from .forest import RandomForestState, RfHyper, fit_forest
from .gbt import GbtHyper, GbtState, fit_gbt
from .knn import KnnHyper, KnnState, fit_knn
from .linear import LogRegHyper, LogRegState, fit_logreg
from .svm import SvmHyper, SvmState, fit_svm


class ClassifierKind(str, enum.Enum):
    KNN = "KNN"
    LOGREG = "LOGREG"
    SVM = "SVM"
    RANDOM_FOREST = "RANDOM_FOREST"
    GBT = "GBT"


ClassifierHyper = Union[KnnHyper, LogRegHyper, SvmHyper, RfHyper, GbtHyper]

DEFAULT_HYPER = {
    ClassifierKind.KNN: KnnHyper,
    ClassifierKind.LOGREG: LogRegHyper,
    ClassifierKind.SVM: SvmHyper,
    ClassifierKind.RANDOM_FOREST: RfHyper,
    ClassifierKind.GBT: GbtHyper,
}

_FITTERS = {
    ClassifierKind.KNN: fit_knn,
    ClassifierKind.LOGREG: fit_logreg,
    ClassifierKind.SVM: fit_svm,
    ClassifierKind.RANDOM_FOREST: fit_forest,
    ClassifierKind.GBT: fit_gbt,
}


@dataclasses.dataclass
class ClassifierModel:
    """A fitted multiclass classifier over an ordered known-class list."""

    kind: ClassifierKind
    classes: list[ClassLabel]
    state: object
    dim: int
    seed: int

    def __post_init__(self):
        if ClassLabel.UNKNOWN in self.classes:
            raise ValueError("Unknown can never be a classifier class")

    def predict_proba_batch(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != self.dim:
            raise ValueError(f"expected dim {self.dim}, got {X.shape[1]}")
        return self.state.predict_proba(X)

    def predict_proba(self, x: np.ndarray) -> np.ndarray:
        return self.predict_proba_batch(np.asarray(x).reshape(1, -1))[0]

    def predict_batch(self, X: np.ndarray) -> list[ClassLabel]:
        # argmax takes the first maximum, i.e. the lowest class index on ties.
        idx = np.argmax(self.predict_proba_batch(X), axis=1)
        return [self.classes[i] for i in idx]

    def predict(self, x: np.ndarray) -> ClassLabel:
        return self.predict_batch(np.asarray(x).reshape(1, -1))[0]


def train_classifier(
    kind: ClassifierKind,
    X: np.ndarray,
    y_codes: np.ndarray,
    classes: Optional[Sequence[ClassLabel]] = None,
    hyper: Optional[ClassifierHyper] = None,
    seed: int = 0,
) -> ClassifierModel:
    """Fit a classifier on labeled flows.

    ``y_codes`` are canonical class codes; ``classes`` (the declared known
    set, ordered) defaults to the classes present.  Labels outside the known
    set are an error, as is single-class data.
    """
    kind = ClassifierKind(kind)
    X = np.asarray(X, dtype=np.float64)
    y_codes = np.asarray(y_codes, dtype=np.int64)
    if classes is None:
        classes = [label_of(int(c)) for c in sorted(np.unique(y_codes))]
    classes = list(classes)
    if len(classes) < 2:
        raise ValueError("need at least two classes")
    index = {code_of(c): i for i, c in enumerate(classes)}
    unknown = set(np.unique(y_codes).tolist()) - set(index)
    if unknown:
        bad = [label_of(int(c)).value for c in sorted(unknown)]
        raise ValueError(f"labels outside the known set: {bad}")
    y_local = np.array([index[int(c)] for c in y_codes], dtype=np.int64)

    hyper = hyper if hyper is not None else DEFAULT_HYPER[kind]()
    state = _FITTERS[kind](X, y_local, len(classes), hyper, seed)
    return ClassifierModel(kind=kind, classes=classes, state=state, dim=X.shape[1], seed=seed)


__all__ = [
    "ClassifierKind",
    "ClassifierModel",
    "ClassifierHyper",
    "KnnHyper",
    "LogRegHyper",
    "SvmHyper",
    "RfHyper",
    "GbtHyper",
    "KnnState",
    "LogRegState",
    "SvmState",
    "RandomForestState",
    "GbtState",
    "train_classifier",
    "DEFAULT_HYPER",
]
