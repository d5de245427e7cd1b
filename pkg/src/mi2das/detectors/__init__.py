"""Anomaly detectors behind one contract: fit on (mostly) clean data, score
any vector (higher score = more normal), calibrate a percentile threshold on
training scores, and flag outliers below it.
"""

from __future__ import annotations

import dataclasses
import enum
import hashlib
from typing import Optional, Union

import numpy as np

from .gmm import GmmHyper, GmmState, fit_gmm
from .iforest import IforestHyper, IforestState, fit_iforest
from .lof import LofHyper, LofState, fit_lof
from .ocsvm import OcsvmHyper, OcsvmState, fit_ocsvm


class DetectorKind(str, enum.Enum):
    GMM = "GMM"
    LOF = "LOF"
    OCSVM = "OCSVM"
    IFOREST = "IFOREST"


class Judgment(str, enum.Enum):
    INLIER = "Inlier"
    OUTLIER = "Outlier"


DetectorHyper = Union[GmmHyper, LofHyper, OcsvmHyper, IforestHyper]

_HYPER_TYPES = {
    DetectorKind.GMM: GmmHyper,
    DetectorKind.LOF: LofHyper,
    DetectorKind.OCSVM: OcsvmHyper,
    DetectorKind.IFOREST: IforestHyper,
}

_FITTERS = {
    DetectorKind.GMM: fit_gmm,
    DetectorKind.LOF: fit_lof,
    DetectorKind.OCSVM: fit_ocsvm,
    DetectorKind.IFOREST: fit_iforest,
}


@dataclasses.dataclass
class DetectorModel:
    """A fitted anomaly model plus (after calibration) its score threshold.

    All kinds are normalized so a higher score means more normal; the
    threshold is a percentile of the training-score distribution.
    """

    kind: DetectorKind
    hyper: DetectorHyper
    state: object
    dim: int
    threshold: Optional[float] = None
    th_per: Optional[float] = None
    score_direction: str = "higher_is_normal"
    training_fingerprint: str = ""

    def score_batch(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != self.dim:
            raise ValueError(f"expected dim {self.dim}, got {X.shape[1]}")
        return self.state.score(X)

    def score(self, x: np.ndarray) -> float:
        return float(self.score_batch(np.asarray(x).reshape(1, -1))[0])

    def predict_batch(self, X: np.ndarray) -> list[Judgment]:
        if self.threshold is None:
            raise ValueError("threshold unset; run calibrate_threshold first")
        s = self.score_batch(X)
        # Ties (score == threshold) are inliers.
        return [Judgment.OUTLIER if v < self.threshold else Judgment.INLIER for v in s]

    def predict(self, x: np.ndarray) -> Judgment:
        return self.predict_batch(np.asarray(x).reshape(1, -1))[0]


def data_fingerprint(X: np.ndarray) -> str:
    return hashlib.sha256(np.ascontiguousarray(X, dtype=np.float64).tobytes()).hexdigest()[:16]


def fit_detector(kind: DetectorKind, X: np.ndarray, hyper: DetectorHyper) -> DetectorModel:
    """Fit one of the four detector kinds; threshold stays unset."""
    kind = DetectorKind(kind)
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or len(X) == 0:
        raise ValueError("training data must be a non-empty 2-D array")
    expected = _HYPER_TYPES[kind]
    if not isinstance(hyper, expected):
        raise TypeError(f"{kind.value} needs {expected.__name__}, got {type(hyper).__name__}")
    state = _FITTERS[kind](X, hyper)
    return DetectorModel(
        kind=kind,
        hyper=hyper,
        state=state,
        dim=X.shape[1],
        training_fingerprint=data_fingerprint(X),
    )


def calibrate_threshold(model: DetectorModel, X_train: np.ndarray, th_per: float) -> DetectorModel:
    """Set the threshold at the th_per-th percentile (linear interpolation)
    of the training scores; outliers are strictly below it."""
    if not 0.0 <= th_per <= 100.0:
        raise ValueError("th_per must lie in [0, 100]")
    X_train = np.asarray(X_train, dtype=np.float64)
    if len(X_train) == 0:
        raise ValueError("empty calibration set")
    scores = model.score_batch(X_train)
    threshold = float(np.percentile(scores, th_per))
    return dataclasses.replace(model, threshold=threshold, th_per=float(th_per))


__all__ = [
    "DetectorKind",
    "Judgment",
    "DetectorModel",
    "DetectorHyper",
    "GmmHyper",
    "GmmState",
    "LofHyper",
    "LofState",
    "OcsvmHyper",
    "OcsvmState",
    "IforestHyper",
    "IforestState",
    "fit_detector",
    "calibrate_threshold",
    "data_fingerprint",
]
