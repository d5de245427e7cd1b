"""Versioned model serialization: detector and classifier models round-trip
through a JSON envelope carrying the kind tag, hyperparameters, fitted
state, threshold, and a training-data fingerprint."""

from __future__ import annotations

import dataclasses
import json
from pathlib import Path

import numpy as np

from .classifiers import (
    ClassifierKind,
    ClassifierModel,
    GbtHyper,
    KnnHyper,
    LogRegHyper,
    RfHyper,
    SvmHyper,
)
from .classifiers.forest import RandomForestState
from .classifiers.gbt import GbtState
from .classifiers.knn import KnnState
from .classifiers.linear import LogRegState
from .classifiers.svm import SvmState
from .classifiers.tree import ClassificationTree, GradientTree
from .detectors import (
    DetectorKind,
    DetectorModel,
    GmmHyper,
    IforestHyper,
    LofHyper,
    OcsvmHyper,
)
from .detectors.gmm import GmmState
from .detectors.iforest import IforestState, _Tree
from .detectors.lof import LofState
from .detectors.ocsvm import OcsvmState
from .labels import ClassLabel

FORMAT_VERSION = 1

_DETECTOR_HYPER = {
    DetectorKind.GMM: GmmHyper,
    DetectorKind.LOF: LofHyper,
    DetectorKind.OCSVM: OcsvmHyper,
    DetectorKind.IFOREST: IforestHyper,
}
_CLASSIFIER_HYPER = {
    ClassifierKind.KNN: KnnHyper,
    ClassifierKind.LOGREG: LogRegHyper,
    ClassifierKind.SVM: SvmHyper,
    ClassifierKind.RANDOM_FOREST: RfHyper,
    ClassifierKind.GBT: GbtHyper,
}


def _arr(x) -> list:
    return np.asarray(x).tolist()


def _classification_tree_dict(t: ClassificationTree) -> dict:
    return {
        "n_classes": t.n_classes,
        "max_depth": t.max_depth,
        "max_features": t.max_features,
        "feature": _arr(t.feature_),
        "threshold": _arr(t.threshold_),
        "left": _arr(t.left_),
        "right": _arr(t.right_),
        "leaf_dist": _arr(t.leaf_dist_),
    }


def _classification_tree_load(d: dict) -> ClassificationTree:
    t = ClassificationTree(
        n_classes=d["n_classes"], max_depth=d["max_depth"], max_features=d["max_features"]
    )
    t.feature_ = np.asarray(d["feature"], dtype=np.int64)
    t.threshold_ = np.asarray(d["threshold"], dtype=np.float64)
    t.left_ = np.asarray(d["left"], dtype=np.int64)
    t.right_ = np.asarray(d["right"], dtype=np.int64)
    t.leaf_dist_ = np.asarray(d["leaf_dist"], dtype=np.float64)
    return t


def _gradient_tree_dict(t: GradientTree) -> dict:
    return {
        "max_depth": t.max_depth,
        "l2": t.l2,
        "feature": _arr(t.feature_),
        "threshold": _arr(t.threshold_),
        "left": _arr(t.left_),
        "right": _arr(t.right_),
        "value": _arr(t.value_),
    }


def _gradient_tree_load(d: dict) -> GradientTree:
    t = GradientTree(max_depth=d["max_depth"], l2=d["l2"])
    t.feature_ = np.asarray(d["feature"], dtype=np.int64)
    t.threshold_ = np.asarray(d["threshold"], dtype=np.float64)
    t.left_ = np.asarray(d["left"], dtype=np.int64)
    t.right_ = np.asarray(d["right"], dtype=np.int64)
    t.value_ = np.asarray(d["value"], dtype=np.float64)
    return t


def _state_to_dict(state) -> dict:
    if isinstance(state, GmmState):
        return {
            "weights": _arr(state.weights),
            "means": _arr(state.means),
            "covariances": _arr(state.covariances),
            "cov_type": state.cov_type,
            "ll_history": list(state.ll_history),
            "n_iter": state.n_iter,
            "converged": state.converged,
        }
    if isinstance(state, LofState):
        return {
            "X": _arr(state.X),
            "k": state.k,
            "kdist": _arr(state.kdist),
            "lrd": _arr(state.lrd),
            "train_lof": _arr(state.train_lof),
        }
    if isinstance(state, OcsvmState):
        return {
            "X_sv": _arr(state.X_sv),
            "alpha_sv": _arr(state.alpha_sv),
            "rho": state.rho,
            "kernel": state.kernel,
            "gamma": state.gamma,
            "alpha_full": _arr(state.alpha_full),
            "n_iter": state.n_iter,
            "converged": state.converged,
        }
    if isinstance(state, IforestState):
        return {
            "subsample": state.subsample,
            "c_norm": state.c_norm,
            "trees": [
                {
                    "feature": _arr(t.feature),
                    "threshold": _arr(t.threshold),
                    "left": _arr(t.left),
                    "right": _arr(t.right),
                    "size": _arr(t.size),
                    "depth": _arr(t.depth),
                }
                for t in state.trees
            ],
        }
    if isinstance(state, KnnState):
        return {"X": _arr(state.X), "y": _arr(state.y), "k": state.k, "n_classes": state.n_classes}
    if isinstance(state, LogRegState):
        return {"W": _arr(state.W), "b": _arr(state.b), "converged": state.converged}
    if isinstance(state, SvmState):
        return {
            "coef": [_arr(c) for c in state.coef],
            "sv_X": [_arr(x) for x in state.sv_X],
            "bias": list(state.bias),
            "kernel": state.kernel,
            "gamma": state.gamma,
            "n_iter": list(state.n_iter),
        }
    if isinstance(state, RandomForestState):
        return {
            "n_classes": state.n_classes,
            "trees": [_classification_tree_dict(t) for t in state.trees],
        }
    if isinstance(state, GbtState):
        return {
            "n_classes": state.n_classes,
            "learning_rate": state.learning_rate,
            "loss_history": list(state.loss_history),
            "rounds": [[_gradient_tree_dict(t) for t in trees] for trees in state.rounds],
        }
    raise TypeError(f"unserializable state {type(state).__name__}")


def _detector_state_from_dict(kind: DetectorKind, d: dict):
    if kind is DetectorKind.GMM:
        return GmmState(
            weights=np.asarray(d["weights"]),
            means=np.asarray(d["means"]),
            covariances=np.asarray(d["covariances"]),
            cov_type=d["cov_type"],
            ll_history=list(d["ll_history"]),
            n_iter=d["n_iter"],
            converged=d["converged"],
        )
    if kind is DetectorKind.LOF:
        return LofState(
            X=np.asarray(d["X"]),
            k=d["k"],
            kdist=np.asarray(d["kdist"]),
            lrd=np.asarray(d["lrd"]),
            train_lof=np.asarray(d["train_lof"]),
        )
    if kind is DetectorKind.OCSVM:
        return OcsvmState(
            X_sv=np.asarray(d["X_sv"]).reshape(len(d["X_sv"]), -1),
            alpha_sv=np.asarray(d["alpha_sv"]),
            rho=d["rho"],
            kernel=d["kernel"],
            gamma=d["gamma"],
            alpha_full=np.asarray(d["alpha_full"]),
            n_iter=d["n_iter"],
            converged=d["converged"],
        )
    if kind is DetectorKind.IFOREST:
        trees = [
            _Tree(
                feature=np.asarray(t["feature"], dtype=np.int64),
                threshold=np.asarray(t["threshold"], dtype=np.float64),
                left=np.asarray(t["left"], dtype=np.int64),
                right=np.asarray(t["right"], dtype=np.int64),
                size=np.asarray(t["size"], dtype=np.int64),
                depth=np.asarray(t["depth"], dtype=np.float64),
            )
            for t in d["trees"]
        ]
        return IforestState(trees=trees, subsample=d["subsample"], c_norm=d["c_norm"])
    raise ValueError(kind)


def _classifier_state_from_dict(kind: ClassifierKind, d: dict):
    if kind is ClassifierKind.KNN:
        return KnnState(
            X=np.asarray(d["X"]), y=np.asarray(d["y"], dtype=np.int64),
            k=d["k"], n_classes=d["n_classes"],
        )
    if kind is ClassifierKind.LOGREG:
        return LogRegState(W=np.asarray(d["W"]), b=np.asarray(d["b"]), converged=d["converged"])
    if kind is ClassifierKind.SVM:
        return SvmState(
            coef=[np.asarray(c) for c in d["coef"]],
            sv_X=[np.asarray(x).reshape(len(x), -1) if len(x) else np.empty((0, 0)) for x in d["sv_X"]],
            bias=list(d["bias"]),
            kernel=d["kernel"],
            gamma=d["gamma"],
            n_iter=list(d["n_iter"]),
        )
    if kind is ClassifierKind.RANDOM_FOREST:
        return RandomForestState(
            trees=[_classification_tree_load(t) for t in d["trees"]],
            n_classes=d["n_classes"],
        )
    if kind is ClassifierKind.GBT:
        return GbtState(
            rounds=[[_gradient_tree_load(t) for t in trees] for trees in d["rounds"]],
            n_classes=d["n_classes"],
            learning_rate=d["learning_rate"],
            loss_history=list(d["loss_history"]),
        )
    raise ValueError(kind)


def detector_to_dict(model: DetectorModel) -> dict:
    return {
        "format": FORMAT_VERSION,
        "model_type": "detector",
        "kind": model.kind.value,
        "hyper": dataclasses.asdict(model.hyper),
        "state": _state_to_dict(model.state),
        "dim": model.dim,
        "threshold": model.threshold,
        "th_per": model.th_per,
        "score_direction": model.score_direction,
        "training_fingerprint": model.training_fingerprint,
    }


def detector_from_dict(d: dict) -> DetectorModel:
    if d.get("format") != FORMAT_VERSION:
        raise ValueError(f"unsupported model format {d.get('format')!r}")
    kind = DetectorKind(d["kind"])
    hyper = _DETECTOR_HYPER[kind](**d["hyper"])
    return DetectorModel(
        kind=kind,
        hyper=hyper,
        state=_detector_state_from_dict(kind, d["state"]),
        dim=d["dim"],
        threshold=d["threshold"],
        th_per=d["th_per"],
        score_direction=d["score_direction"],
        training_fingerprint=d["training_fingerprint"],
    )


def classifier_to_dict(model: ClassifierModel) -> dict:
    return {
        "format": FORMAT_VERSION,
        "model_type": "classifier",
        "kind": model.kind.value,
        "classes": [c.value for c in model.classes],
        "state": _state_to_dict(model.state),
        "dim": model.dim,
        "seed": model.seed,
    }


def classifier_from_dict(d: dict) -> ClassifierModel:
    if d.get("format") != FORMAT_VERSION:
        raise ValueError(f"unsupported model format {d.get('format')!r}")
    kind = ClassifierKind(d["kind"])
    return ClassifierModel(
        kind=kind,
        classes=[ClassLabel(c) for c in d["classes"]],
        state=_classifier_state_from_dict(kind, d["state"]),
        dim=d["dim"],
        seed=d["seed"],
    )


def save_model(model, path: str | Path) -> None:
    if isinstance(model, DetectorModel):
        payload = detector_to_dict(model)
    elif isinstance(model, ClassifierModel):
        payload = classifier_to_dict(model)
    else:
        raise TypeError(f"cannot serialize {type(model).__name__}")
    Path(path).write_text(json.dumps(payload))


def load_model(path: str | Path):
    d = json.loads(Path(path).read_text())
    if d.get("model_type") == "detector":
        return detector_from_dict(d)
    if d.get("model_type") == "classifier":
        return classifier_from_dict(d)
    raise ValueError(f"not a model file: {path}")
