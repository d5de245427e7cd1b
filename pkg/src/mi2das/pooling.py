"""Hierarchical traffic pooling: Layer 1 routes flows into Normal vs. Attack,
Layer 2 splits attack flows into Known-Attack vs. Unknown under a configured
known/unknown class partition.  Both layers are calibrated anomaly detectors.
"""

from __future__ import annotations

import dataclasses
import enum
import itertools
import math
from typing import Optional, Sequence

import numpy as np

from .data import Dataset
from .detectors import (
    DetectorHyper,
    DetectorKind,
    DetectorModel,
    calibrate_threshold,
    fit_detector,
)
from .labels import ATTACK_CLASSES, UNLABELED, ClassLabel, code_of


class Pool(str, enum.Enum):
    NORMAL = "NormalPool"
    KNOWN_ATTACK = "KnownAttackPool"
    UNKNOWN = "UnknownPool"


@dataclasses.dataclass(frozen=True)
class Layer1TrainConfig:
    """Layer-1 training mode.

    ``novelty`` fits on normal samples only; ``outlier`` mixes in attack
    samples at exactly ``contamination_ratio`` normal per 1 attack (floored).
    ``calibration_holdout`` > 0 withholds that fraction of the fitting set
    from model fitting and calibrates the threshold on it instead, so the
    percentile reflects held-out rather than in-sample scores.
    """

    detector: DetectorKind
    hyper: DetectorHyper
    th_per: float = 5.0
    mode: str = "novelty"
    contamination_ratio: int = 100
    calibration_holdout: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.mode not in ("novelty", "outlier"):
            raise ValueError(f"unknown layer-1 mode {self.mode!r}")
        if self.mode == "outlier" and self.contamination_ratio < 1:
            raise ValueError("contamination_ratio must be >= 1")
        if not 0.0 <= self.calibration_holdout < 1.0:
            raise ValueError("calibration_holdout must lie in [0, 1)")


@dataclasses.dataclass(frozen=True)
class PartitionSpec:
    """A known/unknown partition of the attack taxonomy."""

    known: frozenset[ClassLabel]
    unknown: frozenset[ClassLabel]

    def __post_init__(self):
        attacks = frozenset(ATTACK_CLASSES)
        if self.known | self.unknown != attacks:
            raise ValueError("known and unknown must cover all attack classes")
        if self.known & self.unknown:
            raise ValueError("known and unknown must be disjoint")
        if ClassLabel.NORMAL in self.known or ClassLabel.NORMAL in self.unknown:
            raise ValueError("Normal belongs to neither partition side")

    @staticmethod
    def from_known(known: Sequence[ClassLabel]) -> "PartitionSpec":
        known_set = frozenset(known)
        return PartitionSpec(known=known_set, unknown=frozenset(ATTACK_CLASSES) - known_set)

    def known_sorted(self) -> list[ClassLabel]:
        return sorted(self.known, key=lambda c: c.value)

    def to_json(self) -> dict:
        return {
            "known": [c.value for c in self.known_sorted()],
            "unknown": [c.value for c in sorted(self.unknown, key=lambda c: c.value)],
        }


@dataclasses.dataclass(frozen=True)
class PoolAssignment:
    pool: Pool
    layer1_score: float
    layer2_score: Optional[float] = None

    def __post_init__(self):
        if (self.pool is Pool.NORMAL) != (self.layer2_score is None):
            raise ValueError("layer2_score present iff the flow left layer 1")

    def to_json(self) -> dict:
        return {
            "pool": self.pool.value,
            "layer1_score": self.layer1_score,
            "layer2_score": self.layer2_score,
        }


def train_layer1(train: Dataset, cfg: Layer1TrainConfig) -> DetectorModel:
    """Fit and calibrate the normal-vs-attack detector."""
    normal_code = code_of(ClassLabel.NORMAL)
    normal_idx = np.flatnonzero(train.y == normal_code)
    if len(normal_idx) == 0:
        raise ValueError("layer-1 training needs at least one normal sample")

    if cfg.mode == "novelty":
        fit_X = train.X[normal_idx]
    else:
        attack_idx = np.flatnonzero((train.y != normal_code) & (train.y != UNLABELED))
        n_attack = len(normal_idx) // cfg.contamination_ratio
        if n_attack < 1 or len(attack_idx) == 0:
            raise ValueError(
                f"outlier mode at ratio {cfg.contamination_ratio}:1 needs "
                f"{max(n_attack, 1)} attack samples, have {len(attack_idx)}"
            )
        if n_attack > len(attack_idx):
            raise ValueError(
                f"ratio {cfg.contamination_ratio}:1 unattainable: need {n_attack} "
                f"attack samples, have {len(attack_idx)}"
            )
        rng = np.random.default_rng(cfg.seed)
        order = np.argsort(train.ids[attack_idx], kind="stable")
        take = rng.choice(len(attack_idx), size=n_attack, replace=False)
        fit_X = np.vstack([train.X[normal_idx], train.X[attack_idx[order][take]]])

    if cfg.calibration_holdout > 0.0:
        rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, 9221]))
        n_hold = max(1, int(round(cfg.calibration_holdout * len(fit_X))))
        if n_hold >= len(fit_X):
            raise ValueError("calibration holdout leaves no fitting samples")
        perm = rng.permutation(len(fit_X))
        hold_X, fit_X = fit_X[perm[:n_hold]], fit_X[perm[n_hold:]]
        model = fit_detector(cfg.detector, fit_X, cfg.hyper)
        return calibrate_threshold(model, hold_X, cfg.th_per)

    model = fit_detector(cfg.detector, fit_X, cfg.hyper)
    return calibrate_threshold(model, fit_X, cfg.th_per)


def train_layer2(
    attack_train: Dataset,
    part: PartitionSpec,
    detector: DetectorKind,
    hyper: DetectorHyper,
    th_per: float = 5.0,
) -> DetectorModel:
    """Fit the known-vs-unknown attack detector on known-attack samples only."""
    if not part.known:
        raise ValueError("empty known set")
    known_codes = [code_of(c) for c in part.known]
    mask = np.isin(attack_train.y, known_codes)
    if not mask.any():
        raise ValueError("no training samples belong to the known classes")
    fit_X = attack_train.X[mask]
    model = fit_detector(detector, fit_X, hyper)
    return calibrate_threshold(model, fit_X, th_per)


def route(x: np.ndarray, layer1: DetectorModel, layer2: DetectorModel) -> PoolAssignment:
    """Send one flow through both layers; layer 2 is consulted only for flows
    layer 1 flagged as attacks."""
    return route_batch(np.asarray(x).reshape(1, -1), layer1, layer2)[0]


def route_batch(
    X: np.ndarray, layer1: DetectorModel, layer2: DetectorModel
) -> list[PoolAssignment]:
    if layer1.threshold is None or layer2.threshold is None:
        raise ValueError("both layers must be calibrated before routing")
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    s1 = layer1.score_batch(X)
    is_attack = s1 < layer1.threshold
    s2 = np.full(len(X), np.nan)
    if is_attack.any():
        s2[is_attack] = layer2.score_batch(X[is_attack])
    out: list[PoolAssignment] = []
    for i in range(len(s1)):
        if not is_attack[i]:
            out.append(PoolAssignment(pool=Pool.NORMAL, layer1_score=float(s1[i])))
        else:
            pool = Pool.KNOWN_ATTACK if s2[i] >= layer2.threshold else Pool.UNKNOWN
            out.append(
                PoolAssignment(pool=pool, layer1_score=float(s1[i]), layer2_score=float(s2[i]))
            )
    return out


def enumerate_partitions(
    n_known: int, limit: Optional[int] = None, seed: int = 0
) -> list[PartitionSpec]:
    """All C(14, n_known) known/unknown partitions in lexicographic order, or
    a seeded uniform sample of ``limit`` of them without replacement."""
    if not 1 <= n_known <= 13:
        raise ValueError("n_known must lie in [1, 13]")
    attacks = sorted(ATTACK_CLASSES, key=lambda c: c.value)
    total = math.comb(len(attacks), n_known)
    if limit is not None:
        if limit > total:
            raise ValueError(f"limit {limit} exceeds C(14,{n_known}) = {total}")
        rng = np.random.default_rng(seed)
        pick = set(rng.choice(total, size=limit, replace=False).tolist())
        combos = (
            c for i, c in enumerate(itertools.combinations(attacks, n_known)) if i in pick
        )
    else:
        combos = itertools.combinations(attacks, n_known)
    return [PartitionSpec.from_known(c) for c in combos]
