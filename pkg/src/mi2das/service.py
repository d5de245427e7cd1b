"""Long-running pipeline service: flow classification through both pooling
layers, an analyst labeling queue over the unknown pool, serialized retrains
publishing immutable model snapshots, and JSON-lines persistence so the
labeling loop survives restarts.

Single writer (the retrain/mutation lock), unlimited concurrent readers:
every request observes one consistent snapshot reference.
"""

from __future__ import annotations

import dataclasses
import json
import threading
import time
from collections import OrderedDict
from pathlib import Path
from typing import Optional

import numpy as np
from fastapi import FastAPI, HTTPException, Query
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel

from .classifiers import ClassifierKind, ClassifierModel, RfHyper, train_classifier
from .data import SplitSpec, SyntheticConfig, attack_subset, class_subset, generate_synthetic, make_split
from .detectors import DetectorKind, DetectorModel, GmmHyper
from .labels import ATTACK_CLASSES, ClassLabel, code_of, label_of, parse_label
from .metrics import MetricBlock, confusion, entropy, multiclass_metrics
from .pooling import Layer1TrainConfig, PartitionSpec, Pool, route_batch, train_layer1, train_layer2
from .serialize import (
    classifier_from_dict,
    classifier_to_dict,
    detector_from_dict,
    detector_to_dict,
)


@dataclasses.dataclass(frozen=True)
class ModelSnapshot:
    version: int
    layer1: DetectorModel
    layer2: DetectorModel
    classifier: ClassifierModel


@dataclasses.dataclass(frozen=True)
class ServiceConfig:
    data_dir: Optional[str] = None  # persistence root; None = in-memory only
    pool_retention: int = 100_000
    n_known_bootstrap: int = 10
    synthetic: SyntheticConfig = SyntheticConfig(
        n_classes=15, dim=16, samples_per_class=120, class_separation=8.0, normal_modes=3, seed=7
    )
    train_fraction: float = 0.7
    l1_nc: int = 3
    l1_th_per: float = 5.0
    l2_th_per: float = 5.0
    al_strategy: str = "entropy"
    cors_origins: tuple[str, ...] = ("*",)
    seed: int = 7


class PipelineService:
    """All mutable pipeline state behind one lock; snapshots are immutable."""

    def __init__(self, config: ServiceConfig):
        self.config = config
        self.lock = threading.RLock()
        self.snapshot: Optional[ModelSnapshot] = None
        self.snapshots_json: dict[int, dict] = {}
        self.unknown_store: OrderedDict[str, dict] = OrderedDict()
        self.queue: OrderedDict[str, dict] = OrderedDict()
        self.labeled_ids: set[str] = set()
        self.oracle_labels: list[dict] = []  # {"id", "label", "features"}
        self.history: list[dict] = []
        self.audit: list[dict] = []
        self.eviction_log: list[dict] = []
        self.labels_since_retrain = 0
        self.started_at = time.time()
        self._event_count = 0
        self._base_train = None  # known-pool training data for retrains
        self._eval_set = None
        self.fail_next_retrain = False  # fault-injection hook for tests

        if self._persist_dir() and (self._persist_dir() / "snapshot.json").exists():
            self._restore()
        else:
            self._bootstrap()

    # -- persistence ------------------------------------------------------

    def _persist_dir(self) -> Optional[Path]:
        return Path(self.config.data_dir) if self.config.data_dir else None

    def _events_path(self) -> Optional[Path]:
        d = self._persist_dir()
        return d / "events.jsonl" if d else None

    def _append_event(self, event: dict) -> None:
        self._event_count += 1
        path = self._events_path()
        if path:
            path.parent.mkdir(parents=True, exist_ok=True)
            with open(path, "a") as fh:
                fh.write(json.dumps(event) + "\n")

    def _write_snapshot_file(self) -> None:
        d = self._persist_dir()
        if not d:
            return
        d.mkdir(parents=True, exist_ok=True)
        state = {
            "version": self.snapshot.version,
            "event_offset": self._event_count,
            "models": self.snapshots_json[self.snapshot.version],
            "unknown_store": list(self.unknown_store.items()),
            "queue": list(self.queue.items()),
            "labeled_ids": sorted(self.labeled_ids),
            "oracle_labels": self.oracle_labels,
            "history": self.history,
            "audit": self.audit,
            "labels_since_retrain": self.labels_since_retrain,
            "base_train": {
                "X": self._base_train[0].tolist(),
                "y": self._base_train[1].tolist(),
                "ids": list(self._base_train[2]),
            },
            "eval_set": {
                "X": self._eval_set[0].tolist(),
                "y": self._eval_set[1].tolist(),
            },
        }
        (d / "snapshot.json").write_text(json.dumps(state))

    def _restore(self) -> None:
        d = self._persist_dir()
        state = json.loads((d / "snapshot.json").read_text())
        models = state["models"]
        snap = ModelSnapshot(
            version=state["version"],
            layer1=detector_from_dict(models["layer1"]),
            layer2=detector_from_dict(models["layer2"]),
            classifier=classifier_from_dict(models["classifier"]),
        )
        self.snapshot = snap
        self.snapshots_json[snap.version] = models
        self.unknown_store = OrderedDict((k, v) for k, v in state["unknown_store"])
        self.queue = OrderedDict((k, v) for k, v in state["queue"])
        self.labeled_ids = set(state["labeled_ids"])
        self.oracle_labels = state["oracle_labels"]
        self.history = state["history"]
        self.audit = state["audit"]
        self.labels_since_retrain = state["labels_since_retrain"]
        bt = state["base_train"]
        self._base_train = (
            np.asarray(bt["X"]),
            np.asarray(bt["y"], dtype=np.int64),
            list(bt["ids"]),
        )
        ev = state["eval_set"]
        self._eval_set = (np.asarray(ev["X"]), np.asarray(ev["y"], dtype=np.int64))
        self._event_count = state["event_offset"]
        events = self._events_path()
        if events and events.exists():
            with open(events) as fh:
                lines = fh.readlines()
            for line in lines[state["event_offset"] :]:
                self._replay(json.loads(line))
                self._event_count += 1

    def _replay(self, event: dict) -> None:
        if event["type"] == "unknown_added":
            self.unknown_store[event["id"]] = {
                "features": event["features"],
                "layer1_score": event["layer1_score"],
                "layer2_score": event["layer2_score"],
            }
        elif event["type"] == "labels":
            for item in event["accepted"]:
                self._ingest_label(item["id"], parse_label(item["label"]), event["analyst"])
            for qid in event["abstained"]:
                self._abstain(qid)

    # -- bootstrap --------------------------------------------------------

    def _bootstrap(self) -> None:
        cfg = self.config
        ds = generate_synthetic(cfg.synthetic)
        train, test = make_split(
            ds, SplitSpec(train_fraction=cfg.train_fraction, seed=cfg.seed)
        )
        l1 = train_layer1(
            train,
            Layer1TrainConfig(
                detector=DetectorKind.GMM,
                hyper=GmmHyper(nc=cfg.l1_nc, seed=cfg.seed),
                th_per=cfg.l1_th_per,
            ),
        )
        attacks_train = attack_subset(train)
        known = ATTACK_CLASSES[: cfg.n_known_bootstrap]
        part = PartitionSpec.from_known(known)
        l2 = train_layer2(
            attacks_train, part, DetectorKind.GMM, GmmHyper(nc=3, seed=cfg.seed), cfg.l2_th_per
        )
        known_train = class_subset(attacks_train, known)
        clf = train_classifier(
            ClassifierKind.RANDOM_FOREST,
            known_train.X,
            known_train.y,
            classes=sorted(known, key=code_of),
            hyper=RfHyper(n_trees=60),
            seed=cfg.seed,
        )
        self._base_train = (
            known_train.X.copy(),
            known_train.y.copy(),
            [str(i) for i in known_train.ids],
        )
        attacks_test = attack_subset(test)
        self._eval_set = (attacks_test.X.copy(), attacks_test.y.copy())
        self._publish(ModelSnapshot(version=1, layer1=l1, layer2=l2, classifier=clf))
        self._write_snapshot_file()

    def _publish(self, snap: ModelSnapshot) -> None:
        self.snapshots_json[snap.version] = {
            "layer1": detector_to_dict(snap.layer1),
            "layer2": detector_to_dict(snap.layer2),
            "classifier": classifier_to_dict(snap.classifier),
        }
        self.snapshot = snap  # reference swap: readers see old or new, never partial

    # -- pipeline operations ----------------------------------------------

    def classify(self, features: list[float], flow_id: Optional[str] = None) -> dict:
        snap = self.snapshot
        x = np.asarray(features, dtype=np.float64)
        if x.ndim != 1 or len(x) != snap.layer1.dim:
            raise HTTPException(status_code=400, detail=f"expected {snap.layer1.dim} features")
        if not np.isfinite(x).all():
            raise HTTPException(status_code=400, detail="non-finite feature values")
        assignment = route_batch(x.reshape(1, -1), snap.layer1, snap.layer2)[0]
        out = {"pool": assignment.pool.value, "layer1_score": assignment.layer1_score,
               "layer2_score": assignment.layer2_score, "model_version": snap.version}
        if assignment.pool is Pool.KNOWN_ATTACK:
            proba = snap.classifier.predict_proba(x)
            top = int(np.argmax(proba))
            out["predicted_class"] = snap.classifier.classes[top].value
            out["probabilities"] = {
                c.value: float(p) for c, p in zip(snap.classifier.classes, proba)
            }
        elif assignment.pool is Pool.UNKNOWN:
            with self.lock:
                fid = flow_id or f"flow-{self._event_count:08d}-{len(self.unknown_store)}"
                if fid not in self.labeled_ids and fid not in self.queue:
                    self.unknown_store[fid] = {
                        "features": x.tolist(),
                        "layer1_score": assignment.layer1_score,
                        "layer2_score": assignment.layer2_score,
                    }
                    self._append_event(
                        {"type": "unknown_added", "id": fid,
                         "features": x.tolist(),
                         "layer1_score": assignment.layer1_score,
                         "layer2_score": assignment.layer2_score}
                    )
                    while len(self.unknown_store) > self.config.pool_retention:
                        evicted, _ = self.unknown_store.popitem(last=False)
                        self.eviction_log.append({"id": evicted, "at": time.time()})
                out["flow_id"] = fid
        return out

    def al_queries(self, limit: int) -> list[dict]:
        snap = self.snapshot
        with self.lock:
            want = max(limit - len(self.queue), 0)
            if want > 0 and self.unknown_store:
                ids = list(self.unknown_store.keys())
                X = np.asarray([self.unknown_store[i]["features"] for i in ids])
                proba = snap.classifier.predict_proba_batch(X)
                if self.config.al_strategy == "least_confidence":
                    u = 1.0 - proba.max(axis=1)
                elif self.config.al_strategy == "margin":
                    part = np.sort(proba, axis=1)
                    u = -(part[:, -1] - part[:, -2])
                else:
                    u = np.array([entropy(p) for p in proba])
                order = np.lexsort((np.array(ids), -u))[:want]
                for rank in order:
                    fid = ids[rank]
                    record = self.unknown_store.pop(fid)
                    dist = proba[rank]
                    top3 = np.argsort(-dist)[:3]
                    self.queue[fid] = {
                        "id": fid,
                        "uncertainty": float(u[rank]),
                        "top_classes": [
                            {"label": snap.classifier.classes[t].value, "p": float(dist[t])}
                            for t in top3
                        ],
                        "features": record["features"],
                        "model_version": snap.version,
                    }
            rows = sorted(self.queue.values(), key=lambda r: (-r["uncertainty"], r["id"]))
            return rows[:limit]

    def _ingest_label(self, qid: str, label: ClassLabel, analyst: str) -> None:
        record = self.queue.pop(qid)
        self.labeled_ids.add(qid)
        self.oracle_labels.append(
            {"id": qid, "label": label.value, "features": record["features"]}
        )
        self.labels_since_retrain += 1
        self.audit.append(
            {"id": qid, "label": label.value, "analyst": analyst, "at": time.time()}
        )

    def _abstain(self, qid: str) -> None:
        record = self.queue.pop(qid)
        self.unknown_store[qid] = {
            "features": record["features"],
            "layer1_score": None,
            "layer2_score": None,
        }

    def submit_labels(self, items: dict[str, str], analyst: str) -> dict:
        accepted, rejected, abstained = [], [], []
        with self.lock:
            event_accepted = []
            for qid, raw in items.items():
                if qid in self.labeled_ids:
                    rejected.append({"id": qid, "reason": "already labeled"})
                    continue
                if qid not in self.queue:
                    rejected.append({"id": qid, "reason": "not queued"})
                    continue
                if raw == "abstain":
                    self._abstain(qid)
                    abstained.append(qid)
                    continue
                try:
                    label = parse_label(raw)
                except ValueError:
                    rejected.append({"id": qid, "reason": f"label outside taxonomy: {raw}"})
                    continue
                self._ingest_label(qid, label, analyst)
                accepted.append(qid)
                event_accepted.append({"id": qid, "label": label.value})
            if event_accepted or abstained:
                self._append_event(
                    {"type": "labels", "analyst": analyst,
                     "accepted": event_accepted, "abstained": abstained}
                )
        return {"accepted": len(accepted), "accepted_ids": accepted,
                "rejected": rejected, "abstained": abstained}

    def retrain(self) -> dict:
        with self.lock:
            if self.labels_since_retrain == 0:
                raise HTTPException(status_code=409, detail="no new labels since last retrain")
            prev = self.snapshot
            t0 = time.perf_counter()
            try:
                if self.fail_next_retrain:
                    self.fail_next_retrain = False
                    raise RuntimeError("injected training failure")
                X0, y0, _ = self._base_train
                extra_X = np.asarray([r["features"] for r in self.oracle_labels])
                extra_y = np.asarray(
                    [code_of(parse_label(r["label"])) for r in self.oracle_labels],
                    dtype=np.int64,
                )
                X = np.vstack([X0, extra_X]) if len(extra_X) else X0
                y = np.concatenate([y0, extra_y]) if len(extra_y) else y0
                classes = [label_of(int(c)) for c in sorted(np.unique(y))]
                clf = train_classifier(
                    ClassifierKind.RANDOM_FOREST, X, y, classes=classes,
                    hyper=RfHyper(n_trees=60), seed=self.config.seed + prev.version,
                )
                snap = ModelSnapshot(
                    version=prev.version + 1,
                    layer1=prev.layer1,
                    layer2=prev.layer2,
                    classifier=clf,
                )
                metrics = self._evaluate(clf)
                self._publish(snap)
                self.labels_since_retrain = 0
                report = {
                    "version": snap.version,
                    "classes": [c.value for c in classes],
                    "labeled_by_provenance": {
                        "known_pool": int(len(y0)),
                        "oracle_query": int(len(extra_y)),
                        "seed": 0,
                        "pseudo_label": 0,
                    },
                    "unknown_remaining": len(self.unknown_store),
                    "metrics": metrics.to_dict(),
                    "wall_clock": time.perf_counter() - t0,
                    "at": time.time(),
                }
                self.history.append(report)
                self._append_event({"type": "retrain", "version": snap.version})
                self._write_snapshot_file()
                return report
            except HTTPException:
                raise
            except Exception as exc:
                # Previous snapshot stays live; surface the failure.
                self.snapshot = prev
                raise HTTPException(status_code=500, detail=f"retrain failed: {exc}") from exc

    def _evaluate(self, clf: ClassifierModel) -> MetricBlock:
        X, y = self._eval_set
        codes = [code_of(c) for c in clf.classes]
        mask = np.isin(y, codes)
        if not mask.any():
            return MetricBlock()
        truth = [label_of(int(c)) for c in y[mask]]
        preds = clf.predict_batch(X[mask])
        return multiclass_metrics(confusion(truth, preds, clf.classes))

    def status(self) -> dict:
        snap = self.snapshot
        return {
            "model_version": snap.version,
            "classes": [c.value for c in snap.classifier.classes],
            "pools": self.pool_summary()["counts"],
            "queue_size": len(self.queue),
            "labels_since_retrain": self.labels_since_retrain,
            "uptime_s": time.time() - self.started_at,
        }

    def pool_summary(self) -> dict:
        return {
            "counts": {
                "unknown": len(self.unknown_store),
                "queued": len(self.queue),
                "labeled": len(self.labeled_ids),
            },
            "unknown_ids": list(self.unknown_store.keys()),
            "queued_ids": list(self.queue.keys()),
            "labeled_ids": sorted(self.labeled_ids),
            "evictions": len(self.eviction_log),
        }


class ClassifyRequest(BaseModel):
    features: list[float]
    flow_id: Optional[str] = None


class LabelSubmission(BaseModel):
    labels: dict[str, str]  # id -> class name or "abstain"
    analyst: str = "analyst"


def create_app(config: Optional[ServiceConfig] = None,
               service: Optional[PipelineService] = None) -> FastAPI:
    svc = service or PipelineService(config or ServiceConfig())
    app = FastAPI(title="mi2das pipeline service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=list(svc.config.cors_origins),
        allow_methods=["*"],
        allow_headers=["*"],
    )
    app.state.service = svc

    @app.get("/status")
    def status():
        return svc.status()

    @app.post("/classify")
    def classify(req: ClassifyRequest):
        return svc.classify(req.features, req.flow_id)

    @app.get("/pools")
    def pools():
        return svc.pool_summary()

    @app.get("/al/queries")
    def al_queries(limit: int = Query(default=20, ge=1, le=500)):
        return {"queries": svc.al_queries(limit)}

    @app.post("/al/labels")
    def al_labels(sub: LabelSubmission):
        return svc.submit_labels(sub.labels, sub.analyst)

    @app.post("/retrain")
    def retrain():
        return svc.retrain()

    @app.get("/metrics/history")
    def metrics_history():
        return {"history": svc.history}

    @app.get("/models/{version}")
    def models(version: int):
        payload = svc.snapshots_json.get(version)
        if payload is None:
            raise HTTPException(status_code=404, detail=f"no snapshot for version {version}")
        return payload

    return app


def serve(config: ServiceConfig, host: str = "127.0.0.1", port: int = 8137) -> None:
    import uvicorn

    uvicorn.run(create_app(config), host=host, port=port, log_level="warning")
