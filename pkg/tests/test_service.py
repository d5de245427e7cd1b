import pytest
from fastapi.testclient import TestClient

from mi2das.data import SyntheticConfig, attack_subset, class_subset, generate_synthetic
from mi2das.labels import ATTACK_CLASSES, ClassLabel
from mi2das.service import PipelineService, ServiceConfig, create_app

SMALL = ServiceConfig(
    synthetic=SyntheticConfig(
        n_classes=15, dim=8, samples_per_class=50, class_separation=8.0, normal_modes=2, seed=13
    ),
    n_known_bootstrap=10,
    seed=13,
)


def feed_unknown_flows(client, n=20):
    """Push flows from the two never-known classes through /classify."""
    ds = generate_synthetic(SMALL.synthetic)
    unknown_classes = ATTACK_CLASSES[10:14]
    flows = class_subset(attack_subset(ds), unknown_classes)
    added = []
    for i in range(min(n, len(flows))):
        r = client.post(
            "/classify",
            json={"features": flows.X[i].tolist(), "flow_id": f"u-{i:03d}"},
        )
        assert r.status_code == 200
        if r.json()["pool"] == "UnknownPool":
            added.append(r.json()["flow_id"])
    return added, flows


@pytest.fixture()
def client(tmp_path):
    svc = PipelineService(
        ServiceConfig(**{**SMALL.__dict__, "data_dir": str(tmp_path / "state")})
    )
    return TestClient(create_app(service=svc))


class TestStatusAndClassify:
    def test_bootstrap_version_one(self, client):
        r = client.get("/status")
        assert r.status_code == 200
        assert r.json()["model_version"] == 1
        assert len(r.json()["classes"]) == 10

    def test_normal_flow_routes_normal(self, client):
        ds = generate_synthetic(SMALL.synthetic)
        normal = class_subset(ds, [ClassLabel.NORMAL])
        votes = []
        for x in normal.X[:20]:
            r = client.post("/classify", json={"features": x.tolist()})
            votes.append(r.json()["pool"])
        assert votes.count("NormalPool") >= 15

    def test_known_attack_gets_distribution(self, client):
        ds = generate_synthetic(SMALL.synthetic)
        known = class_subset(attack_subset(ds), [ATTACK_CLASSES[0]])
        seen_known = 0
        for x in known.X[:20]:
            body = client.post("/classify", json={"features": x.tolist()}).json()
            if body["pool"] == "KnownAttackPool":
                seen_known += 1
                p = sum(body["probabilities"].values())
                assert abs(p - 1.0) < 1e-9
                assert body["predicted_class"] in body["probabilities"]
        assert seen_known >= 15

    def test_unknown_flow_lands_in_pool(self, client):
        added, _ = feed_unknown_flows(client, 10)
        assert added
        pools = client.get("/pools").json()
        assert pools["counts"]["unknown"] == len(added)
        assert set(added) <= set(pools["unknown_ids"])

    def test_malformed_vector_400(self, client):
        r = client.post("/classify", json={"features": [1.0, 2.0]})
        assert r.status_code == 400
        raw = '{"features": [NaN, 0, 0, 0, 0, 0, 0, 0]}'
        r = client.post("/classify", content=raw, headers={"content-type": "application/json"})
        assert r.status_code in (400, 422)


class TestAlLoop:
    def test_queries_sorted_and_idempotent(self, client):
        feed_unknown_flows(client, 15)
        a = client.get("/al/queries", params={"limit": 5}).json()["queries"]
        b = client.get("/al/queries", params={"limit": 5}).json()["queries"]
        assert [q["id"] for q in a] == [q["id"] for q in b]
        u = [q["uncertainty"] for q in a]
        assert u == sorted(u, reverse=True)
        # queue and pool are disjoint
        pools = client.get("/pools").json()
        assert not set(pools["queued_ids"]) & set(pools["unknown_ids"])

    def test_label_submission_moves_sample(self, client):
        feed_unknown_flows(client, 10)
        q = client.get("/al/queries", params={"limit": 3}).json()["queries"]
        target = q[0]["id"]
        r = client.post(
            "/al/labels",
            json={"labels": {target: ATTACK_CLASSES[10].value}, "analyst": "t"},
        )
        assert r.json()["accepted"] == 1
        pools = client.get("/pools").json()
        assert target in pools["labeled_ids"]
        assert target not in pools["unknown_ids"]
        assert target not in pools["queued_ids"]

    def test_unknown_label_rejected(self, client):
        feed_unknown_flows(client, 5)
        q = client.get("/al/queries", params={"limit": 1}).json()["queries"]
        r = client.post("/al/labels", json={"labels": {q[0]["id"]: "Unknown"}})
        body = r.json()
        assert body["accepted"] == 0
        assert "taxonomy" in body["rejected"][0]["reason"]

    def test_duplicate_submission_rejected(self, client):
        feed_unknown_flows(client, 5)
        q = client.get("/al/queries", params={"limit": 1}).json()["queries"]
        qid = q[0]["id"]
        client.post("/al/labels", json={"labels": {qid: ATTACK_CLASSES[10].value}})
        r = client.post("/al/labels", json={"labels": {qid: ATTACK_CLASSES[10].value}})
        assert r.json()["rejected"][0]["reason"] == "already labeled"

    def test_not_queued_rejected_batch_continues(self, client):
        feed_unknown_flows(client, 5)
        q = client.get("/al/queries", params={"limit": 1}).json()["queries"]
        r = client.post(
            "/al/labels",
            json={"labels": {"bogus-id": ATTACK_CLASSES[10].value,
                             q[0]["id"]: ATTACK_CLASSES[10].value}},
        )
        body = r.json()
        assert body["accepted"] == 1
        assert body["rejected"][0]["id"] == "bogus-id"

    def test_abstention_returns_to_pool(self, client):
        feed_unknown_flows(client, 5)
        q = client.get("/al/queries", params={"limit": 2}).json()["queries"]
        qid = q[0]["id"]
        r = client.post("/al/labels", json={"labels": {qid: "abstain"}})
        assert qid in r.json()["abstained"]
        pools = client.get("/pools").json()
        assert qid in pools["unknown_ids"]

    def test_empty_pool_empty_batch_200(self, client):
        r = client.get("/al/queries", params={"limit": 5})
        assert r.status_code == 200
        assert r.json()["queries"] == []


class TestRetrain:
    def label_some(self, client, n=6, cls_idx=10):
        feed_unknown_flows(client, 15)
        q = client.get("/al/queries", params={"limit": n}).json()["queries"]
        labels = {row["id"]: ATTACK_CLASSES[cls_idx].value for row in q}
        return client.post("/al/labels", json={"labels": labels}).json()

    def test_retrain_without_labels_409(self, client):
        assert client.post("/retrain").status_code == 409

    def test_retrain_grows_class_set_and_version(self, client):
        self.label_some(client)
        r = client.post("/retrain")
        assert r.status_code == 200
        body = r.json()
        assert body["version"] == 2
        assert ATTACK_CLASSES[10].value in body["classes"]
        assert len(body["classes"]) == 11
        hist = client.get("/metrics/history").json()["history"]
        assert len(hist) == 1 and hist[0]["version"] == 2

    def test_second_retrain_without_new_labels_409(self, client):
        self.label_some(client)
        assert client.post("/retrain").status_code == 200
        assert client.post("/retrain").status_code == 409

    def test_injected_failure_keeps_previous_snapshot(self, client):
        self.label_some(client)
        client.app.state.service.fail_next_retrain = True
        r = client.post("/retrain")
        assert r.status_code == 500
        assert client.get("/status").json()["model_version"] == 1
        # labels are still pending, a healthy retrain succeeds
        assert client.post("/retrain").status_code == 200

    def test_models_endpoint_serves_versions(self, client):
        self.label_some(client)
        client.post("/retrain")
        for version in (1, 2):
            r = client.get(f"/models/{version}")
            assert r.status_code == 200
            assert r.json()["classifier"]["model_type"] == "classifier"
        assert client.get("/models/99").status_code == 404


class TestPersistence:
    def test_restart_resumes_versions_and_pools(self, tmp_path):
        cfg = ServiceConfig(**{**SMALL.__dict__, "data_dir": str(tmp_path / "state")})
        svc1 = PipelineService(cfg)
        client1 = TestClient(create_app(service=svc1))
        feed_unknown_flows(client1, 12)
        q = client1.get("/al/queries", params={"limit": 4}).json()["queries"]
        labels = {row["id"]: ATTACK_CLASSES[11].value for row in q}
        client1.post("/al/labels", json={"labels": labels})
        assert client1.post("/retrain").status_code == 200
        pools_before = client1.get("/pools").json()

        svc2 = PipelineService(cfg)
        client2 = TestClient(create_app(service=svc2))
        assert client2.get("/status").json()["model_version"] == 2
        pools_after = client2.get("/pools").json()
        assert pools_after["counts"] == pools_before["counts"]
        assert pools_after["labeled_ids"] == pools_before["labeled_ids"]

    def test_unlabeled_events_replayed_after_snapshot(self, tmp_path):
        cfg = ServiceConfig(**{**SMALL.__dict__, "data_dir": str(tmp_path / "state")})
        svc1 = PipelineService(cfg)
        client1 = TestClient(create_app(service=svc1))
        added, _ = feed_unknown_flows(client1, 8)  # events after bootstrap snapshot
        svc2 = PipelineService(cfg)
        client2 = TestClient(create_app(service=svc2))
        pools = client2.get("/pools").json()
        assert set(added) <= set(pools["unknown_ids"])


class TestConcurrencyInvariants:
    def test_bursts_conservation(self, client):
        ds = generate_synthetic(SMALL.synthetic)
        flows = ds.X[:200]
        results = []
        for x in flows:
            results.append(client.post("/classify", json={"features": x.tolist()}).json())
        assert len(results) == 200
        assert all("pool" in r for r in results)

    def test_audit_complete_for_oracle_labels(self, client):
        feed_unknown_flows(client, 10)
        q = client.get("/al/queries", params={"limit": 3}).json()["queries"]
        labels = {row["id"]: ATTACK_CLASSES[12].value for row in q}
        client.post("/al/labels", json={"labels": labels, "analyst": "alice"})
        svc = client.app.state.service
        audited = {a["id"] for a in svc.audit}
        assert set(labels) <= audited
        assert all(a["analyst"] == "alice" for a in svc.audit)


class TestApiSchemaFile:
    def test_shipped_schema_covers_live_routes(self, client):
        import json as _json
        from pathlib import Path

        schema = _json.loads(
            (Path(__file__).resolve().parents[1] / "schemas" / "api_schema.json").read_text()
        )
        documented = {k.split(" ", 1)[1].split("?")[0] for k in schema["endpoints"]}
        live = {r.path for r in client.app.routes if hasattr(r, "methods")}
        for path in documented:
            assert path in live, f"{path} documented but not served"


class TestRetentionBound:
    def test_fifo_eviction_with_log(self, tmp_path):
        cfg = ServiceConfig(**{**SMALL.__dict__, "pool_retention": 5})
        svc = PipelineService(cfg)
        client = TestClient(create_app(service=svc))
        added, _ = feed_unknown_flows(client, 12)
        assert len(added) > 5
        pools = client.get("/pools").json()
        assert pools["counts"]["unknown"] == 5
        assert pools["evictions"] == len(added) - 5
        # FIFO: the survivors are the most recent additions
        assert pools["unknown_ids"] == added[-5:]
