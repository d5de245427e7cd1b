import { beforeEach, describe, expect, it } from "vitest";

import type { ApiClient } from "../src/api.js";
import { QueueStore } from "../src/queue.js";
import type { AlQuery, LabelResult } from "../src/types.js";

function query(id: string, uncertainty = 0.5): AlQuery {
  return {
    id,
    uncertainty,
    top_classes: [{ label: "Backdoor", p: 0.4 }],
    features: [0, 1, 2],
    model_version: 1,
  };
}

class FakeApi {
  queue: AlQuery[] = [];
  submissions: Record<string, string>[] = [];
  nextResult: LabelResult | null = null;
  failQueries = false;
  pendingResolve: ((r: LabelResult) => void) | null = null;

  async queries(limit: number): Promise<AlQuery[]> {
    if (this.failQueries) throw new Error("connection refused");
    return this.queue.slice(0, limit);
  }

  submitLabels(labels: Record<string, string>): Promise<LabelResult> {
    this.submissions.push({ ...labels });
    if (this.nextResult) return Promise.resolve(this.nextResult);
    return new Promise((resolve) => {
      this.pendingResolve = resolve;
    });
  }
}

function asApi(fake: FakeApi): ApiClient {
  return fake as unknown as ApiClient;
}

describe("QueueStore", () => {
  let fake: FakeApi;
  let store: QueueStore;

  beforeEach(() => {
    fake = new FakeApi();
    store = new QueueStore(asApi(fake), "tester", 10);
  });

  it("loads rows in server order", async () => {
    fake.queue = [query("a", 0.9), query("b", 0.4)];
    await store.refresh();
    expect(store.rows.map((r) => r.query.id)).toEqual(["a", "b"]);
    expect(store.stale).toBe(false);
  });

  it("flags stale data on fetch failure and keeps existing rows", async () => {
    fake.queue = [query("a")];
    await store.refresh();
    fake.failQueries = true;
    await store.refresh();
    expect(store.stale).toBe(true);
    expect(store.lastError).toContain("connection refused");
    expect(store.rows).toHaveLength(1);
  });

  it("restricts choices to the taxonomy minus Unknown", async () => {
    fake.queue = [query("a")];
    await store.refresh();
    expect(store.selectLabel("a", "Unknown" as never)).toBe(false);
    expect(store.selectLabel("a", "Backdoor")).toBe(true);
    expect(store.selectLabel("a", "abstain")).toBe(true);
  });

  it("removes rows only after server acknowledgment", async () => {
    fake.queue = [query("a"), query("b")];
    await store.refresh();
    store.selectLabel("a", "XSS");
    fake.nextResult = {
      accepted: 1,
      accepted_ids: ["a"],
      rejected: [],
      abstained: [],
    };
    const summary = await store.submit();
    expect(summary.accepted).toBe(1);
    expect(store.rows.map((r) => r.query.id)).toEqual(["b"]);
  });

  it("keeps rejected rows visible with their reason", async () => {
    fake.queue = [query("a")];
    await store.refresh();
    store.selectLabel("a", "XSS");
    fake.nextResult = {
      accepted: 0,
      accepted_ids: [],
      rejected: [{ id: "a", reason: "already labeled" }],
      abstained: [],
    };
    await store.submit();
    expect(store.rows[0].state).toBe("rejected");
    expect(store.rows[0].rejectionReason).toBe("already labeled");
  });

  it("blocks double submission while a row is in flight", async () => {
    fake.queue = [query("a")];
    await store.refresh();
    store.selectLabel("a", "XSS");
    const first = store.submit(); // unresolved: row goes in-flight
    expect(store.rows[0].state).toBe("in-flight");
    expect(store.selectLabel("a", "MITM")).toBe(false);
    const second = await store.submit(); // nothing submittable
    expect(second).toEqual({ accepted: 0, rejected: 0, abstained: 0 });
    expect(fake.submissions).toHaveLength(1);
    fake.pendingResolve!({ accepted: 1, accepted_ids: ["a"], rejected: [], abstained: [] });
    await first;
    expect(store.rows).toHaveLength(0);
  });

  it("keeps in-flight rows visible across refreshes", async () => {
    fake.queue = [query("a")];
    await store.refresh();
    store.selectLabel("a", "XSS");
    const pending = store.submit();
    fake.queue = []; // the service moved the row out of its queue
    await store.refresh();
    expect(store.rows.map((r) => r.query.id)).toEqual(["a"]);
    fake.pendingResolve!({ accepted: 1, accepted_ids: ["a"], rejected: [], abstained: [] });
    await pending;
    expect(store.rows).toHaveLength(0);
  });

  it("abstained rows leave the view (the pool owns them again)", async () => {
    fake.queue = [query("a"), query("b")];
    await store.refresh();
    store.selectLabel("a", "abstain");
    fake.nextResult = { accepted: 0, accepted_ids: [], rejected: [], abstained: ["a"] };
    const summary = await store.submit();
    expect(summary.abstained).toBe(1);
    expect(store.rows.map((r) => r.query.id)).toEqual(["b"]);
    // a later fetch can re-list the sample once the service re-queues it
    fake.queue = [query("b"), query("a")];
    await store.refresh();
    expect(store.rows.map((r) => r.query.id)).toEqual(["b", "a"]);
  });

  it("returns all rows to editable state when the request itself fails", async () => {
    const err = new Error("socket hang up");
    fake.queue = [query("a")];
    fake.submitLabels = () => Promise.reject(err);
    await store.refresh();
    store.selectLabel("a", "XSS");
    await expect(store.submit()).rejects.toThrow("socket hang up");
    expect(store.rows[0].state).toBe("idle");
    expect(store.lastError).toContain("socket hang up");
  });
});
