import type { ApiClient } from "./api.js";
import {
  ABSTAIN,
  ASSIGNABLE_CLASSES,
  type AlQuery,
  type LabelChoice,
} from "./types.js";

export type RowState = "idle" | "in-flight" | "rejected";

export interface QueueRow {
  query: AlQuery;
  choice: LabelChoice | null;
  state: RowState;
  rejectionReason?: string;
}

// The labeling queue. Rows leave the view only on server acknowledgment
// (accepted or abstained); rejected rows stay with their reason. A row that
// is in flight cannot be selected or submitted again until the server
// answers.
export class QueueStore {
  rows: QueueRow[] = [];
  stale = false;
  lastError: string | null = null;

  constructor(
    private api: ApiClient,
    private analyst: string = "analyst",
    public limit: number = 20,
  ) {}

  async refresh(): Promise<void> {
    let queries: AlQuery[];
    try {
      queries = await this.api.queries(this.limit);
    } catch (err) {
      this.stale = true;
      this.lastError = err instanceof Error ? err.message : String(err);
      return;
    }
    this.stale = false;
    this.lastError = null;
    const held = new Map(
      this.rows
        .filter((r) => r.state !== "idle" || r.choice !== null)
        .map((r) => [r.query.id, r]),
    );
    this.rows = queries.map((q) => held.get(q.id) ?? { query: q, choice: null, state: "idle" });
    // Rows awaiting a server answer stay visible even if the fetch no longer
    // returns them (they left the service queue when the request landed).
    for (const row of held.values()) {
      if (row.state === "in-flight" && !this.rows.some((r) => r.query.id === row.query.id)) {
        this.rows.push(row);
      }
    }
  }

  selectLabel(id: string, choice: LabelChoice): boolean {
    if (choice !== ABSTAIN && !(ASSIGNABLE_CLASSES as readonly string[]).includes(choice)) {
      return false; // taxonomy minus Unknown only
    }
    const row = this.rows.find((r) => r.query.id === id);
    if (!row || row.state === "in-flight") return false;
    row.choice = choice;
    if (row.state === "rejected") {
      row.state = "idle";
      row.rejectionReason = undefined;
    }
    return true;
  }

  submittable(): QueueRow[] {
    return this.rows.filter((r) => r.choice !== null && r.state === "idle");
  }

  async submit(): Promise<{ accepted: number; rejected: number; abstained: number }> {
    const batch = this.submittable();
    if (batch.length === 0) return { accepted: 0, rejected: 0, abstained: 0 };
    const labels: Record<string, string> = {};
    for (const row of batch) {
      row.state = "in-flight";
      labels[row.query.id] = row.choice as string;
    }
    try {
      const result = await this.api.submitLabels(labels, this.analyst);
      const gone = new Set([...result.accepted_ids, ...result.abstained]);
      const reasons = new Map(result.rejected.map((r) => [r.id, r.reason]));
      this.rows = this.rows.filter((r) => !gone.has(r.query.id));
      for (const row of this.rows) {
        if (reasons.has(row.query.id)) {
          row.state = "rejected";
          row.rejectionReason = reasons.get(row.query.id);
        } else if (row.state === "in-flight" && labels[row.query.id] !== undefined) {
          row.state = "idle"; // server answered without mentioning the id
        }
      }
      return {
        accepted: result.accepted,
        rejected: result.rejected.length,
        abstained: result.abstained.length,
      };
    } catch (err) {
      // Partial failure: nothing acknowledged, rows stay put and editable.
      for (const row of batch) row.state = "idle";
      this.lastError = err instanceof Error ? err.message : String(err);
      throw err;
    }
  }
}
