import { ApiError, type ApiClient } from "./api.js";
import type { PoolsResponse, RetrainReport, StatusResponse } from "./types.js";

export type RetrainState =
  | { kind: "idle" }
  | { kind: "running" }
  | { kind: "done"; version: number }
  | { kind: "failed"; detail: string };

// Dashboard state: everything shown is a server-reported value; the store
// only tracks deltas (version changes) for banners.
export class DashboardStore {
  status: StatusResponse | null = null;
  pools: PoolsResponse | null = null;
  history: RetrainReport[] = [];
  versionBanner: number | null = null;
  retrain: RetrainState = { kind: "idle" };
  lastError: string | null = null;

  constructor(
    private api: ApiClient,
    public pollIntervalMs = 5000,
  ) {}

  get canRetrain(): boolean {
    // Mirrors the 409 contract: the button is enabled only with new labels.
    return (this.status?.labels_since_retrain ?? 0) > 0;
  }

  async pollOnce(): Promise<void> {
    try {
      const [status, pools, history] = await Promise.all([
        this.api.status(),
        this.api.pools(),
        this.api.history(),
      ]);
      if (this.status && status.model_version !== this.status.model_version) {
        this.versionBanner = status.model_version;
      }
      this.status = status;
      this.pools = pools;
      this.history = history;
      this.lastError = null;
    } catch (err) {
      this.lastError = err instanceof Error ? err.message : String(err);
    }
  }

  async triggerRetrain(maxPolls = 20): Promise<RetrainState> {
    if (!this.canRetrain) {
      this.retrain = { kind: "failed", detail: "no new labels since last retrain" };
      return this.retrain;
    }
    this.retrain = { kind: "running" };
    try {
      const report = await this.api.retrain();
      // Poll until the new version's report shows up in the history feed.
      for (let i = 0; i < maxPolls; i++) {
        await this.pollOnce();
        if (this.history.some((h) => h.version === report.version)) break;
        await new Promise((resolve) => setTimeout(resolve, 250));
      }
      this.retrain = { kind: "done", version: report.version };
    } catch (err) {
      const detail =
        err instanceof ApiError ? err.detail : err instanceof Error ? err.message : String(err);
      this.retrain = { kind: "failed", detail };
      await this.pollOnce(); // previous version stays; refresh what we show
    }
    return this.retrain;
  }
}
