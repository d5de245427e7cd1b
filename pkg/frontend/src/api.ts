import type {
  AlQuery,
  LabelResult,
  PoolsResponse,
  RetrainReport,
  StatusResponse,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    public detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
  }
}

type FetchLike = typeof fetch;

export class ApiClient {
  constructor(
    private baseUrl: string,
    private fetchImpl: FetchLike = fetch,
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const res = await this.fetchImpl(`${this.baseUrl}${path}`, {
      method,
      headers: body !== undefined ? { "content-type": "application/json" } : undefined,
      body: body !== undefined ? JSON.stringify(body) : undefined,
    });
    if (!res.ok) {
      let detail = res.statusText;
      try {
        const parsed = (await res.json()) as { detail?: string };
        if (parsed.detail) detail = parsed.detail;
      } catch {
        // non-JSON error body; keep statusText
      }
      throw new ApiError(res.status, detail);
    }
    return (await res.json()) as T;
  }

  status(): Promise<StatusResponse> {
    return this.request("GET", "/status");
  }

  pools(): Promise<PoolsResponse> {
    return this.request("GET", "/pools");
  }

  async queries(limit: number): Promise<AlQuery[]> {
    const body = await this.request<{ queries: AlQuery[] }>(
      "GET",
      `/al/queries?limit=${limit}`,
    );
    return body.queries;
  }

  submitLabels(labels: Record<string, string>, analyst: string): Promise<LabelResult> {
    return this.request("POST", "/al/labels", { labels, analyst });
  }

  retrain(): Promise<RetrainReport> {
    return this.request("POST", "/retrain");
  }

  async history(): Promise<RetrainReport[]> {
    const body = await this.request<{ history: RetrainReport[] }>(
      "GET",
      "/metrics/history",
    );
    return body.history;
  }

  classify(features: number[], flowId?: string): Promise<Record<string, unknown>> {
    return this.request("POST", "/classify", { features, flow_id: flowId });
  }
}
