// Thin typed client for the read-only session API. Concurrent requests are
// allowed; each endpoint family carries a sequence number and responses from
// superseded requests resolve to null so stale data never reaches the view.

import type {
  DagDescription,
  InstancePage,
  MetricReport,
  WeightedInstance,
} from "./types";

export interface FetchResponse {
  status: number;
  json(): Promise<unknown>;
}

export type FetchLike = (url: string) => Promise<FetchResponse>;

export class ApiRequestError extends Error {
  constructor(
    public status: number,
    public detail: string,
  ) {
    super(detail);
  }
}

function extractError(body: unknown, status: number): string {
  if (body && typeof body === "object" && "error" in body) {
    return String((body as { error: unknown }).error);
  }
  return `request failed with status ${status}`;
}

export class ApiClient {
  private sequence = new Map<string, number>();

  constructor(
    private fetchFn: FetchLike = (url) => fetch(url),
    private base = "",
  ) {}

  private async get<T>(family: string, url: string): Promise<T | null> {
    const ticket = (this.sequence.get(family) ?? 0) + 1;
    this.sequence.set(family, ticket);
    const response = await this.fetchFn(this.base + url);
    if (this.sequence.get(family) !== ticket) return null;
    const body = await response.json();
    if (this.sequence.get(family) !== ticket) return null;
    if (response.status !== 200) {
      throw new ApiRequestError(response.status, extractError(body, response.status));
    }
    return body as T;
  }

  dag(): Promise<DagDescription | null> {
    return this.get("dag", "/api/dag");
  }

  instances(query: string, limit: number, offset: number): Promise<InstancePage | null> {
    const params = new URLSearchParams();
    if (query) params.set("query", query);
    params.set("limit", String(limit));
    params.set("offset", String(offset));
    return this.get("instances", `/api/instances?${params.toString()}`);
  }

  weighted(instanceId: string): Promise<WeightedInstance | null> {
    return this.get("weighted", `/api/instances/${encodeURIComponent(instanceId)}/weighted`);
  }

  accuracy(from: number, to: number, groupBy: number | null): Promise<MetricReport | null> {
    const params = new URLSearchParams({ from: String(from), to: String(to) });
    if (groupBy !== null) params.set("group_by", String(groupBy));
    return this.get("metric", `/api/metrics/accuracy?${params.toString()}`);
  }

  uncertainty(from: number, to: number, groupBy: number | null): Promise<MetricReport | null> {
    const params = new URLSearchParams({ from: String(from), to: String(to) });
    if (groupBy !== null) params.set("group_by", String(groupBy));
    return this.get("metric", `/api/metrics/uncertainty?${params.toString()}`);
  }

  preference(left: string, right: string, valueKind: string): Promise<MetricReport | null> {
    const params = new URLSearchParams({ left, right, value_kind: valueKind });
    return this.get("metric", `/api/metrics/preference?${params.toString()}`);
  }

  confusion(pairs: string, top: number, pairMode: string): Promise<MetricReport | null> {
    const params = new URLSearchParams({ pairs, top: String(top), pair_mode: pairMode });
    return this.get("metric", `/api/metrics/concept-confusion?${params.toString()}`);
  }
}
