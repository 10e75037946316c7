import { describe, expect, it } from "vitest";

import { ApiClient, ApiRequestError, FetchResponse } from "../src/api";

function respond(status: number, body: unknown): FetchResponse {
  return { status, json: () => Promise.resolve(body) };
}

describe("api client", () => {
  it("builds instance query urls with pagination", async () => {
    const urls: string[] = [];
    const client = new ApiClient((url) => {
      urls.push(url);
      return Promise.resolve(respond(200, { ids: [] }));
    });
    await client.instances("mass(A) > 0.5", 25, 50);
    expect(urls[0]).toBe("/api/instances?query=mass%28A%29+%3E+0.5&limit=25&offset=50");
  });

  it("omits the query parameter when empty", async () => {
    const urls: string[] = [];
    const client = new ApiClient((url) => {
      urls.push(url);
      return Promise.resolve(respond(200, {}));
    });
    await client.instances("", 25, 0);
    expect(urls[0]).toBe("/api/instances?limit=25&offset=0");
  });

  it("uses from/to aliases for metric endpoints", async () => {
    const urls: string[] = [];
    const client = new ApiClient((url) => {
      urls.push(url);
      return Promise.resolve(respond(200, {}));
    });
    await client.accuracy(1, 2, 2);
    await client.uncertainty(1, 3, null);
    expect(urls).toEqual([
      "/api/metrics/accuracy?from=1&to=2&group_by=2",
      "/api/metrics/uncertainty?from=1&to=3",
    ]);
  });

  it("raises the server diagnostic on non-200 responses", async () => {
    const client = new ApiClient(() =>
      Promise.resolve(respond(400, { error: "query syntax error at column 14" })),
    );
    await expect(client.instances("count(level=2", 25, 0)).rejects.toThrowError(
      ApiRequestError,
    );
    await expect(client.instances("count(level=2", 25, 0)).rejects.toThrow(
      "query syntax error at column 14",
    );
  });

  it("discards stale responses by sequence number", async () => {
    const resolvers: ((value: FetchResponse) => void)[] = [];
    const client = new ApiClient(
      () => new Promise<FetchResponse>((resolve) => resolvers.push(resolve)),
    );
    const first = client.instances("first", 25, 0);
    const second = client.instances("second", 25, 0);
    // the slow first response arrives after the second request started
    resolvers[1](respond(200, { query: "second" }));
    resolvers[0](respond(200, { query: "first" }));
    expect(await first).toBeNull();
    expect((await second)?.query).toBe("second");
  });

  it("keeps sequence numbers independent per endpoint family", async () => {
    const resolvers: ((value: FetchResponse) => void)[] = [];
    const client = new ApiClient(
      () => new Promise<FetchResponse>((resolve) => resolvers.push(resolve)),
    );
    const instances = client.instances("q", 25, 0);
    const weighted = client.weighted("img-1");
    resolvers[0](respond(200, { query: "q" }));
    resolvers[1](respond(200, { instance_id: "img-1" }));
    expect((await instances)?.query).toBe("q");
    expect((await weighted)?.instance_id).toBe("img-1");
  });
});
