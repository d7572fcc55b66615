// Thin client over the captioning service HTTP API.

import type { RegionDoc } from "./regions.js";

export interface UploadInfo {
  image_id: string;
  grid_rows: number;
  grid_cols: number;
  width: number;
  height: number;
  cached: boolean;
}

export interface RegionWeights {
  indices: number[];
  weights: number[];
}

export interface CaptionResult {
  caption: string;
  score: number | null;
  empty: boolean;
  weights: RegionWeights | null;
}

export class ApiError extends Error {
  constructor(readonly status: number, readonly detail: string) {
    super(`HTTP ${status}: ${detail}`);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ServiceClient {
  constructor(
    readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init)
  ) {}

  async upload(blob: Blob): Promise<UploadInfo> {
    const resp = await this.fetchFn(`${this.baseUrl}/v1/images`, {
      method: "POST",
      headers: { "content-type": "application/octet-stream" },
      body: blob,
    });
    return this.parse<UploadInfo>(resp);
  }

  async caption(
    imageId: string,
    region: RegionDoc,
    aggregation: string | null = null,
    returnWeights = true
  ): Promise<CaptionResult> {
    const resp = await this.fetchFn(`${this.baseUrl}/v1/images/${imageId}/caption`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({
        region,
        aggregation: aggregation ?? undefined,
        return_weights: returnWeights,
      }),
    });
    return this.parse<CaptionResult>(resp);
  }

  async health(): Promise<{ status: string }> {
    const resp = await this.fetchFn(`${this.baseUrl}/v1/health`);
    return this.parse<{ status: string }>(resp);
  }

  private async parse<T>(resp: Response): Promise<T> {
    if (resp.ok) {
      return (await resp.json()) as T;
    }
    let detail = resp.statusText || "request failed";
    try {
      const body = await resp.json();
      if (body && typeof body.detail === "string") {
        detail = body.detail;
      }
    } catch {
      // non-JSON error body; keep the status text
    }
    throw new ApiError(resp.status, detail);
  }
}
