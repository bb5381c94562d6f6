/** Thin fetch client for the workbench API. */

import type {
  AnalysisResponse,
  ArchitectureListing,
  DiffResponse,
  ModSpec,
  ScaleResponse,
  SweepResponse,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    message: string,
    readonly status: number,
    readonly field: string | null = null,
  ) {
    super(message);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly base: string = "",
    private readonly fetchImpl: FetchLike = (i, init) => fetch(i, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(this.base + path, init);
    const body = await response.json().catch(() => ({}));
    if (!response.ok) {
      throw new ApiError(
        (body as { error?: string }).error ?? `request failed (${response.status})`,
        response.status,
        (body as { field?: string }).field ?? null,
      );
    }
    return body as T;
  }

  private post<T>(path: string, payload: unknown, signal?: AbortSignal): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(payload),
      signal,
    });
  }

  architectures(): Promise<ArchitectureListing> {
    return this.request("/api/architectures");
  }

  analysis(name: string, batch: number): Promise<AnalysisResponse> {
    return this.request(`/api/architectures/${encodeURIComponent(name)}/analysis?batch=${batch}`);
  }

  diff(body: { baseline: string; batch: number; mods: ModSpec[] },
       signal?: AbortSignal): Promise<DiffResponse> {
    return this.post("/api/diff", body, signal);
  }

  sweep(body: { meta: Record<string, unknown>; vary: string; values: (string | number)[] }):
      Promise<SweepResponse> {
    return this.post("/api/sweep", body);
  }

  scale(body: {
    arch: string;
    batch: number;
    cluster: { workers: number[]; bandwidth: string; topology: string };
  }): Promise<ScaleResponse> {
    return this.post("/api/scale", body);
  }

  countSpace(slots: number, options: number): Promise<{ count_str: string; note: string }> {
    return this.request(`/api/count-space?slots=${slots}&options=${options}`);
  }
}
