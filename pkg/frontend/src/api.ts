/**
 * Thin fetch client for the privacy-profile service.
 *
 * All rendering decisions live in the server's responses; this module only
 * moves JSON across the wire and normalises failures into ApiError so the
 * UI can show a retry banner instead of crashing.
 */

import type {
  ApiErrorBody,
  ClassifyRequestBody,
  ClassifyResponse,
  HealthResponse,
  Question,
  RecommendRequestBody,
  RecommendResponse,
} from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

/** Failure from the service (HTTP status > 0) or the network (status 0). */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
    readonly detail: string | null = null,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

const defaultFetch: FetchLike = (input, init) => fetch(input, init);

export class ApiClient {
  /**
   * @param baseUrl prefix for every request, e.g. "http://localhost:8000".
   *                Empty string targets the page's own origin.
   */
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: FetchLike = defaultFetch,
  ) {}

  health(): Promise<HealthResponse> {
    return this.request<HealthResponse>("GET", "/api/health");
  }

  questions(): Promise<Question[]> {
    return this.request<Question[]>("GET", "/api/questions");
  }

  classify(body: ClassifyRequestBody): Promise<ClassifyResponse> {
    return this.request<ClassifyResponse>("POST", "/api/classify", body);
  }

  recommend(body: RecommendRequestBody): Promise<RecommendResponse> {
    return this.request<RecommendResponse>("POST", "/api/recommend", body);
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method };
    if (body !== undefined) {
      init.headers = { "Content-Type": "application/json" };
      init.body = JSON.stringify(body);
    }
    let response: Response;
    try {
      response = await this.fetchFn(this.baseUrl + path, init);
    } catch (cause) {
      throw new ApiError(0, "network", `could not reach the service at ${this.baseUrl || "this origin"}`);
    }
    if (!response.ok) {
      throw new ApiError(response.status, ...(await describeFailure(response)));
    }
    return (await response.json()) as T;
  }
}

async function describeFailure(response: Response): Promise<[string, string, string | null]> {
  try {
    const parsed = (await response.json()) as Partial<ApiErrorBody>;
    if (typeof parsed.code === "string" && typeof parsed.message === "string") {
      return [parsed.code, parsed.message, parsed.detail ?? null];
    }
  } catch {
    // fall through: non-JSON error body
  }
  return ["http_error", `request failed with status ${response.status}`, null];
}
