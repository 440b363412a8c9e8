/**
 * Scripted in-memory stand-in for the privacy-profile service.
 *
 * Implements the four documented endpoints with deterministic arithmetic so
 * tests can predict every payload, logs every request, tracks concurrent
 * in-flight counts per path, and can hold responses open or fail on demand
 * to script network adversity.
 */

import type { FetchLike } from "../src/api.js";
import type { Question, RecommendEntry } from "../src/types.js";

export interface LoggedRequest {
  index: number;
  method: string;
  path: string;
  body: unknown;
}

export interface ScriptedFailure {
  status: number;
  code: string;
  message: string;
}

const CATALOG: Question[] = [
  { alias: "g001", text: "Share location with the service?", group: "G", value_kind: "binary", position: 0 },
  { alias: "g002", text: "Allow usage analytics?", group: "G", value_kind: "binary", position: 1 },
  { alias: "g003", text: "Show profile to other members?", group: "G", value_kind: "binary", position: 2 },
  { alias: "g004", text: "Receive partner offers?", group: "AP1", value_kind: "binary", position: 3 },
  { alias: "g005", text: "Sync contacts for suggestions?", group: "AP1", value_kind: "binary", position: 4 },
  { alias: "g006", text: "Keep search history?", group: "AP2", value_kind: "binary", position: 5 },
];

const BASE_SCORE: Record<string, number> = {
  g001: 0.92,
  g002: 0.81,
  g003: 0.66,
  g004: 0.48,
  g005: 0.27,
  g006: 0.11,
};

export const FIXTURE_ALIASES = CATALOG.map((q) => q.alias);
export const FIXTURE_DIGEST = "f".repeat(64);

export class FixtureServer {
  requests: LoggedRequest[] = [];
  private inFlight = new Map<string, number>();
  maxInFlight = new Map<string, number>();
  private gates = new Map<string, Array<() => void>>();
  private holding = new Set<string>();
  private failures = new Map<string, ScriptedFailure[]>();

  /** Requests to `path` wait until releaseOne/releaseAll is called. */
  hold(path: string): void {
    this.holding.add(path);
  }

  /** Stop holding new requests (queued ones still need releasing). */
  unhold(path: string): void {
    this.holding.delete(path);
  }

  /** Let the oldest waiting request on `path` respond. Returns false if none waited. */
  releaseOne(path: string): boolean {
    const queue = this.gates.get(path) ?? [];
    const release = queue.shift();
    if (release === undefined) {
      return false;
    }
    release();
    return true;
  }

  releaseAll(path: string): void {
    this.holding.delete(path);
    while (this.releaseOne(path)) {
      // drain
    }
  }

  waitingCount(path: string): number {
    return (this.gates.get(path) ?? []).length;
  }

  /** Queue a scripted failure for the next request(s) to `path`. */
  failNext(path: string, failure: ScriptedFailure, times = 1): void {
    const queue = this.failures.get(path) ?? [];
    for (let i = 0; i < times; i += 1) {
      queue.push(failure);
    }
    this.failures.set(path, queue);
  }

  paths(): string[] {
    return this.requests.map((r) => r.path);
  }

  bodiesFor(path: string): unknown[] {
    return this.requests.filter((r) => r.path === path).map((r) => r.body);
  }

  /** Deterministic per-setting score; shifts uniformly with the known-settings mix. */
  score(alias: string, known: Record<string, number>): number {
    const values = Object.values(known);
    const allowFraction = values.length === 0 ? 0.5 : values.reduce((a, b) => a + b, 0) / values.length;
    const raw = (BASE_SCORE[alias] ?? 0.5) * 0.9 + 0.1 * allowFraction;
    return Math.round(raw * 1e6) / 1e6;
  }

  private classifyFrom(answers: Record<string, number>): { id: number; scores: number[] } {
    const allowCount = FIXTURE_ALIASES.reduce((acc, alias) => acc + (answers[alias] ?? 0), 0);
    const p = Math.round(((allowCount + 1) / (FIXTURE_ALIASES.length + 2)) * 1e6) / 1e6;
    const scores = [Math.round((1 - p) * 1e6) / 1e6, p];
    return { id: p >= 0.5 ? 1 : 0, scores };
  }

  fetchFn: FetchLike = async (input, init) => {
    const path = input.replace(/^https?:\/\/[^/]+/, "").split("?")[0];
    const method = init?.method ?? "GET";
    const body = typeof init?.body === "string" ? (JSON.parse(init.body) as unknown) : undefined;
    this.requests.push({ index: this.requests.length, method, path, body });

    const current = (this.inFlight.get(path) ?? 0) + 1;
    this.inFlight.set(path, current);
    this.maxInFlight.set(path, Math.max(this.maxInFlight.get(path) ?? 0, current));

    try {
      if (this.holding.has(path)) {
        await new Promise<void>((resolve) => {
          const queue = this.gates.get(path) ?? [];
          queue.push(resolve);
          this.gates.set(path, queue);
        });
      }

      const scripted = (this.failures.get(path) ?? []).shift();
      if (scripted !== undefined) {
        return errorResponse(scripted);
      }

      return this.respond(path, body);
    } finally {
      this.inFlight.set(path, (this.inFlight.get(path) ?? 1) - 1);
    }
  };

  private respond(path: string, body: unknown): Response {
    switch (path) {
      case "/api/health":
        return jsonResponse({ status: "ok", model_digest: FIXTURE_DIGEST, recommender_ready: true });

      case "/api/questions":
        return jsonResponse(CATALOG, { ETag: '"fixture-etag"' });

      case "/api/classify": {
        const { answers } = body as { answers: Record<string, number> };
        for (const alias of Object.keys(answers)) {
          if (!FIXTURE_ALIASES.includes(alias)) {
            return errorResponse({ status: 400, code: "unknown_alias", message: `unknown question alias '${alias}'` });
          }
        }
        const { id, scores } = this.classifyFrom(answers);
        return jsonResponse({
          profile_id: id,
          profile_name: ["Guarded", "Open"][id],
          class_scores: scores,
          assumed: FIXTURE_ALIASES.filter((alias) => !(alias in answers)).sort(),
          model_digest: FIXTURE_DIGEST,
        });
      }

      case "/api/recommend": {
        const req = body as {
          profile_id?: number;
          known: Record<string, number>;
          k: number;
          n: number;
        };
        if (req.profile_id === undefined && Object.keys(req.known).length === 0) {
          return errorResponse({ status: 422, code: "no_evidence", message: "provide known settings or a profile_id" });
        }
        for (const alias of Object.keys(req.known)) {
          if (!FIXTURE_ALIASES.includes(alias)) {
            return errorResponse({ status: 400, code: "unknown_alias", message: `unknown question alias '${alias}'` });
          }
        }
        const profileId = req.profile_id ?? this.classifyFrom(req.known).id;
        const entries: RecommendEntry[] = FIXTURE_ALIASES.filter((alias) => !(alias in req.known))
          .map((alias) => {
            const score = this.score(alias, req.known);
            return { setting: alias, score, value: score >= 0.5 ? 1 : 0, fallback: false };
          })
          .sort((a, b) => b.score - a.score || a.setting.localeCompare(b.setting))
          .slice(0, req.n);
        return jsonResponse({
          profile_id: profileId,
          profile_name: ["Guarded", "Open"][profileId],
          k: req.k,
          n: req.n,
          entries,
          model_digest: FIXTURE_DIGEST,
        });
      }

      default:
        return errorResponse({ status: 404, code: "not_found", message: `no such endpoint ${path}` });
    }
  }
}

function jsonResponse(payload: unknown, headers: Record<string, string> = {}): Response {
  return new Response(JSON.stringify(payload), {
    status: 200,
    headers: { "Content-Type": "application/json", ...headers },
  });
}

function errorResponse(failure: ScriptedFailure): Response {
  return new Response(JSON.stringify({ code: failure.code, message: failure.message, detail: null }), {
    status: failure.status,
    headers: { "Content-Type": "application/json" },
  });
}
