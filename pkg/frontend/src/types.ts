/** Shapes exchanged with the privacy-profile service's JSON API. */

export interface Question {
  alias: string;
  text: string;
  group: string;
  value_kind: string;
  position: number;
}

export interface HealthResponse {
  status: string;
  model_digest: string;
  recommender_ready: boolean;
}

export interface ClassifyRequestBody {
  answers: Record<string, number>;
}

export interface ClassifyResponse {
  profile_id: number;
  profile_name: string;
  class_scores: number[];
  assumed: string[];
  model_digest: string;
}

export interface RecommendRequestBody {
  profile_id?: number;
  known: Record<string, number>;
  k: number;
  n: number;
}

export interface RecommendEntry {
  setting: string;
  score: number;
  value: number;
  fallback: boolean;
}

export interface RecommendResponse {
  profile_id: number;
  profile_name: string;
  k: number;
  n: number;
  entries: RecommendEntry[];
  model_digest: string;
}

export interface ApiErrorBody {
  code: string;
  message: string;
  detail: string | null;
}
