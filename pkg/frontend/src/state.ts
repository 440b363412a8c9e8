/**
 * Session state machine for the assistant UI.
 *
 * Pure reducer: every user action and every server event is an Event, and
 * `reduce` returns the next state without touching the DOM or the network.
 *
 * Ordering contract: `editSeq` increases on every user edit. A response is
 * applied only when the edit counter captured at request time still equals
 * the current counter; anything older is recorded in the audit log as
 * dropped, so the panel never shows data that predates the latest edit.
 */

import type { ClassifyResponse, Question, RecommendEntry } from "./types.js";

export interface ProfileView {
  id: number;
  name: string;
  scores: number[];
}

export interface AuditRecord {
  kind: "classify" | "recommend";
  issuedAtEdit: number;
  editSeqAtArrival: number;
  applied: boolean;
}

export interface SessionState {
  questions: Question[];
  /** Questionnaire answers; absent alias = unanswered. */
  answers: Record<string, 0 | 1>;
  submitted: boolean;
  /** Settings the user has fixed (seeded from answers at submit, grown by accepts). */
  known: Record<string, 0 | 1>;
  k: number;
  n: number;
  profile: ProfileView | null;
  recommendations: RecommendEntry[];
  pendingClassify: boolean;
  pendingRecommend: boolean;
  warning: string | null;
  error: string | null;
  /** Monotone counter, bumped by every user edit. */
  editSeq: number;
  /** editSeq value the displayed profile corresponds to (-1 = none yet). */
  profileEdit: number;
  /** editSeq value the displayed recommendations correspond to (-1 = none yet). */
  recommendEdit: number;
  audit: AuditRecord[];
}

export const DEFAULT_K = 15;
export const DEFAULT_N = 10;

export function initialState(): SessionState {
  return {
    questions: [],
    answers: {},
    submitted: false,
    known: {},
    k: DEFAULT_K,
    n: DEFAULT_N,
    profile: null,
    recommendations: [],
    pendingClassify: false,
    pendingRecommend: false,
    warning: null,
    error: null,
    editSeq: 0,
    profileEdit: -1,
    recommendEdit: -1,
    audit: [],
  };
}

export type Event =
  | { type: "questions_loaded"; questions: Question[] }
  | { type: "answer_set"; alias: string; value: 0 | 1 }
  | { type: "answer_cleared"; alias: string }
  | { type: "submitted" }
  | { type: "known_set"; alias: string; value: 0 | 1 }
  | { type: "known_removed"; alias: string }
  | { type: "k_set"; value: number }
  | { type: "n_set"; value: number }
  | { type: "accepted"; alias: string }
  | { type: "classify_started" }
  | { type: "classify_resolved"; response: ClassifyResponse; issuedAtEdit: number }
  | { type: "recommend_started" }
  | { type: "recommend_resolved"; entries: RecommendEntry[]; issuedAtEdit: number }
  | { type: "request_failed"; kind: "classify" | "recommend" | "bootstrap"; message: string }
  | { type: "error_dismissed" };

export function reduce(state: SessionState, event: Event): SessionState {
  switch (event.type) {
    case "questions_loaded":
      return { ...state, questions: [...event.questions].sort((a, b) => a.position - b.position) };

    case "answer_set": {
      const answers = { ...state.answers, [event.alias]: event.value };
      // Once the workbench is open, questionnaire items and known settings
      // are the same switches, so keep them in sync.
      const known = state.submitted ? { ...state.known, [event.alias]: event.value } : state.known;
      return { ...state, answers, known, editSeq: state.editSeq + 1 };
    }

    case "answer_cleared": {
      const answers = { ...state.answers };
      delete answers[event.alias];
      return { ...state, answers, editSeq: state.editSeq + 1 };
    }

    case "submitted": {
      const unanswered = state.questions.length - Object.keys(state.answers).length;
      return {
        ...state,
        submitted: true,
        known: { ...state.answers },
        warning:
          Object.keys(state.answers).length === 0
            ? "No answers given: the profile below assumes every question was declined."
            : unanswered > 0
              ? `${unanswered} unanswered ${unanswered === 1 ? "question is" : "questions are"} assumed declined.`
              : null,
        editSeq: state.editSeq + 1,
      };
    }

    case "known_set":
      return {
        ...state,
        known: { ...state.known, [event.alias]: event.value },
        editSeq: state.editSeq + 1,
      };

    case "known_removed": {
      const known = { ...state.known };
      delete known[event.alias];
      return { ...state, known, editSeq: state.editSeq + 1 };
    }

    case "k_set":
      return { ...state, k: event.value, editSeq: state.editSeq + 1 };

    case "n_set":
      return { ...state, n: event.value, editSeq: state.editSeq + 1 };

    case "accepted": {
      const entry = state.recommendations.find((e) => e.setting === event.alias);
      if (entry === undefined) {
        return state;
      }
      return {
        ...state,
        known: { ...state.known, [entry.setting]: entry.value === 1 ? 1 : 0 },
        // Optimistically clear the accepted row; the immediate re-query
        // replaces the rest of the panel with the server's next ranking.
        recommendations: state.recommendations.filter((e) => e.setting !== event.alias),
        editSeq: state.editSeq + 1,
      };
    }

    case "classify_started":
      return { ...state, pendingClassify: true };

    case "classify_resolved": {
      const applied = event.issuedAtEdit === state.editSeq;
      const audit = [
        ...state.audit,
        { kind: "classify" as const, issuedAtEdit: event.issuedAtEdit, editSeqAtArrival: state.editSeq, applied },
      ];
      if (!applied) {
        return { ...state, audit };
      }
      return {
        ...state,
        audit,
        pendingClassify: false,
        error: null,
        profile: {
          id: event.response.profile_id,
          name: event.response.profile_name,
          scores: event.response.class_scores,
        },
        profileEdit: event.issuedAtEdit,
      };
    }

    case "recommend_started":
      return { ...state, pendingRecommend: true };

    case "recommend_resolved": {
      const applied = event.issuedAtEdit === state.editSeq;
      const audit = [
        ...state.audit,
        { kind: "recommend" as const, issuedAtEdit: event.issuedAtEdit, editSeqAtArrival: state.editSeq, applied },
      ];
      if (!applied) {
        return { ...state, audit };
      }
      return {
        ...state,
        audit,
        pendingRecommend: false,
        error: null,
        recommendations: event.entries,
        recommendEdit: event.issuedAtEdit,
      };
    }

    case "request_failed":
      return {
        ...state,
        pendingClassify: event.kind === "classify" ? false : state.pendingClassify,
        pendingRecommend: event.kind === "recommend" ? false : state.pendingRecommend,
        error: event.message,
      };

    case "error_dismissed":
      return { ...state, error: null };
  }
}

/** Number of answered questions, for the progress indicator. */
export function answeredCount(state: SessionState): number {
  return Object.keys(state.answers).length;
}

/** True when the audit log proves no applied response predated the edit it arrived under. */
export function auditClean(state: SessionState): boolean {
  return state.audit.every((record) => !record.applied || record.issuedAtEdit === record.editSeqAtArrival);
}

/** Minimal observable wrapper so the DOM layer can re-render on changes. */
export class Store {
  private listeners = new Set<(state: SessionState) => void>();

  constructor(public state: SessionState = initialState()) {}

  dispatch(event: Event): void {
    this.state = reduce(this.state, event);
    for (const listener of this.listeners) {
      listener(this.state);
    }
  }

  subscribe(listener: (state: SessionState) => void): () => void {
    this.listeners.add(listener);
    return () => this.listeners.delete(listener);
  }
}
