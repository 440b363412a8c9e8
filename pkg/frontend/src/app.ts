/**
 * DOM wiring for the assistant.
 *
 * The page is a thin shell over the service: the questionnaire comes from
 * /api/questions, the profile banner from /api/classify, and the suggestion
 * panel from /api/recommend. No ranking, scoring, or profile logic happens
 * here — the client only schedules requests (debounced, one in flight per
 * endpoint, superseded responses dropped) and renders what the server sent.
 */

import { ApiClient, ApiError } from "./api.js";
import { debounce } from "./debounce.js";
import { LatestOnly } from "./latest.js";
import { answeredCount, Store, type SessionState } from "./state.js";
import type {
  ClassifyRequestBody,
  ClassifyResponse,
  RecommendRequestBody,
  RecommendResponse,
} from "./types.js";

export const DEFAULT_DEBOUNCE_MS = 300;

export interface App {
  store: Store;
  /** Resolves once the question catalog has been fetched and rendered (or the attempt failed). */
  ready: Promise<void>;
  /** Run any debounced queries now instead of waiting out the delay. */
  flushQueries(): void;
}

const SKELETON = `
<header>
  <h1>Privacy settings assistant</h1>
  <p id="status" data-testid="status" role="status">connecting…</p>
</header>
<div id="error-banner" data-testid="error-banner" role="alert" hidden>
  <span id="error-text"></span>
  <button id="retry" type="button">Retry</button>
</div>
<p id="warning" data-testid="warning" role="note" hidden></p>
<section id="questionnaire-section" aria-label="questionnaire">
  <h2>Questionnaire</h2>
  <p id="progress" data-testid="progress"></p>
  <form id="questionnaire"></form>
  <button id="submit" data-testid="submit" type="button">Show my profile and suggestions</button>
</section>
<section id="profile-section" data-testid="profile-section" aria-label="profile" hidden>
  <h2>Your profile</h2>
  <p id="profile-name" data-testid="profile-name"></p>
  <div id="profile-scores" data-testid="profile-scores"></div>
</section>
<section id="workbench" data-testid="workbench" aria-label="settings workbench" hidden>
  <h2>Settings workbench</h2>
  <div class="controls">
    <label for="k-input">Neighbours (k)</label>
    <input id="k-input" data-testid="k-input" type="range" min="1" max="50" step="1">
    <output id="k-value" for="k-input"></output>
    <label for="n-input">Suggestions shown (N)</label>
    <input id="n-input" data-testid="n-input" type="range" min="1" max="50" step="1">
    <output id="n-value" for="n-input"></output>
  </div>
  <h3>Fixed settings</h3>
  <ul id="known-list" data-testid="known-list"></ul>
  <h3>Suggested settings <span id="panel-state" data-testid="panel-state"></span></h3>
  <ol id="panel" data-testid="panel"></ol>
  <p id="panel-empty" data-testid="panel-empty" hidden>All settings are fixed — nothing left to suggest.</p>
</section>
`;

function describeError(error: unknown): string {
  if (error instanceof ApiError) {
    return error.status > 0 ? `${error.message} (${error.code})` : error.message;
  }
  return String(error);
}

export function initApp(root: HTMLElement, client: ApiClient, debounceMs: number = DEFAULT_DEBOUNCE_MS): App {
  root.innerHTML = SKELETON;
  const el = <T extends HTMLElement>(id: string): T => {
    const found = root.querySelector<T>(`#${id}`);
    if (found === null) {
      throw new Error(`missing element #${id}`);
    }
    return found;
  };

  const statusEl = el<HTMLParagraphElement>("status");
  const errorBanner = el<HTMLDivElement>("error-banner");
  const errorText = el<HTMLSpanElement>("error-text");
  const warningEl = el<HTMLParagraphElement>("warning");
  const progressEl = el<HTMLParagraphElement>("progress");
  const form = el<HTMLFormElement>("questionnaire");
  const submitBtn = el<HTMLButtonElement>("submit");
  const profileSection = el<HTMLElement>("profile-section");
  const profileName = el<HTMLParagraphElement>("profile-name");
  const profileScores = el<HTMLDivElement>("profile-scores");
  const workbench = el<HTMLElement>("workbench");
  const kInput = el<HTMLInputElement>("k-input");
  const kValue = el<HTMLOutputElement>("k-value");
  const nInput = el<HTMLInputElement>("n-input");
  const nValue = el<HTMLOutputElement>("n-value");
  const knownList = el<HTMLUListElement>("known-list");
  const panel = el<HTMLOListElement>("panel");
  const panelEmpty = el<HTMLParagraphElement>("panel-empty");
  const panelState = el<HTMLSpanElement>("panel-state");

  const store = new Store();
  kInput.value = String(store.state.k);
  nInput.value = String(store.state.n);

  // ---- request scheduling ------------------------------------------------

  const classifyLatest = new LatestOnly<{ body: ClassifyRequestBody; atEdit: number }, ClassifyResponse>({
    send: ({ body }) => client.classify(body),
    deliver: (response, { atEdit }) => {
      const stale = atEdit !== store.state.editSeq;
      store.dispatch({ type: "classify_resolved", response, issuedAtEdit: atEdit });
      if (stale) {
        // An edit landed while this answer was in flight: refresh.
        issueClassify();
        return;
      }
      // First profile after an all-blank submission: the panel has no
      // evidence to query with until the profile id exists, so start it now.
      const s = store.state;
      if (s.submitted && s.recommendEdit === -1 && !s.pendingRecommend) {
        issueRecommend();
      }
    },
    onError: (error, { atEdit }) => {
      if (atEdit !== store.state.editSeq) {
        issueClassify();
        return;
      }
      store.dispatch({ type: "request_failed", kind: "classify", message: describeError(error) });
    },
  });

  const recommendLatest = new LatestOnly<{ body: RecommendRequestBody; atEdit: number }, RecommendResponse>({
    send: ({ body }) => client.recommend(body),
    deliver: (response, { atEdit }) => {
      const stale = atEdit !== store.state.editSeq;
      store.dispatch({ type: "recommend_resolved", entries: response.entries, issuedAtEdit: atEdit });
      if (stale) {
        issueRecommend();
      }
    },
    onError: (error, { atEdit }) => {
      if (atEdit !== store.state.editSeq) {
        issueRecommend();
        return;
      }
      store.dispatch({ type: "request_failed", kind: "recommend", message: describeError(error) });
    },
  });

  const issueClassify = (): void => {
    const s = store.state;
    store.dispatch({ type: "classify_started" });
    classifyLatest.issue({ body: { answers: { ...s.answers } }, atEdit: s.editSeq });
  };

  const issueRecommend = (): void => {
    const s = store.state;
    if (!s.submitted) {
      return;
    }
    const body: RecommendRequestBody = { known: { ...s.known }, k: s.k, n: s.n };
    if (s.profile !== null) {
      body.profile_id = s.profile.id;
    }
    if (body.profile_id === undefined && Object.keys(body.known).length === 0) {
      // Nothing to route on yet; the classify response will kick this off.
      return;
    }
    store.dispatch({ type: "recommend_started" });
    recommendLatest.issue({ body, atEdit: s.editSeq });
  };

  const debouncedClassify = debounce(issueClassify, debounceMs);
  const debouncedRecommend = debounce(issueRecommend, debounceMs);

  const flushQueries = (): void => {
    debouncedClassify.flush();
    debouncedRecommend.flush();
  };

  const afterEdit = (): void => {
    debouncedClassify();
    if (store.state.submitted) {
      debouncedRecommend();
    }
  };

  // ---- rendering ---------------------------------------------------------

  const buildQuestionnaire = (s: SessionState): void => {
    if (form.childElementCount > 0 || s.questions.length === 0) {
      return;
    }
    for (const q of s.questions) {
      const row = document.createElement("fieldset");
      row.className = "question";
      row.dataset.alias = q.alias;
      const legend = document.createElement("legend");
      legend.textContent = q.text;
      row.appendChild(legend);
      for (const [value, caption] of [
        ["1", "Allow"],
        ["0", "Deny"],
      ] as const) {
        const label = document.createElement("label");
        const input = document.createElement("input");
        input.type = "radio";
        input.name = `q-${q.alias}`;
        input.value = value;
        label.appendChild(input);
        label.appendChild(document.createTextNode(` ${caption}`));
        row.appendChild(label);
      }
      form.appendChild(row);
    }
  };

  const renderProfile = (s: SessionState): void => {
    profileSection.hidden = s.profile === null && !s.pendingClassify;
    if (s.profile === null) {
      profileName.textContent = "working out your profile…";
      profileScores.textContent = "";
      return;
    }
    profileName.textContent = s.pendingClassify ? `${s.profile.name} (updating…)` : s.profile.name;
    profileScores.textContent = "";
    s.profile.scores.forEach((score, i) => {
      const bar = document.createElement("div");
      bar.className = "score-bar";
      bar.dataset.classIndex = String(i);
      bar.dataset.score = String(score);
      bar.style.width = `${Math.max(0, Math.min(1, score)) * 100}%`;
      bar.textContent = `class ${i}: ${score.toFixed(3)}`;
      profileScores.appendChild(bar);
    });
  };

  const renderKnown = (s: SessionState): void => {
    knownList.textContent = "";
    for (const alias of Object.keys(s.known).sort()) {
      const li = document.createElement("li");
      li.dataset.alias = alias;
      const name = document.createElement("span");
      name.textContent = alias;
      const toggle = document.createElement("button");
      toggle.type = "button";
      toggle.dataset.toggle = alias;
      toggle.textContent = s.known[alias] === 1 ? "allowed" : "denied";
      toggle.setAttribute("aria-label", `toggle ${alias}`);
      const remove = document.createElement("button");
      remove.type = "button";
      remove.dataset.remove = alias;
      remove.textContent = "unset";
      remove.setAttribute("aria-label", `unset ${alias}`);
      li.append(name, " ", toggle, " ", remove);
      knownList.appendChild(li);
    }
  };

  const renderPanel = (s: SessionState): void => {
    panel.textContent = "";
    for (const entry of s.recommendations) {
      const li = document.createElement("li");
      li.dataset.setting = entry.setting;
      li.dataset.score = String(entry.score);
      li.dataset.value = String(entry.value);
      const name = document.createElement("span");
      name.className = "setting";
      name.textContent = entry.setting;
      const suggestion = document.createElement("span");
      suggestion.className = "suggestion";
      suggestion.textContent = `${entry.value === 1 ? "allow" : "deny"} (score ${entry.score.toFixed(3)})${
        entry.fallback ? " — profile average" : ""
      }`;
      const accept = document.createElement("button");
      accept.type = "button";
      accept.dataset.accept = entry.setting;
      accept.textContent = "Accept";
      accept.setAttribute("aria-label", `accept ${entry.setting}`);
      li.append(name, " ", suggestion, " ", accept);
      panel.appendChild(li);
    }
    panelEmpty.hidden = !(
      s.submitted &&
      s.recommendations.length === 0 &&
      s.recommendEdit >= 0 &&
      !s.pendingRecommend
    );
    panelState.textContent = s.pendingRecommend ? "(updating…)" : "";
  };

  const render = (s: SessionState): void => {
    buildQuestionnaire(s);
    progressEl.textContent = `${answeredCount(s)} of ${s.questions.length} answered`;
    warningEl.hidden = s.warning === null;
    warningEl.textContent = s.warning ?? "";
    errorBanner.hidden = s.error === null;
    errorText.textContent = s.error ?? "";
    workbench.hidden = !s.submitted;
    kValue.textContent = String(s.k);
    nValue.textContent = String(s.n);
    renderProfile(s);
    renderKnown(s);
    renderPanel(s);
  };

  store.subscribe(render);
  render(store.state);

  // ---- user events -------------------------------------------------------

  form.addEventListener("change", (event) => {
    const input = event.target;
    if (!(input instanceof HTMLInputElement) || input.type !== "radio") {
      return;
    }
    const alias = input.name.replace(/^q-/, "");
    store.dispatch({ type: "answer_set", alias, value: input.value === "1" ? 1 : 0 });
    afterEdit();
  });

  submitBtn.addEventListener("click", () => {
    store.dispatch({ type: "submitted" });
    debouncedClassify.cancel();
    debouncedRecommend.cancel();
    issueClassify();
    issueRecommend();
  });

  kInput.addEventListener("input", () => {
    store.dispatch({ type: "k_set", value: Number.parseInt(kInput.value, 10) });
    debouncedRecommend();
  });

  nInput.addEventListener("input", () => {
    store.dispatch({ type: "n_set", value: Number.parseInt(nInput.value, 10) });
    debouncedRecommend();
  });

  knownList.addEventListener("click", (event) => {
    const button = event.target;
    if (!(button instanceof HTMLButtonElement)) {
      return;
    }
    if (button.dataset.toggle !== undefined) {
      const alias = button.dataset.toggle;
      const next = store.state.known[alias] === 1 ? 0 : 1;
      store.dispatch({ type: "known_set", alias, value: next });
      debouncedRecommend();
    } else if (button.dataset.remove !== undefined) {
      store.dispatch({ type: "known_removed", alias: button.dataset.remove });
      debouncedRecommend();
    }
  });

  panel.addEventListener("click", (event) => {
    const button = event.target;
    if (!(button instanceof HTMLButtonElement) || button.dataset.accept === undefined) {
      return;
    }
    store.dispatch({ type: "accepted", alias: button.dataset.accept });
    debouncedRecommend.cancel();
    issueRecommend();
  });

  // ---- bootstrap ---------------------------------------------------------

  const bootstrap = async (): Promise<void> => {
    try {
      const [health, questions] = await Promise.all([client.health(), client.questions()]);
      statusEl.textContent = `service ${health.status} — model ${health.model_digest.slice(0, 12)}${
        health.recommender_ready ? "" : " (recommendations unavailable)"
      }`;
      store.dispatch({ type: "questions_loaded", questions });
    } catch (error) {
      statusEl.textContent = "service unreachable";
      store.dispatch({ type: "request_failed", kind: "bootstrap", message: describeError(error) });
    }
  };

  el<HTMLButtonElement>("retry").addEventListener("click", () => {
    store.dispatch({ type: "error_dismissed" });
    if (store.state.questions.length === 0) {
      void bootstrap();
      return;
    }
    issueClassify();
    if (store.state.submitted) {
      issueRecommend();
    }
  });

  return { store, ready: bootstrap(), flushQueries };
}
