/**
 * Typed client for the tutor session service. All game state lives on
 * the server; this module only moves JSON and retries idempotently.
 */

export type Condition = "choice_tutor" | "dummy_tutor" | "no_tutor";
export type TrialKind = "demo" | "feedback" | "practice" | "test";

export interface TrialPlanEntry {
  index: number;
  stage: number;
  kind: TrialKind;
}

export interface SessionInfo {
  session_id: string;
  condition: Condition;
  param_index: number;
  lambda: number;
  tau_obs: number;
  cursor: number;
  status: "active" | "complete";
  profile: "legacy" | "standard";
  trial_plan: TrialPlanEntry[];
}

export interface EnvNode {
  id: number;
  mean: number;
  sigma: number;
}

export interface EnvDoc {
  name: string;
  nodes: EnvNode[];
  edges: [number, number][];
  start: number;
  goals: number[];
  layout?: [number, number][];
}

export interface ChoiceSetView {
  options: number[];
  correct: number | "terminate";
  includes_terminate: boolean;
}

export interface PosteriorView {
  means: number[];
  sds: number[];
  obs_counts: number[];
}

export interface TrialResponse {
  index: number;
  stage: number;
  kind: TrialKind;
  env: EnvDoc;
  lambda: number;
  tau_obs: number;
  closed: boolean;
  clicks: number;
  posterior: PosteriorView;
  choice_set: ChoiceSetView | null;
  events: Record<string, unknown>[];
  path: number[] | null;
  rr: number | null;
}

export interface FeedbackView {
  correct: boolean;
  delay: number;
  correct_option: number | "terminate";
}

export interface ClickResponse {
  node: number;
  observation: number;
  obs_index: number;
  posterior_mean: number;
  posterior_sd: number;
  clicks: number;
  feedback: FeedbackView | null;
  choice_set: ChoiceSetView | null;
}

export interface TerminateResponse {
  executed: boolean;
  delay: number;
  correct: boolean;
  path: number[] | null;
  rr: number | null;
}

export interface DemoStep {
  node: number;
  value: number;
  posterior_mean: number;
  posterior_sd: number;
}

export interface DemoResponse {
  mode: "mgpo" | "dummy";
  steps: DemoStep[];
  path: number[];
  rr: number;
  length: number;
}

export class ApiError extends Error {
  constructor(public status: number, detail: string) {
    super(detail);
  }
}

async function request<T>(
  base: string,
  path: string,
  init?: RequestInit,
): Promise<T> {
  const resp = await fetch(base + path, {
    headers: { "content-type": "application/json" },
    ...init,
  });
  if (!resp.ok) {
    let detail = resp.statusText;
    try {
      detail = ((await resp.json()) as { detail?: string }).detail ?? detail;
    } catch {
      /* non-JSON error body */
    }
    throw new ApiError(resp.status, detail);
  }
  return (await resp.json()) as T;
}

export class TutorApi {
  constructor(private base: string) {}

  createSession(condition: Condition): Promise<SessionInfo> {
    return request(this.base, "/sessions", {
      method: "POST",
      body: JSON.stringify({ condition }),
    });
  }

  getSession(sessionId: string): Promise<SessionInfo> {
    return request(this.base, `/sessions/${sessionId}`);
  }

  getTrial(sessionId: string, k: number): Promise<TrialResponse> {
    return request(this.base, `/sessions/${sessionId}/trials/${k}`);
  }

  /** Clicks are idempotent under event_id; one retry covers transient
   * network failures without double-charging the participant. */
  async click(
    sessionId: string,
    k: number,
    node: number,
    eventId: string,
  ): Promise<ClickResponse> {
    const body = JSON.stringify({ node, event_id: eventId });
    try {
      return await request(this.base, `/sessions/${sessionId}/trials/${k}/click`, {
        method: "POST",
        body,
      });
    } catch (err) {
      if (err instanceof ApiError) throw err;
      return request(this.base, `/sessions/${sessionId}/trials/${k}/click`, {
        method: "POST",
        body,
      });
    }
  }

  async terminate(
    sessionId: string,
    k: number,
    eventId: string,
  ): Promise<TerminateResponse> {
    const body = JSON.stringify({ event_id: eventId });
    try {
      return await request(
        this.base,
        `/sessions/${sessionId}/trials/${k}/terminate`,
        { method: "POST", body },
      );
    } catch (err) {
      if (err instanceof ApiError) throw err;
      return request(this.base, `/sessions/${sessionId}/trials/${k}/terminate`, {
        method: "POST",
        body,
      });
    }
  }

  getDemo(sessionId: string, k: number): Promise<DemoResponse> {
    return request(this.base, `/sessions/${sessionId}/trials/${k}/demo`);
  }

  exportSession(sessionId: string): Promise<unknown> {
    return request(this.base, `/sessions/${sessionId}/export`);
  }
}
