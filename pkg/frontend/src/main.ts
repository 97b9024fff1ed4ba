/**
 * Entry point: create or resume a session, then run the 22-trial flow.
 * The service URL and condition come from query parameters, e.g.
 *   index.html?api=http://127.0.0.1:8000&condition=choice_tutor
 * Reloading mid-trial reconstructs the display from the server's trial
 * state; nothing is kept locally except the session id.
 */

import { TutorApi, type Condition, type SessionInfo } from "./api.js";
import { renderTrial } from "./render.js";
import {
  advanceDemo,
  applyClickResponse,
  applyTerminateResponse,
  clearExpiredLock,
  startDemo,
  trialViewFromResponse,
  type TrialViewState,
} from "./state.js";

const DEMO_STEP_MS = 1200;

function param(name: string, fallback: string): string {
  return new URLSearchParams(window.location.search).get(name) ?? fallback;
}

export class TrialRunner {
  private state: TrialViewState | null = null;
  private maxPriorSd = 1;
  private eventCounter = 0;

  constructor(
    private api: TutorApi,
    private session: SessionInfo,
    private container: HTMLElement,
  ) {}

  private eventId(): string {
    this.eventCounter += 1;
    return `${this.session.session_id}-${Date.now()}-${this.eventCounter}`;
  }

  private draw(): void {
    if (!this.state) return;
    clearExpiredLock(this.state, Date.now());
    renderTrial(this.container, this.state, Date.now(), {
      onInspect: (node) => void this.inspect(node),
      onTerminate: () => void this.terminate(),
    });
  }

  async runSession(): Promise<void> {
    const refreshed = await this.api.getSession(this.session.session_id);
    for (
      let k = refreshed.cursor;
      k < refreshed.trial_plan.length;
      k += 1
    ) {
      await this.runTrial(k, refreshed.trial_plan[k].kind);
    }
    this.container.textContent = "Session complete. Thank you!";
  }

  private async runTrial(k: number, kind: string): Promise<void> {
    const trial = await this.api.getTrial(this.session.session_id, k);
    this.maxPriorSd = Math.max(...trial.env.nodes.map((n) => n.sigma));
    this.state = trialViewFromResponse(trial);
    this.draw();
    if (kind === "demo") {
      const demo = await this.api.getDemo(this.session.session_id, k);
      startDemo(this.state, demo);
      await this.playDemo();
      return;
    }
    await this.waitForTrialEnd(k);
  }

  private playDemo(): Promise<void> {
    return new Promise((resolve) => {
      const tick = () => {
        if (!this.state || !this.state.demo) return resolve();
        advanceDemo(this.state, this.maxPriorSd);
        this.draw();
        if (this.state.demo.done) {
          window.setTimeout(resolve, DEMO_STEP_MS);
          return;
        }
        window.setTimeout(tick, DEMO_STEP_MS);
      };
      tick();
    });
  }

  private trialDone: (() => void) | null = null;

  private waitForTrialEnd(_k: number): Promise<void> {
    return new Promise((resolve) => {
      this.trialDone = resolve;
    });
  }

  private async inspect(node: number): Promise<void> {
    if (!this.state) return;
    const k = this.state.trialIndex;
    const response = await this.api.click(
      this.session.session_id,
      k,
      node,
      this.eventId(),
    );
    applyClickResponse(this.state, response, Date.now(), this.maxPriorSd);
    this.draw();
    if (this.state.lockedUntilMs !== null) {
      const wait = this.state.lockedUntilMs - Date.now();
      window.setTimeout(() => this.draw(), Math.max(0, wait) + 20);
    }
  }

  private async terminate(): Promise<void> {
    if (!this.state) return;
    const k = this.state.trialIndex;
    const response = await this.api.terminate(
      this.session.session_id,
      k,
      this.eventId(),
    );
    applyTerminateResponse(this.state, response, Date.now());
    this.draw();
    if (!response.executed) {
      if (this.state.lockedUntilMs !== null) {
        const wait = this.state.lockedUntilMs - Date.now();
        window.setTimeout(() => this.draw(), Math.max(0, wait) + 20);
      }
      return;
    }
    window.setTimeout(() => this.trialDone?.(), 1500);
  }
}

async function boot(): Promise<void> {
  const container = document.getElementById("app");
  if (!container) throw new Error("missing #app container");
  const api = new TutorApi(param("api", "http://127.0.0.1:8000"));
  const stored = window.sessionStorage.getItem("metaplan-session");
  let session: SessionInfo;
  if (stored) {
    session = await api.getSession(stored);
  } else {
    session = await api.createSession(param("condition", "choice_tutor") as Condition);
    window.sessionStorage.setItem("metaplan-session", session.session_id);
  }
  await new TrialRunner(api, session, container).runSession();
}

if (typeof window !== "undefined" && "document" in globalThis) {
  void boot();
}
