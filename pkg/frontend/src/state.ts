/**
 * Trial view-model: a pure projection of service responses into what
 * the screen shows. No beliefs, scores, or strategy values are computed
 * here; every number on screen is taken verbatim from the service.
 */

import type {
  ChoiceSetView,
  ClickResponse,
  DemoResponse,
  TerminateResponse,
  TrialKind,
  TrialResponse,
} from "./api.js";

export interface NodeView {
  id: number;
  x: number;
  y: number;
  label: string; // posterior mean, 2 decimals
  uncertainty: number; // 0 = certain (gray) .. 1 = max uncertainty (red)
  inspectable: boolean;
  isGoal: boolean;
  isStart: boolean;
  offered: boolean;
  highlight: "correct" | "chosen-wrong" | "demo" | "path" | null;
}

export interface DemoPlayback {
  steps: DemoResponse["steps"];
  path: number[];
  cursor: number; // next step to reveal
  playing: boolean;
  done: boolean;
}

export interface TrialViewState {
  trialIndex: number;
  stage: number;
  kind: TrialKind;
  cost: number;
  nodes: NodeView[];
  edges: [number, number][];
  choiceSet: ChoiceSetView | null;
  terminateOffered: boolean;
  lockedUntilMs: number | null; // interactions disabled while set
  demo: DemoPlayback | null;
  finalPath: number[] | null;
  score: number | null;
  clicks: number;
  message: string;
}

export function formatMean(value: number): string {
  return value.toFixed(2);
}

/** Gray-to-red ramp position from a posterior sd, normalized by the
 * largest prior sd in the environment. */
export function uncertaintyRatio(sd: number, maxPriorSd: number): number {
  if (maxPriorSd <= 0) return 0;
  return Math.min(1, Math.max(0, sd / maxPriorSd));
}

export function rampColor(ratio: number): string {
  // gray (#9a9a9a) to red (#d62728)
  const from = [154, 154, 154];
  const to = [214, 39, 40];
  const mix = from.map((f, i) => Math.round(f + (to[i] - f) * ratio));
  return `rgb(${mix[0]}, ${mix[1]}, ${mix[2]})`;
}

function layoutOf(trial: TrialResponse): [number, number][] {
  if (trial.env.layout) return trial.env.layout;
  // fallback: single row
  return trial.env.nodes.map((n, i) => [i, 0]);
}

export function trialViewFromResponse(trial: TrialResponse): TrialViewState {
  const goals = new Set(trial.env.goals);
  const layout = layoutOf(trial);
  const maxPriorSd = Math.max(...trial.env.nodes.map((n) => n.sigma));
  const offered = new Set(trial.choice_set?.options ?? []);
  const nodes: NodeView[] = trial.env.nodes.map((n) => ({
    id: n.id,
    x: layout[n.id][0],
    y: layout[n.id][1],
    label: formatMean(trial.posterior.means[n.id]),
    uncertainty: uncertaintyRatio(trial.posterior.sds[n.id], maxPriorSd),
    inspectable: n.id !== trial.env.start && n.sigma > 0,
    isGoal: goals.has(n.id),
    isStart: n.id === trial.env.start,
    offered: trial.choice_set === null ? n.id !== trial.env.start && n.sigma > 0 : offered.has(n.id),
    highlight: null,
  }));
  if (trial.path) {
    for (const id of trial.path) nodes[id].highlight = "path";
  }
  return {
    trialIndex: trial.index,
    stage: trial.stage,
    kind: trial.kind,
    cost: trial.lambda,
    nodes,
    edges: trial.env.edges,
    choiceSet: trial.choice_set,
    terminateOffered: trial.kind !== "demo",
    lockedUntilMs: null,
    demo: null,
    finalPath: trial.path,
    score: trial.rr,
    clicks: trial.clicks,
    message:
      trial.kind === "demo"
        ? "Watch the demonstration."
        : trial.kind === "feedback"
          ? "Pick one of the offered inspections, or stop planning."
          : "Inspect airports freely, then choose your route.",
  };
}

function clearTransientHighlights(state: TrialViewState): void {
  for (const n of state.nodes) {
    if (n.highlight === "correct" || n.highlight === "chosen-wrong") {
      n.highlight = null;
    }
  }
}

/** Apply a click response: update the inspected node's label and color
 * from the service posterior, enforce any delay, highlight the correct
 * option after a mistake. */
export function applyClickResponse(
  state: TrialViewState,
  response: ClickResponse,
  nowMs: number,
  maxPriorSd: number,
): TrialViewState {
  clearTransientHighlights(state);
  const node = state.nodes[response.node];
  node.label = formatMean(response.posterior_mean);
  node.uncertainty = uncertaintyRatio(response.posterior_sd, maxPriorSd);
  state.clicks = response.clicks;
  state.choiceSet = response.choice_set ?? state.choiceSet;
  if (state.choiceSet) {
    const offered = new Set(state.choiceSet.options);
    for (const n of state.nodes) {
      n.offered = n.inspectable && offered.has(n.id);
    }
  }
  if (response.feedback && !response.feedback.correct) {
    state.lockedUntilMs = nowMs + response.feedback.delay * 1000;
    node.highlight = "chosen-wrong";
    const correct = response.feedback.correct_option;
    if (correct !== "terminate") {
      state.nodes[correct].highlight = "correct";
    }
    state.message = `Not the best move. The highlighted option was better. Wait ${response.feedback.delay.toFixed(0)} s.`;
  } else {
    state.message = `Observed ${formatMean(response.observation)}.`;
  }
  return state;
}

export function applyTerminateResponse(
  state: TrialViewState,
  response: TerminateResponse,
  nowMs: number,
): TrialViewState {
  clearTransientHighlights(state);
  if (!response.executed) {
    state.lockedUntilMs = nowMs + response.delay * 1000;
    state.message = `Keep planning: stopping now wastes value. Wait ${response.delay.toFixed(1)} s.`;
    return state;
  }
  state.finalPath = response.path;
  state.score = response.rr;
  if (response.path) {
    for (const id of response.path) state.nodes[id].highlight = "path";
  }
  state.message = `Route chosen. Trial score ${response.rr === null ? "?" : response.rr.toFixed(2)}.`;
  return state;
}

export function startDemo(state: TrialViewState, demo: DemoResponse): TrialViewState {
  state.demo = {
    steps: demo.steps,
    path: demo.path,
    cursor: 0,
    playing: true,
    done: false,
  };
  state.message = "Demonstration playing.";
  return state;
}

/** Reveal the next demo step (no-op when paused or finished). The final
 * advance highlights the chosen route. */
export function advanceDemo(
  state: TrialViewState,
  maxPriorSd: number,
): TrialViewState {
  const demo = state.demo;
  if (!demo || !demo.playing || demo.done) return state;
  clearTransientHighlights(state);
  if (demo.cursor < demo.steps.length) {
    const step = demo.steps[demo.cursor];
    const node = state.nodes[step.node];
    node.label = formatMean(step.posterior_mean);
    node.uncertainty = uncertaintyRatio(step.posterior_sd, maxPriorSd);
    node.highlight = "demo";
    demo.cursor += 1;
    return state;
  }
  for (const id of demo.path) state.nodes[id].highlight = "path";
  demo.done = true;
  demo.playing = false;
  state.message = "Demonstration finished.";
  return state;
}

export function pauseDemo(state: TrialViewState): TrialViewState {
  if (state.demo) state.demo.playing = false;
  return state;
}

export function resumeDemo(state: TrialViewState): TrialViewState {
  if (state.demo && !state.demo.done) state.demo.playing = true;
  return state;
}

export function isLocked(state: TrialViewState, nowMs: number): boolean {
  return state.lockedUntilMs !== null && nowMs < state.lockedUntilMs;
}

export function clearExpiredLock(state: TrialViewState, nowMs: number): void {
  if (state.lockedUntilMs !== null && nowMs >= state.lockedUntilMs) {
    state.lockedUntilMs = null;
  }
}
