/**
 * DOM rendering of a trial view. One SVG for the airport graph plus a
 * status bar and a countdown overlay shown while interactions are
 * locked by a delay penalty.
 */

import { isLocked, rampColor, type TrialViewState } from "./state.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const CELL_W = 110;
const CELL_H = 64;
const RADIUS = 22;

export interface RenderCallbacks {
  onInspect: (node: number) => void;
  onTerminate: () => void;
}

function nodeCenter(state: TrialViewState, id: number): [number, number] {
  const xs = state.nodes.map((n) => n.y);
  const minY = Math.min(...xs);
  const node = state.nodes[id];
  return [40 + node.x * CELL_W, 40 + (node.y - minY) * CELL_H];
}

export function renderTrial(
  container: HTMLElement,
  state: TrialViewState,
  nowMs: number,
  callbacks: RenderCallbacks,
): void {
  container.textContent = "";
  const locked = isLocked(state, nowMs);

  const status = document.createElement("div");
  status.className = "status";
  status.dataset.testid = "status";
  status.textContent =
    `Trial ${state.trialIndex + 1} (${state.kind}) - clicks ${state.clicks}` +
    (state.score !== null ? ` - score ${state.score.toFixed(2)}` : "");
  container.appendChild(status);

  const message = document.createElement("div");
  message.className = "message";
  message.dataset.testid = "message";
  message.textContent = state.message;
  container.appendChild(message);

  const width = 80 + CELL_W * (1 + Math.max(...state.nodes.map((n) => n.x)));
  const spanY =
    Math.max(...state.nodes.map((n) => n.y)) -
    Math.min(...state.nodes.map((n) => n.y));
  const svg = document.createElementNS(SVG_NS, "svg");
  svg.setAttribute("width", String(width));
  svg.setAttribute("height", String(120 + CELL_H * spanY));
  svg.dataset.testid = "graph";

  for (const [a, b] of state.edges) {
    const [x1, y1] = nodeCenter(state, a);
    const [x2, y2] = nodeCenter(state, b);
    const line = document.createElementNS(SVG_NS, "line");
    line.setAttribute("x1", String(x1));
    line.setAttribute("y1", String(y1));
    line.setAttribute("x2", String(x2));
    line.setAttribute("y2", String(y2));
    line.setAttribute("stroke", "#ccc");
    svg.appendChild(line);
  }

  for (const node of state.nodes) {
    const [cx, cy] = nodeCenter(state, node.id);
    const group = document.createElementNS(SVG_NS, "g");
    group.dataset.nodeId = String(node.id);
    group.setAttribute("class", "airport");

    const circle = document.createElementNS(SVG_NS, "circle");
    circle.setAttribute("cx", String(cx));
    circle.setAttribute("cy", String(cy));
    circle.setAttribute("r", String(node.isGoal ? RADIUS + 4 : RADIUS));
    circle.setAttribute("fill", node.isStart ? "#ffffff" : rampColor(node.uncertainty));
    const stroke =
      node.highlight === "correct"
        ? "#2ca02c"
        : node.highlight === "chosen-wrong"
          ? "#d62728"
          : node.highlight === "path"
            ? "#1f77b4"
            : node.highlight === "demo"
              ? "#ff7f0e"
              : node.offered && state.kind === "feedback"
                ? "#444"
                : "#999";
    circle.setAttribute("stroke", stroke);
    circle.setAttribute(
      "stroke-width",
      node.highlight || (node.offered && state.kind === "feedback") ? "4" : "1",
    );
    group.appendChild(circle);

    const text = document.createElementNS(SVG_NS, "text");
    text.setAttribute("x", String(cx));
    text.setAttribute("y", String(cy + 4));
    text.setAttribute("text-anchor", "middle");
    text.setAttribute("class", "node-label");
    text.dataset.testid = `label-${node.id}`;
    text.textContent = node.isStart ? "start" : node.label;
    group.appendChild(text);

    const clickable =
      !locked &&
      state.demo === null &&
      node.inspectable &&
      node.offered &&
      state.kind !== "demo";
    if (clickable) {
      group.addEventListener("click", () => callbacks.onInspect(node.id));
      group.setAttribute("cursor", "pointer");
    }
    svg.appendChild(group);
  }
  container.appendChild(svg);

  if (state.terminateOffered && state.demo === null) {
    const button = document.createElement("button");
    button.dataset.testid = "terminate";
    button.textContent = "Stop planning and fly";
    button.disabled = locked;
    button.addEventListener("click", () => callbacks.onTerminate());
    container.appendChild(button);
  }

  if (locked && state.lockedUntilMs !== null) {
    const overlay = document.createElement("div");
    overlay.className = "countdown-overlay";
    overlay.dataset.testid = "countdown";
    const remaining = Math.max(0, (state.lockedUntilMs - nowMs) / 1000);
    overlay.textContent = `${remaining.toFixed(1)} s`;
    container.appendChild(overlay);
  }
}
