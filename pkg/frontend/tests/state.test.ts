import { describe, expect, it } from "vitest";

import type { ClickResponse, DemoResponse, TrialResponse } from "../src/api.js";
import {
  advanceDemo,
  applyClickResponse,
  applyTerminateResponse,
  formatMean,
  isLocked,
  pauseDemo,
  rampColor,
  resumeDemo,
  startDemo,
  trialViewFromResponse,
  uncertaintyRatio,
} from "../src/state.js";

function sampleTrial(kind: "feedback" | "practice" | "demo" = "practice"): TrialResponse {
  return {
    index: 3,
    stage: 1,
    kind,
    env: {
      name: "mini",
      nodes: [
        { id: 0, mean: 0, sigma: 0 },
        { id: 1, mean: 0, sigma: 5 },
        { id: 2, mean: 0, sigma: 10 },
        { id: 3, mean: 0, sigma: 20 },
      ],
      edges: [
        [0, 1],
        [1, 2],
        [2, 3],
      ],
      start: 0,
      goals: [3],
      layout: [
        [0, 0],
        [1, 0],
        [2, 0],
        [3, 0],
      ],
    },
    lambda: 0.05,
    tau_obs: 0.005,
    closed: false,
    clicks: 0,
    posterior: {
      means: [0, 1.23456, -2.5, 0],
      sds: [0, 5, 10, 20],
      obs_counts: [0, 0, 0, 0],
    },
    choice_set:
      kind === "feedback"
        ? { options: [1, 3], correct: 3, includes_terminate: true }
        : null,
    events: [],
    path: null,
    rr: null,
  };
}

describe("formatting", () => {
  it("labels posterior means with two decimals", () => {
    expect(formatMean(1.23456)).toBe("1.23");
    expect(formatMean(-2.5)).toBe("-2.50");
    expect(formatMean(0)).toBe("0.00");
  });

  it("maps certainty to gray and max uncertainty to red", () => {
    expect(rampColor(0)).toBe("rgb(154, 154, 154)");
    expect(rampColor(1)).toBe("rgb(214, 39, 40)");
    expect(uncertaintyRatio(0, 20)).toBe(0);
    expect(uncertaintyRatio(20, 20)).toBe(1);
    expect(uncertaintyRatio(30, 20)).toBe(1); // clamped
  });
});

describe("trialViewFromResponse", () => {
  it("shows service means verbatim", () => {
    const view = trialViewFromResponse(sampleTrial());
    expect(view.nodes[1].label).toBe("1.23");
    expect(view.nodes[2].label).toBe("-2.50");
    expect(view.nodes[1].inspectable).toBe(true);
    expect(view.nodes[0].inspectable).toBe(false);
  });

  it("marks only offered options on feedback trials", () => {
    const view = trialViewFromResponse(sampleTrial("feedback"));
    expect(view.nodes.filter((n) => n.offered).map((n) => n.id)).toEqual([1, 3]);
  });
});

describe("applyClickResponse", () => {
  const clickResponse = (feedback: ClickResponse["feedback"]): ClickResponse => ({
    node: 2,
    observation: 4.2,
    obs_index: 0,
    posterior_mean: 3.98765,
    posterior_sd: 8.0,
    clicks: 1,
    feedback,
    choice_set: null,
  });

  it("updates the label from the service posterior", () => {
    const view = trialViewFromResponse(sampleTrial());
    applyClickResponse(view, clickResponse(null), 1000, 20);
    expect(view.nodes[2].label).toBe("3.99");
    expect(view.clicks).toBe(1);
    expect(isLocked(view, 1001)).toBe(false);
  });

  it("locks the view and highlights the correct option on mistakes", () => {
    const view = trialViewFromResponse(sampleTrial("feedback"));
    applyClickResponse(
      view,
      clickResponse({ correct: false, delay: 3, correct_option: 3 }),
      1000,
      20,
    );
    expect(isLocked(view, 1000 + 2999)).toBe(true);
    expect(isLocked(view, 1000 + 3001)).toBe(false);
    expect(view.nodes[3].highlight).toBe("correct");
    expect(view.nodes[2].highlight).toBe("chosen-wrong");
  });
});

describe("applyTerminateResponse", () => {
  it("premature stop locks without ending the trial", () => {
    const view = trialViewFromResponse(sampleTrial("feedback"));
    applyTerminateResponse(
      view,
      { executed: false, delay: 5, correct: false, path: null, rr: null },
      2000,
    );
    expect(view.finalPath).toBeNull();
    expect(isLocked(view, 2000 + 4999)).toBe(true);
    expect(isLocked(view, 2000 + 5001)).toBe(false);
  });

  it("executed stop shows the route and score", () => {
    const view = trialViewFromResponse(sampleTrial());
    applyTerminateResponse(
      view,
      { executed: true, delay: 0, correct: true, path: [0, 1, 2, 3], rr: 7.5 },
      0,
    );
    expect(view.finalPath).toEqual([0, 1, 2, 3]);
    expect(view.score).toBe(7.5);
    expect(view.nodes[3].highlight).toBe("path");
  });
});

describe("demo playback", () => {
  const demo: DemoResponse = {
    mode: "mgpo",
    steps: [
      { node: 3, value: 11, posterior_mean: 10.7, posterior_sd: 14 },
      { node: 2, value: -1, posterior_mean: -0.9, posterior_sd: 11 },
    ],
    path: [0, 1, 2, 3],
    rr: 9.9,
    length: 2,
  };

  it("renders n steps plus the final route frame", () => {
    const view = trialViewFromResponse(sampleTrial("demo"));
    startDemo(view, demo);
    let frames = 0;
    while (!view.demo!.done) {
      advanceDemo(view, 20);
      frames += 1;
      if (frames > 10) break;
    }
    expect(frames).toBe(demo.steps.length + 1);
    expect(view.nodes[3].highlight).toBe("path");
    expect(view.nodes[3].label).toBe("10.70");
  });

  it("paused playback resumes at the same step", () => {
    const view = trialViewFromResponse(sampleTrial("demo"));
    startDemo(view, demo);
    advanceDemo(view, 20);
    const cursorBefore = view.demo!.cursor;
    pauseDemo(view);
    advanceDemo(view, 20);
    expect(view.demo!.cursor).toBe(cursorBefore);
    resumeDemo(view);
    advanceDemo(view, 20);
    expect(view.demo!.cursor).toBe(cursorBefore + 1);
  });
});
