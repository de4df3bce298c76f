// @vitest-environment happy-dom
import { describe, expect, it } from "vitest";

import { ServiceClient } from "../src/api.js";
import { renderAdjudication, renderQueue, renderSampleText } from "../src/render.js";
import {
  QueueController,
  buildAdjudication,
  resolveFactor,
  toggleFactor,
  toggleNoRisk,
} from "../src/state.js";
import { FACTORS, fetchStub, sampleFixture } from "./helpers.js";

const NOOP_HANDLERS = {
  onToggleFactor() {},
  onToggleNoRisk() {},
  onSubmit() {},
  onRetry() {},
};

async function loadedController(routes = defaultRoutes()) {
  const controller = new QueueController(
    new ServiceClient("http://svc", routes), "alice", FACTORS,
  );
  await controller.load();
  return controller;
}

function defaultRoutes() {
  return fetchStub({
    "GET /queue/": () => ({
      json: {
        annotator_id: "alice",
        remaining: 3,
        assignments: [{ sample_id: "a1:acme", batch: "calibration" }],
      },
    }),
    "GET /samples/": () => ({ json: sampleFixture() }),
  });
}

describe("renderSampleText", () => {
  it("textContent equals the service truncated_text byte-for-byte", () => {
    const sample = sampleFixture();
    const node = renderSampleText(sample);
    expect(node.textContent).toBe(sample.truncated_text);
  });

  it("highlights every occurrence of the target company", () => {
    const sample = sampleFixture();
    const node = renderSampleText(sample);
    const marks = Array.from(node.querySelectorAll("mark.company"));
    expect(marks.length).toBe(2); // headline + first sentence
    expect(marks.every((m) => m.textContent === "Acme")).toBe(true);
  });

  it("highlighting is case-insensitive and keeps original casing", () => {
    const sample = sampleFixture({
      headline: "ACME warns",
      sentences: [],
      truncated_text: "ACME warns",
    });
    const node = renderSampleText(sample);
    expect(node.querySelector("mark.company")?.textContent).toBe("ACME");
    expect(node.textContent).toBe("ACME warns");
  });
});

describe("renderQueue", () => {
  it("shows remaining count, batch kind and the seven factor boxes in order", async () => {
    const controller = await loadedController();
    const root = document.createElement("div");
    renderQueue(root, controller, NOOP_HANDLERS);
    expect(root.querySelector(".remaining")?.textContent).toBe("3 remaining");
    expect(root.querySelector(".batch")?.textContent).toContain("calibration");
    const boxes = Array.from(
      root.querySelectorAll<HTMLInputElement>("input[data-factor]"),
    );
    expect(boxes.map((b) => b.dataset.factor)).toEqual(FACTORS.map((f) => f.name));
    const names = Array.from(root.querySelectorAll(".factor-name")).map(
      (n) => n.textContent,
    );
    expect(names[0]).toBe("1. Supply Chain and Product");
  });

  it("submit is disabled until something is checked", async () => {
    const controller = await loadedController();
    const root = document.createElement("div");
    renderQueue(root, controller, NOOP_HANDLERS);
    expect(root.querySelector<HTMLButtonElement>("button.submit")?.disabled).toBe(true);
    controller.form = toggleFactor(controller.form, "macro");
    renderQueue(root, controller, NOOP_HANDLERS);
    expect(root.querySelector<HTMLButtonElement>("button.submit")?.disabled).toBe(false);
  });

  it("no-risk disables and unchecks the factor boxes", async () => {
    const controller = await loadedController();
    controller.form = toggleFactor(controller.form, "macro");
    controller.form = toggleNoRisk(controller.form);
    const root = document.createElement("div");
    renderQueue(root, controller, NOOP_HANDLERS);
    const boxes = Array.from(
      root.querySelectorAll<HTMLInputElement>("input[data-factor]"),
    );
    expect(boxes.every((b) => b.disabled && !b.checked)).toBe(true);
    expect(root.querySelector<HTMLButtonElement>("button.submit")?.disabled).toBe(false);
  });

  it("renders the retry banner after a network failure, form intact", async () => {
    const real = defaultRoutes();
    let offline = false;
    const controller = new QueueController(
      new ServiceClient("http://svc", async (url: string, init?: RequestInit) => {
        if (offline) throw new TypeError("down");
        return real(url, init);
      }),
      "alice",
      FACTORS,
    );
    await controller.load();
    controller.form = toggleFactor(controller.form, "finance");
    offline = true;
    await controller.load();
    const root = document.createElement("div");
    renderQueue(root, controller, NOOP_HANDLERS);
    expect(root.querySelector(".retry-banner")).not.toBeNull();
    const finance = root.querySelector<HTMLInputElement>('input[data-factor="finance"]');
    expect(finance?.checked).toBe(true);
  });

  it("shows the completion state when the queue is empty", async () => {
    const controller = await loadedController(
      fetchStub({
        "GET /queue/": () => ({
          json: { annotator_id: "alice", remaining: 0, assignments: [] },
        }),
      }),
    );
    const root = document.createElement("div");
    renderQueue(root, controller, NOOP_HANDLERS);
    expect(root.querySelector(".done")).not.toBeNull();
  });
});

describe("renderAdjudication", () => {
  const report = {
    sample_id: "a1:acme",
    unanimous: false,
    submissions: {
      alice: { macro: true, finance: false },
      bob: { macro: true, finance: true },
    },
    conflicts: { finance: { positive: ["bob"], negative: ["alice"] } },
  };

  it("marks exactly the conflicted rows and gates the final submit", () => {
    let view = buildAdjudication(report, FACTORS);
    const root = document.createElement("div");
    renderAdjudication(root, view, { onResolve() {}, onFinalize() {} });
    expect(root.querySelectorAll("tr.conflict").length).toBe(1);
    expect(root.querySelectorAll("tr.conflict button.resolve").length).toBe(2);
    expect(root.querySelector<HTMLButtonElement>("button.finalize")?.disabled).toBe(true);

    view = resolveFactor(view, "finance", true);
    renderAdjudication(root, view, { onResolve() {}, onFinalize() {} });
    expect(root.querySelector("tr.conflict.resolved")).not.toBeNull();
    expect(root.querySelector<HTMLButtonElement>("button.finalize")?.disabled).toBe(false);
  });

  it("shows the no-conflicts banner for unanimous samples", () => {
    const view = buildAdjudication(
      { ...report, unanimous: true, conflicts: {} }, FACTORS,
    );
    const root = document.createElement("div");
    renderAdjudication(root, view, { onResolve() {}, onFinalize() {} });
    expect(root.querySelector(".unanimous")).not.toBeNull();
    expect(root.querySelector<HTMLButtonElement>("button.finalize")?.disabled).toBe(false);
  });
});
