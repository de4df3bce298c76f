/** Bootstraps the annotator and adjudicator views; routing by URL hash:
 *   #/annotate/<annotator_id>
 *   #/adjudicate/<sample_id>?by=<adjudicator_id>
 */

import { ServiceClient } from "./api.js";
import type { FactorInfo } from "./api.js";
import { serviceBaseUrl } from "./config.js";
import { renderAdjudication, renderQueue } from "./render.js";
import {
  AdjudicationViewState,
  QueueController,
  buildAdjudication,
  finalLabels,
  handleKey,
  resolveFactor,
} from "./state.js";

function root(): HTMLElement {
  return document.getElementById("app") as HTMLElement;
}

function renderLanding(): void {
  const container = root();
  container.replaceChildren();
  const heading = document.createElement("h2");
  heading.textContent = "newsrisk annotation";
  container.appendChild(heading);
  const hint = document.createElement("p");
  hint.textContent =
    "Open #/annotate/<your-annotator-id> to label, or #/adjudicate/<sample-id>?by=<id> to resolve conflicts.";
  container.appendChild(hint);
}

async function runAnnotator(
  client: ServiceClient,
  factors: FactorInfo[],
  annotatorId: string,
): Promise<void> {
  const controller = new QueueController(client, annotatorId, factors);
  const handlers = {
    onToggleFactor(name: string) {
      const action = handleKey(controller.form, String(
        controller.form.factors.findIndex((f) => f.name === name) + 1,
      ));
      if (action.kind === "form") {
        controller.form = action.state;
      }
      draw();
    },
    onToggleNoRisk() {
      const action = handleKey(controller.form, "0");
      if (action.kind === "form") {
        controller.form = action.state;
      }
      draw();
    },
    async onSubmit() {
      await controller.submit();
      draw();
    },
    async onRetry() {
      await controller.load();
      draw();
    },
  };
  const draw = () => renderQueue(root(), controller, handlers);

  document.addEventListener("keydown", async (event) => {
    const target = event.target as HTMLElement | null;
    if (target instanceof HTMLInputElement && target.type === "text") {
      return;
    }
    const action = handleKey(controller.form, event.key);
    if (action.kind === "form") {
      controller.form = action.state;
      draw();
    } else if (action.kind === "submit") {
      await controller.submit();
      draw();
    }
  });

  draw();
  await controller.load();
  draw();
}

async function runAdjudicator(
  client: ServiceClient,
  factors: FactorInfo[],
  sampleId: string,
  adjudicatorId: string,
): Promise<void> {
  let view: AdjudicationViewState;
  try {
    const report = await client.getDisagreements(sampleId);
    view = buildAdjudication(report, factors);
  } catch (error) {
    root().textContent = `Cannot adjudicate: ${String(error)}`;
    return;
  }
  const handlers = {
    onResolve(factorName: string, value: boolean) {
      view = resolveFactor(view, factorName, value);
      draw();
    },
    async onFinalize() {
      try {
        await client.postAdjudication({
          sample_id: sampleId,
          labels: finalLabels(view),
          adjudicator_id: adjudicatorId,
        });
        root().textContent = `Adjudication stored for ${sampleId}.`;
      } catch (error) {
        draw();
        const banner = document.createElement("div");
        banner.className = "banner error-banner";
        banner.textContent = String(error);
        root().prepend(banner);
      }
    },
  };
  const draw = () => renderAdjudication(root(), view, handlers);
  draw();
}

export async function boot(): Promise<void> {
  const client = new ServiceClient(serviceBaseUrl());
  const hash = window.location.hash;
  const annotateMatch = hash.match(/^#\/annotate\/([^/?]+)/);
  const adjudicateMatch = hash.match(/^#\/adjudicate\/([^/?]+)(?:\?by=(.+))?$/);
  if (!annotateMatch && !adjudicateMatch) {
    renderLanding();
    return;
  }
  let factors: FactorInfo[];
  try {
    factors = await client.getSchema();
  } catch (error) {
    root().textContent = `Service unreachable: ${String(error)}`;
    return;
  }
  if (annotateMatch) {
    await runAnnotator(client, factors, decodeURIComponent(annotateMatch[1]));
  } else if (adjudicateMatch) {
    await runAdjudicator(
      client,
      factors,
      decodeURIComponent(adjudicateMatch[1]),
      adjudicateMatch[2] ? decodeURIComponent(adjudicateMatch[2]) : "adjudicator",
    );
  }
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  window.addEventListener("hashchange", () => void boot());
  void boot();
}
