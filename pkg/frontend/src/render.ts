/** DOM rendering. Views re-render whole containers; state lives outside. */

import type { SampleResponse } from "./api.js";
import type {
  AdjudicationViewState,
  LabelFormState,
  QueueController,
} from "./state.js";
import { adjudicationComplete, canSubmit } from "./state.js";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) {
    node.className = className;
  }
  if (text !== undefined) {
    node.textContent = text;
  }
  return node;
}

/** Append `text` to `parent`, wrapping company-name matches in <mark>.
 * Only element boundaries are added, so textContent stays byte-identical. */
function appendHighlighted(parent: HTMLElement, text: string, company: string): void {
  if (!company) {
    parent.appendChild(document.createTextNode(text));
    return;
  }
  const needle = company.toLowerCase();
  const haystack = text.toLowerCase();
  let position = 0;
  for (;;) {
    const found = haystack.indexOf(needle, position);
    if (found < 0) {
      break;
    }
    if (found > position) {
      parent.appendChild(document.createTextNode(text.slice(position, found)));
    }
    const mark = el("mark", "company", text.slice(found, found + company.length));
    parent.appendChild(mark);
    position = found + company.length;
  }
  if (position < text.length) {
    parent.appendChild(document.createTextNode(text.slice(position)));
  }
}

/** The sample text block: headline plus retained sentences, single-space
 * separated, so the container's textContent equals the service's
 * truncated_text byte-for-byte. */
export function renderSampleText(sample: SampleResponse): HTMLElement {
  const container = el("div", "sample-text");
  const headline = el("span", "headline");
  appendHighlighted(headline, sample.headline, sample.company_name);
  container.appendChild(headline);
  for (const sentence of sample.sentences) {
    container.appendChild(document.createTextNode(" "));
    const span = el("span", "sentence");
    appendHighlighted(span, sentence, sample.company_name);
    container.appendChild(span);
  }
  return container;
}

export interface QueueHandlers {
  onToggleFactor(name: string): void;
  onToggleNoRisk(): void;
  onSubmit(): void;
  onRetry(): void;
}

function renderLabelForm(form: LabelFormState, handlers: QueueHandlers): HTMLElement {
  const fieldset = el("fieldset", "label-form");
  fieldset.appendChild(el("legend", undefined, "Risk factors"));
  form.factors.forEach((factor, index) => {
    const row = el("label", "factor-row");
    const box = el("input") as HTMLInputElement;
    box.type = "checkbox";
    box.dataset.factor = factor.name;
    box.checked = form.checked.has(factor.name);
    box.disabled = form.noRisk;
    box.addEventListener("change", () => handlers.onToggleFactor(factor.name));
    row.appendChild(box);
    row.appendChild(
      el("span", "factor-name", `${index + 1}. ${factor.display_name}`),
    );
    row.title = factor.description;
    fieldset.appendChild(row);
  });

  const noRiskRow = el("label", "no-risk-row");
  const noRisk = el("input") as HTMLInputElement;
  noRisk.type = "checkbox";
  noRisk.dataset.noRisk = "true";
  noRisk.checked = form.noRisk;
  noRisk.addEventListener("change", () => handlers.onToggleNoRisk());
  noRiskRow.appendChild(noRisk);
  noRiskRow.appendChild(el("span", undefined, "0. No risk (confirm all factors absent)"));
  fieldset.appendChild(noRiskRow);

  const submit = el("button", "submit", "Submit (Enter)") as HTMLButtonElement;
  submit.type = "button";
  submit.disabled = !canSubmit(form);
  submit.addEventListener("click", () => handlers.onSubmit());
  fieldset.appendChild(submit);
  return fieldset;
}

export function renderQueue(
  container: HTMLElement,
  controller: QueueController,
  handlers: QueueHandlers,
): void {
  container.replaceChildren();
  const view = controller.view;

  if (view.banner) {
    const banner = el("div", "banner retry-banner", view.banner);
    const retry = el("button", "retry", "Retry") as HTMLButtonElement;
    retry.type = "button";
    retry.addEventListener("click", () => handlers.onRetry());
    banner.appendChild(retry);
    container.appendChild(banner);
  }
  if (view.done) {
    container.appendChild(
      el("div", "done", "All assignments complete - nothing left to label."),
    );
    return;
  }
  if (!view.current) {
    if (!view.banner) {
      container.appendChild(el("div", "loading", "Loading queue..."));
    }
    return;
  }

  const header = el("div", "queue-header");
  header.appendChild(el("span", "remaining", `${view.remaining} remaining`));
  header.appendChild(el("span", "batch", `batch: ${view.current.assignment.batch}`));
  header.appendChild(
    el("span", "target", `target company: ${view.current.sample.company_name}`),
  );
  container.appendChild(header);
  container.appendChild(renderSampleText(view.current.sample));
  if (view.submitError) {
    container.appendChild(el("div", "banner error-banner", view.submitError));
  }
  container.appendChild(renderLabelForm(controller.form, handlers));
}

export interface AdjudicationHandlers {
  onResolve(factorName: string, value: boolean): void;
  onFinalize(): void;
}

export function renderAdjudication(
  container: HTMLElement,
  view: AdjudicationViewState,
  handlers: AdjudicationHandlers,
): void {
  container.replaceChildren();
  container.appendChild(el("h2", undefined, `Adjudicate ${view.sampleId}`));
  if (view.unanimous) {
    container.appendChild(
      el("div", "banner unanimous", "No conflicts - annotators agree on every factor."),
    );
  }

  const table = el("table", "diff");
  const head = el("tr");
  head.appendChild(el("th", undefined, "factor"));
  for (const annotator of view.annotators) {
    head.appendChild(el("th", undefined, annotator));
  }
  head.appendChild(el("th", undefined, "resolution"));
  table.appendChild(head);

  for (const factor of view.factors) {
    const conflicted = factor.name in view.conflicts;
    const resolved = factor.name in view.resolution;
    const row = el("tr", conflicted ? (resolved ? "conflict resolved" : "conflict") : "unanimous-row");
    row.dataset.factor = factor.name;
    row.appendChild(el("td", "factor-name", factor.display_name));
    for (const annotator of view.annotators) {
      const labels = view.submissions[annotator] ?? {};
      row.appendChild(el("td", "vote", labels[factor.name] ? "yes" : "no"));
    }
    const cell = el("td", "resolution");
    if (conflicted) {
      for (const value of [true, false]) {
        const button = el(
          "button",
          `resolve ${view.resolution[factor.name] === value ? "chosen" : ""}`,
          value ? "Yes" : "No",
        ) as HTMLButtonElement;
        button.type = "button";
        button.addEventListener("click", () => handlers.onResolve(factor.name, value));
        cell.appendChild(button);
      }
    } else {
      cell.textContent = view.resolution[factor.name] ? "yes" : "no";
    }
    row.appendChild(cell);
    table.appendChild(row);
  }
  container.appendChild(table);

  const finalize = el("button", "finalize", "Submit adjudication") as HTMLButtonElement;
  finalize.type = "button";
  finalize.disabled = !adjudicationComplete(view);
  finalize.addEventListener("click", () => handlers.onFinalize());
  container.appendChild(finalize);
}
