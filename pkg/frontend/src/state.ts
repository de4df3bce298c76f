/** UI state machines, kept DOM-free so they are directly testable.
 *
 * The label form enforces the service's submission rules client-side:
 * either at least one factor is checked or "No risk" is confirmed, never
 * both. Checking "No risk" clears and disables the factor checkboxes.
 */

import type {
  AnnotationPayload,
  AssignmentOut,
  DisagreementResponse,
  FactorInfo,
  QueueResponse,
  SampleResponse,
  ServiceClient,
} from "./api.js";
import { ApiError, NetworkError } from "./api.js";

export interface LabelFormState {
  readonly factors: FactorInfo[];
  readonly checked: ReadonlySet<string>;
  readonly noRisk: boolean;
}

export function newLabelForm(factors: FactorInfo[]): LabelFormState {
  return { factors, checked: new Set(), noRisk: false };
}

export function toggleFactor(state: LabelFormState, name: string): LabelFormState {
  if (state.noRisk) {
    return state; // factor checkboxes are disabled under "No risk"
  }
  if (!state.factors.some((f) => f.name === name)) {
    return state;
  }
  const checked = new Set(state.checked);
  if (checked.has(name)) {
    checked.delete(name);
  } else {
    checked.add(name);
  }
  return { ...state, checked };
}

export function toggleNoRisk(state: LabelFormState): LabelFormState {
  if (state.noRisk) {
    return { ...state, noRisk: false };
  }
  return { ...state, noRisk: true, checked: new Set() };
}

export function canSubmit(state: LabelFormState): boolean {
  return state.noRisk || state.checked.size > 0;
}

export function toAnnotationPayload(
  state: LabelFormState,
  sampleId: string,
  annotatorId: string,
): AnnotationPayload {
  const labels: Record<string, boolean> = {};
  for (const factor of state.factors) {
    labels[factor.name] = state.checked.has(factor.name);
  }
  return {
    sample_id: sampleId,
    annotator_id: annotatorId,
    labels,
    no_risk_confirmed: state.noRisk,
  };
}

export type KeyAction =
  | { kind: "form"; state: LabelFormState }
  | { kind: "submit" }
  | { kind: "none" };

/** Keyboard shortcuts: 1-7 toggle factors, 0 toggles No-risk, Enter submits. */
export function handleKey(state: LabelFormState, key: string): KeyAction {
  if (key >= "1" && key <= "7") {
    const factor = state.factors[Number(key) - 1];
    if (!factor) {
      return { kind: "none" };
    }
    return { kind: "form", state: toggleFactor(state, factor.name) };
  }
  if (key === "0") {
    return { kind: "form", state: toggleNoRisk(state) };
  }
  if (key === "Enter") {
    return canSubmit(state) ? { kind: "submit" } : { kind: "none" };
  }
  return { kind: "none" };
}

export interface QueueViewState {
  loading: boolean;
  remaining: number;
  current: { assignment: AssignmentOut; sample: SampleResponse } | null;
  done: boolean;
  /** retry banner text; the form underneath is never cleared by a failure */
  banner: string | null;
  /** non-retryable submission error (400/403) */
  submitError: string | null;
}

export type SubmitOutcome = "blocked" | "submitted" | "rejected" | "offline";

/** Drives one annotator's labeling session against the service. */
export class QueueController {
  view: QueueViewState = {
    loading: false,
    remaining: 0,
    current: null,
    done: false,
    banner: null,
    submitError: null,
  };
  form: LabelFormState;

  constructor(
    private readonly client: ServiceClient,
    private readonly annotatorId: string,
    private readonly factors: FactorInfo[],
  ) {
    this.form = newLabelForm(factors);
  }

  /** Fetch the queue and surface the next assignment. Network failures set
   * the retry banner and leave the current sample and form untouched. */
  async load(): Promise<void> {
    this.view.loading = true;
    let queue: QueueResponse;
    try {
      queue = await this.client.getQueue(this.annotatorId);
    } catch (error) {
      this.view.loading = false;
      this.view.banner = this.describe(error);
      return;
    }
    this.view.remaining = queue.remaining;
    if (queue.assignments.length === 0) {
      this.view.current = null;
      this.view.done = true;
      this.view.loading = false;
      this.view.banner = null;
      return;
    }
    const assignment = queue.assignments[0];
    try {
      const sample = await this.client.getSample(assignment.sample_id);
      this.view.current = { assignment, sample };
    } catch (error) {
      this.view.loading = false;
      this.view.banner = this.describe(error);
      return;
    }
    this.view.done = false;
    this.view.banner = null;
    this.view.loading = false;
  }

  /** Submit the current form. Invalid forms are blocked before any request;
   * 400/403 show an error and preserve the form; network failures show the
   * retry banner and preserve the form. */
  async submit(): Promise<SubmitOutcome> {
    if (!this.view.current || !canSubmit(this.form)) {
      return "blocked";
    }
    const payload = toAnnotationPayload(
      this.form,
      this.view.current.sample.sample_id,
      this.annotatorId,
    );
    try {
      await this.client.submitAnnotation(payload);
    } catch (error) {
      if (error instanceof ApiError) {
        this.view.submitError = `${error.status}: ${error.detail}`;
        return "rejected";
      }
      this.view.banner = this.describe(error);
      return "offline";
    }
    this.form = newLabelForm(this.factors);
    this.view.submitError = null;
    await this.load();
    return "submitted";
  }

  private describe(error: unknown): string {
    if (error instanceof NetworkError) {
      return "Service unreachable - your labels are kept; retry when back online.";
    }
    if (error instanceof ApiError) {
      return `Service error ${error.status}: ${error.detail}`;
    }
    return String(error);
  }
}

export interface AdjudicationViewState {
  sampleId: string;
  factors: FactorInfo[];
  annotators: string[];
  submissions: Record<string, Record<string, boolean>>;
  conflicts: Record<string, { positive: string[]; negative: string[] }>;
  unanimous: boolean;
  /** chosen value per factor; unanimous factors are pre-filled */
  resolution: Record<string, boolean>;
  /** factors still needing a decision */
  pending: string[];
}

export function buildAdjudication(
  report: DisagreementResponse,
  factors: FactorInfo[],
): AdjudicationViewState {
  const annotators = Object.keys(report.submissions).sort();
  const resolution: Record<string, boolean> = {};
  const pending: string[] = [];
  for (const factor of factors) {
    if (factor.name in report.conflicts) {
      pending.push(factor.name);
    } else {
      const first = report.submissions[annotators[0]];
      resolution[factor.name] = first ? Boolean(first[factor.name]) : false;
    }
  }
  return {
    sampleId: report.sample_id,
    factors,
    annotators,
    submissions: report.submissions,
    conflicts: report.conflicts,
    unanimous: report.unanimous,
    resolution,
    pending,
  };
}

export function resolveFactor(
  view: AdjudicationViewState,
  factorName: string,
  value: boolean,
): AdjudicationViewState {
  const resolution = { ...view.resolution, [factorName]: value };
  const pending = view.pending.filter((name) => name !== factorName);
  return { ...view, resolution, pending };
}

export function adjudicationComplete(view: AdjudicationViewState): boolean {
  return view.pending.length === 0;
}

export function finalLabels(view: AdjudicationViewState): Record<string, boolean> {
  const labels: Record<string, boolean> = {};
  for (const factor of view.factors) {
    labels[factor.name] = Boolean(view.resolution[factor.name]);
  }
  return labels;
}
