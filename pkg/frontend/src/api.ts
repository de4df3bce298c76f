/** Typed client for the annotation service HTTP API. */

export interface FactorInfo {
  name: string;
  display_name: string;
  short_code: string;
  description: string;
  index: number;
}

export interface AssignmentOut {
  sample_id: string;
  batch: string;
}

export interface QueueResponse {
  annotator_id: string;
  remaining: number;
  assignments: AssignmentOut[];
}

export interface SampleResponse {
  sample_id: string;
  article_id: string;
  company_id: string;
  company_name: string;
  headline: string;
  sentences: string[];
  truncated_text: string;
}

export interface AnnotationPayload {
  sample_id: string;
  annotator_id: string;
  labels: Record<string, boolean>;
  no_risk_confirmed: boolean;
  status?: string;
  reject_reason?: string;
}

export interface AnnotationAck {
  sample_id: string;
  annotator_id: string;
  status: string;
  labels: Record<string, boolean>;
}

export interface ConflictSides {
  positive: string[];
  negative: string[];
}

export interface DisagreementResponse {
  sample_id: string;
  unanimous: boolean;
  submissions: Record<string, Record<string, boolean>>;
  conflicts: Record<string, ConflictSides>;
}

export interface AdjudicationPayload {
  sample_id: string;
  labels: Record<string, boolean>;
  adjudicator_id: string;
}

export interface GoldOut {
  sample_id: string;
  labels: Record<string, boolean>;
  adjudicated_by: string;
  source: string;
}

/** The service answered with a non-2xx status. */
export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
    this.name = "ApiError";
  }
}

/** The service could not be reached at all (retryable). */
export class NetworkError extends Error {
  constructor(cause: unknown) {
    super(`service unreachable: ${String(cause)}`);
    this.name = "NetworkError";
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ServiceClient {
  private readonly base: string;

  constructor(
    baseUrl: string,
    private readonly fetchFn: FetchLike = (...args) => fetch(...args),
  ) {
    this.base = baseUrl.replace(/\/+$/, "");
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchFn(`${this.base}${path}`, init);
    } catch (cause) {
      throw new NetworkError(cause);
    }
    const text = await response.text();
    if (!response.ok) {
      let detail = text;
      try {
        const body = JSON.parse(text);
        detail = typeof body.detail === "string" ? body.detail : JSON.stringify(body.detail);
      } catch {
        /* plain-text error body */
      }
      throw new ApiError(response.status, detail);
    }
    return (path === "/export/gold" ? (text as unknown) : JSON.parse(text)) as T;
  }

  private post<T>(path: string, payload: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(payload),
    });
  }

  async getSchema(): Promise<FactorInfo[]> {
    const body = await this.request<{ factors: FactorInfo[] }>("/schema/factors");
    return body.factors;
  }

  getQueue(annotatorId: string): Promise<QueueResponse> {
    return this.request(`/queue/${encodeURIComponent(annotatorId)}`);
  }

  getSample(sampleId: string): Promise<SampleResponse> {
    return this.request(`/samples/${encodeURIComponent(sampleId)}`);
  }

  submitAnnotation(payload: AnnotationPayload): Promise<AnnotationAck> {
    return this.post("/annotations", payload);
  }

  getDisagreements(sampleId: string): Promise<DisagreementResponse> {
    return this.request(`/disagreements/${encodeURIComponent(sampleId)}`);
  }

  postAdjudication(payload: AdjudicationPayload): Promise<GoldOut> {
    return this.post("/adjudications", payload);
  }

  /** Line-delimited JSON, one gold record per line. */
  exportGold(): Promise<string> {
    return this.request("/export/gold");
  }
}
