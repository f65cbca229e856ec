/**
 * Typed client for the dcrypps HTTP service. Every number the console shows
 * comes out of these responses; the console itself never derives anything.
 */

export interface ValidationIssue {
  code: string;
  detail: string;
  line?: number;
  column?: number;
}

export interface ProvenanceEntry {
  assertion: string;
  rank: number;
}

export interface Requirement {
  id: string;
  attack: string;
  targets: string[];
  text: string;
  effectiveness: number;
  provenance: ProvenanceEntry[];
}

export interface CauseRow {
  component: string;
  kind: string;
  attack: string | null;
  base: number;
  distance: number;
  adjusted: number;
  mitigated: boolean;
  effectiveness: number;
}

export interface EmissionRow {
  component: string;
  attack: string;
  requirement: string;
  candidate_rank: number;
  residual_before: number;
  residual_after: number;
}

export interface LedgerEntry {
  assertion: string;
  violated: string[];
  severity: string;
  importance: number;
  effective_target: number;
  initial_risk: number;
  residual_risk: number;
  resolved: boolean;
  causes: CauseRow[];
  emissions: EmissionRow[];
}

export interface Certificate {
  ps: number;
  required_ps: number;
  confidence: number;
  samples: number;
  seed: number;
  per_assertion: { assertion: string; residual: number; contribution: number }[];
}

export interface Report {
  format: string;
  model_name: string;
  model_digest: string;
  config: Record<string, unknown>;
  requirements: Requirement[];
  ledger: LedgerEntry[];
  unresolved: string[];
  certificate: Certificate | null;
}

export interface ReportDiff {
  added: Requirement[];
  removed: Requirement[];
  changed: { attack: string; targets: string[]; before: Requirement; after: Requirement }[];
  residual_deltas: { assertion: string; before: number | null; after: number | null }[];
}

export interface ModelRecord {
  model_id: string;
  model: string;
  properties: string;
  created_at: string;
}

export interface DeriveResponse {
  report_id: string;
  model_id: string;
  report: Report;
}

export interface WhatIfResponse {
  report: Report;
  diff: ReportDiff | null;
}

export interface DeriveBody {
  config?: Record<string, unknown>;
  required_ps?: number;
  samples?: number;
  uncertainty?: Record<string, { mean: number; strength?: number }>;
  baseline_report_id?: string;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    detail: string,
  ) {
    super(detail);
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchImpl: FetchLike = (...args) => fetch(...args),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, {
      headers: { "content-type": "application/json" },
      ...init,
    });
    const text = await response.text();
    if (!response.ok) {
      let code = `http-${response.status}`;
      let detail = text;
      try {
        const body = JSON.parse(text);
        code = body.code ?? code;
        detail = body.detail ?? detail;
      } catch {
        // non-JSON error body: keep raw text
      }
      throw new ApiError(response.status, code, detail);
    }
    return JSON.parse(text) as T;
  }

  uploadModel(model: string, properties: string, root?: string) {
    return this.request<{ model_id: string; issues: ValidationIssue[] }>("/api/models", {
      method: "POST",
      body: JSON.stringify({ model, properties, root: root ?? null }),
    });
  }

  getModel(modelId: string) {
    return this.request<ModelRecord>(`/api/models/${modelId}`);
  }

  derive(modelId: string, body: DeriveBody = {}) {
    return this.request<DeriveResponse>(`/api/models/${modelId}/derive`, {
      method: "POST",
      body: JSON.stringify(body),
    });
  }

  whatIf(modelId: string, body: DeriveBody = {}) {
    return this.request<WhatIfResponse>(`/api/models/${modelId}/whatif`, {
      method: "POST",
      body: JSON.stringify(body),
    });
  }

  getReport(reportId: string) {
    return this.request<{ report_id: string; model_id: string; report: Report }>(
      `/api/reports/${reportId}`,
    );
  }

  getAttackKb() {
    return this.request<{ attacks: { id: string; name: string; category: string }[] }>(
      "/api/attack-kb",
    );
  }
}
