/** Single-user session state; concurrent what-if requests are serialized
 * client-side by a request token: the latest submission wins and stale
 * responses are dropped. */

import type { Report, ReportDiff } from "./api.js";

export class Session {
  modelId: string | null = null;
  baselineReportId: string | null = null;
  baselineReport: Report | null = null;
  lastDiff: ReportDiff | null = null;
  lastReport: Report | null = null;
  pendingOverrides: Record<string, unknown> = {};

  private requestToken = 0;

  /** Claim a token for a new in-flight request. */
  nextToken(): number {
    this.requestToken += 1;
    return this.requestToken;
  }

  /** True iff the given token still belongs to the newest request. */
  isCurrent(token: number): boolean {
    return token === this.requestToken;
  }

  reset(): void {
    this.modelId = null;
    this.baselineReportId = null;
    this.baselineReport = null;
    this.lastDiff = null;
    this.lastReport = null;
    this.pendingOverrides = {};
    this.requestToken += 1;
  }
}
