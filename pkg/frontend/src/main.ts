/** Console wiring: upload, model view, baseline, what-if loop, provenance. */

import { ApiClient, ApiError, Report } from "./api.js";
import { CanonicalModel, parseCanonicalModel } from "./canonical.js";
import {
  el,
  renderComponentDetails,
  renderDiffTable,
  renderGauges,
  renderGraph,
  renderIssues,
  renderProvenance,
  renderResidualBars,
} from "./render.js";
import { Session } from "./session.js";
import {
  OverrideForm,
  diffRows,
  gauges,
  graphLayout,
  hasDifferences,
  provenanceNarrative,
  residualBars,
  validateOverrides,
} from "./viewmodel.js";

const api = new ApiClient("");
const session = new Session();
let model: CanonicalModel | null = null;

function byId(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node;
}

function setBusy(busy: boolean): void {
  document.body.classList.toggle("busy", busy);
}

function showError(target: HTMLElement, error: unknown): void {
  const message = error instanceof ApiError ? `${error.code}: ${error.message}` : String(error);
  target.replaceChildren(renderIssues([{ code: "error", detail: message }]));
}

function renderModelView(): void {
  const host = byId("model-view");
  if (!model) {
    host.replaceChildren(el("p", "muted", "upload a model to begin"));
    return;
  }
  if (model.components.length === 0) {
    host.replaceChildren(el("p", "muted", "the model is empty"));
    return;
  }
  const svg = renderGraph(graphLayout(model, 1), (componentId) => {
    byId("component-details").replaceChildren(
      renderComponentDetails(model!, session.baselineReport, componentId),
    );
  });
  host.replaceChildren(svg);
}

function renderReportPanels(report: Report, diff: Parameters<typeof diffRows>[1]): void {
  const rows = diffRows(report, diff);
  byId("requirement-table").replaceChildren(
    renderDiffTable(rows, (reqId) => openProvenance(reqId)),
  );
  byId("no-diff").textContent =
    diff && !hasDifferences(diff) ? "no differences against the baseline" : "";
  byId("residuals").replaceChildren(renderResidualBars(residualBars(report)));
  byId("gauges").replaceChildren(renderGauges(gauges(report)));
}

function openProvenance(reqId: string): void {
  const report = session.lastReport ?? session.baselineReport;
  const drawer = byId("provenance");
  if (!report || !model) {
    drawer.replaceChildren(
      el("p", "error-banner", "report is stale; refresh the baseline first"),
    );
    return;
  }
  const narrative = provenanceNarrative(report, model, reqId);
  if (!narrative) {
    drawer.replaceChildren(
      el("p", "error-banner", `requirement ${reqId} is not in the current report; refresh`),
    );
    return;
  }
  drawer.replaceChildren(renderProvenance(narrative));
}

async function uploadAndBaseline(): Promise<void> {
  const status = byId("upload-status");
  const modelText = (byId("model-input") as HTMLTextAreaElement).value;
  const propertiesText = (byId("properties-input") as HTMLTextAreaElement).value;
  setBusy(true);
  try {
    session.reset();
    const uploaded = await api.uploadModel(modelText, propertiesText);
    session.modelId = uploaded.model_id;
    const record = await api.getModel(uploaded.model_id);
    model = parseCanonicalModel(record.model);
    renderModelView();
    status.textContent = `model ${uploaded.model_id}; deriving baseline...`;
    const derived = await api.derive(uploaded.model_id, {});
    session.baselineReportId = derived.report_id;
    session.baselineReport = derived.report;
    session.lastReport = derived.report;
    session.lastDiff = null;
    status.textContent = `model ${uploaded.model_id}; baseline ${derived.report_id}`;
    renderReportPanels(derived.report, null);
  } catch (error) {
    showError(status, error);
  } finally {
    setBusy(false);
  }
}

function readOverrideForm(): OverrideForm {
  const value = (id: string) => (byId(id) as HTMLInputElement).value;
  return {
    catastrophic: value("target-catastrophic"),
    reducedCapability: value("target-reduced"),
    annoyance: value("target-annoyance"),
    alpha: value("override-alpha"),
    missionHours: value("override-mission"),
    maxFaults: value("override-max-faults"),
    maxJoint: value("override-max-joint"),
    seed: value("override-seed"),
  };
}

function renderFieldErrors(errors: Record<string, string | undefined>): boolean {
  const panel = byId("whatif-errors");
  panel.replaceChildren();
  let any = false;
  for (const [field, message] of Object.entries(errors)) {
    if (!message) continue;
    any = true;
    panel.appendChild(el("p", "field-error", `${field}: ${message}`));
  }
  return any;
}

async function runWhatIf(): Promise<void> {
  if (!session.modelId || !session.baselineReportId) {
    byId("whatif-errors").replaceChildren(
      el("p", "field-error", "upload a model and derive a baseline first"),
    );
    return;
  }
  const { config, errors } = validateOverrides(readOverrideForm());
  if (renderFieldErrors(errors)) return; // invalid input: no request is sent
  session.pendingOverrides = config;
  const token = session.nextToken();
  setBusy(true);
  try {
    const response = await api.whatIf(session.modelId, {
      config,
      baseline_report_id: session.baselineReportId,
    });
    if (!session.isCurrent(token)) return; // a newer what-if superseded this one
    session.lastReport = response.report;
    session.lastDiff = response.diff;
    renderReportPanels(response.report, response.diff);
  } catch (error) {
    if (session.isCurrent(token)) showError(byId("whatif-errors"), error);
  } finally {
    setBusy(false);
  }
}

async function pinBaseline(): Promise<void> {
  if (!session.modelId) return;
  const token = session.nextToken();
  setBusy(true);
  try {
    const derived = await api.derive(session.modelId, { config: session.pendingOverrides });
    if (!session.isCurrent(token)) return;
    session.baselineReportId = derived.report_id;
    session.baselineReport = derived.report;
    session.lastReport = derived.report;
    session.lastDiff = null;
    byId("upload-status").textContent =
      `model ${session.modelId}; baseline ${derived.report_id}`;
    renderReportPanels(derived.report, null);
  } catch (error) {
    if (session.isCurrent(token)) showError(byId("whatif-errors"), error);
  } finally {
    setBusy(false);
  }
}

export function start(): void {
  byId("upload-button").addEventListener("click", () => void uploadAndBaseline());
  byId("whatif-button").addEventListener("click", () => void runWhatIf());
  byId("pin-baseline-button").addEventListener("click", () => void pinBaseline());
  renderModelView();
}

if (typeof document !== "undefined" && document.getElementById("model-view")) {
  start();
}
