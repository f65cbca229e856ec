/**
 * Acceptance: against a live service with the autopilot model, a what-if
 * raising the Annoyance risk target renders a diff containing only removals,
 * and the provenance drawer for the WAN-authentication requirement names the
 * ground-station/autopilot channel.
 */

import { ChildProcess, spawn } from "node:child_process";
import { mkdtempSync, readFileSync } from "node:fs";
import { createServer } from "node:net";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { parseCanonicalModel } from "../src/canonical.js";
import { diffRows, hasDifferences, provenanceNarrative } from "../src/viewmodel.js";

const DATA_DIR = join(__dirname, "..", "..", "src", "dcrypps", "data");

function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const server = createServer();
    server.listen(0, "127.0.0.1", () => {
      const address = server.address();
      if (address && typeof address === "object") {
        const port = address.port;
        server.close(() => resolve(port));
      } else {
        reject(new Error("no port"));
      }
    });
  });
}

async function waitForService(base: string, timeoutMs = 20000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (Date.now() < deadline) {
    try {
      const response = await fetch(`${base}/api/attack-kb`);
      if (response.ok) return;
    } catch {
      // not up yet
    }
    await new Promise((r) => setTimeout(r, 150));
  }
  throw new Error("service did not come up");
}

describe("designer console against a live service", () => {
  let proc: ChildProcess;
  let base: string;
  let api: ApiClient;

  beforeAll(async () => {
    const port = await freePort();
    base = `http://127.0.0.1:${port}`;
    proc = spawn(
      "python3",
      ["-m", "dcrypps.cli", "serve", "--port", String(port), "--data-dir", mkdtempSync(join(tmpdir(), "dcrypps-ui-"))],
      { stdio: "ignore" },
    );
    await waitForService(base);
    api = new ApiClient(base);
  }, 30000);

  afterAll(() => {
    proc?.kill("SIGINT");
  });

  it("runs the annoyance what-if loop and the provenance drawer", async () => {
    const modelText = readFileSync(join(DATA_DIR, "autopilot.pam"), "utf-8");
    const propertiesText = readFileSync(join(DATA_DIR, "autopilot.properties"), "utf-8");

    const uploaded = await api.uploadModel(modelText, propertiesText);
    expect(uploaded.issues).toEqual([]);

    const record = await api.getModel(uploaded.model_id);
    const model = parseCanonicalModel(record.model);
    expect(model.components.length).toBeGreaterThanOrEqual(8);
    const kinds = model.components.map((c) => c.kind);
    expect(kinds.filter((k) => k === "sensor").length).toBeGreaterThanOrEqual(2);
    expect(kinds.filter((k) => k === "network").length).toBeGreaterThanOrEqual(2);

    const baseline = await api.derive(uploaded.model_id, { samples: 100 });
    expect(baseline.report.requirements).toHaveLength(5);

    // what-if: raise the Annoyance risk target
    const whatIf = await api.whatIf(uploaded.model_id, {
      config: { base_risk_target: { Annoyance: 0.5 } },
      baseline_report_id: baseline.report_id,
      samples: 100,
    });
    expect(whatIf.diff).not.toBeNull();
    expect(whatIf.diff!.removed.length).toBeGreaterThan(0);
    expect(whatIf.diff!.added).toEqual([]);
    expect(whatIf.diff!.changed).toEqual([]);
    expect(hasDifferences(whatIf.diff)).toBe(true);

    // the rendered table carries only removal highlights
    const rows = diffRows(whatIf.report, whatIf.diff);
    const highlighted = rows.filter((row) => row.status !== "unchanged");
    expect(highlighted.length).toBeGreaterThan(0);
    expect(highlighted.every((row) => row.status === "removed")).toBe(true);

    // provenance drawer for the WAN-authentication requirement
    const wan = baseline.report.requirements.find((r) =>
      r.text.startsWith("WAN (Cellular) communication"),
    );
    expect(wan).toBeDefined();
    const narrative = provenanceNarrative(baseline.report, model, wan!.id);
    expect(narrative).not.toBeNull();
    expect(narrative!.pathLine).toContain("Ground Station");
    expect(narrative!.pathLine).toContain("Autopilot");
    expect(narrative!.pathLine).toContain("Cellular Network");
    expect(narrative!.entries.length).toBeGreaterThanOrEqual(1);

    // identical overrides twice render identical tables (determinism)
    const again = await api.whatIf(uploaded.model_id, {
      config: { base_risk_target: { Annoyance: 0.5 } },
      baseline_report_id: baseline.report_id,
      samples: 100,
    });
    expect(diffRows(again.report, again.diff)).toEqual(rows);
  }, 60000);

  it("surfaces 422 config errors for field-level display", async () => {
    const modelText = readFileSync(join(DATA_DIR, "autopilot.pam"), "utf-8");
    const propertiesText = readFileSync(join(DATA_DIR, "usecase.properties"), "utf-8");
    const uploaded = await api.uploadModel(modelText, propertiesText);
    await expect(
      api.derive(uploaded.model_id, { config: { max_joint: 0 }, samples: 50 }),
    ).rejects.toMatchObject({ status: 422, code: "invalid-config" });
  }, 30000);
});
