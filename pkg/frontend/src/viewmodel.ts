/**
 * Pure presentation logic: everything here transforms service responses into
 * renderable rows. No derivation happens on the client.
 */

import type { LedgerEntry, Report, ReportDiff, Requirement } from "./api.js";
import type { CanonicalModel } from "./canonical.js";
import { displayName } from "./canonical.js";

// --- what-if form validation -------------------------------------------------

export interface OverrideForm {
  catastrophic?: string;
  reducedCapability?: string;
  annoyance?: string;
  alpha?: string;
  missionHours?: string;
  maxFaults?: string;
  maxJoint?: string;
  seed?: string;
}

export interface ValidatedOverrides {
  config: Record<string, unknown>;
  errors: Partial<Record<keyof OverrideForm, string>>;
}

function parseNumber(raw: string | undefined): number | undefined {
  if (raw === undefined || raw.trim() === "") return undefined;
  const value = Number(raw);
  return Number.isNaN(value) ? NaN : value;
}

/** Client-side mirror of the service's config rules: invalid fields produce
 * field errors and no request may be sent. */
export function validateOverrides(form: OverrideForm): ValidatedOverrides {
  const errors: ValidatedOverrides["errors"] = {};
  const config: Record<string, unknown> = {};

  const targets: Record<string, number> = {};
  const targetFields: [keyof OverrideForm, string][] = [
    ["catastrophic", "Catastrophic"],
    ["reducedCapability", "ReducedCapability"],
    ["annoyance", "Annoyance"],
  ];
  for (const [field, severity] of targetFields) {
    const value = parseNumber(form[field]);
    if (value === undefined) continue;
    if (Number.isNaN(value) || value < 0 || value > 1) {
      errors[field] = "risk target must be a number in [0, 1]";
    } else {
      targets[severity] = value;
    }
  }
  if (Object.keys(targets).length > 0) config["base_risk_target"] = targets;

  const alpha = parseNumber(form.alpha);
  if (alpha !== undefined) {
    if (Number.isNaN(alpha) || alpha <= 0 || alpha > 1) {
      errors.alpha = "alpha must be in (0, 1]";
    } else {
      config["alpha"] = alpha;
    }
  }
  const missionHours = parseNumber(form.missionHours);
  if (missionHours !== undefined) {
    if (Number.isNaN(missionHours) || missionHours <= 0) {
      errors.missionHours = "mission hours must be > 0";
    } else {
      config["mission_hours"] = missionHours;
    }
  }
  const intFields: [keyof OverrideForm, string, number][] = [
    ["maxFaults", "max_cardinality", 1],
    ["maxJoint", "max_joint", 1],
    ["seed", "seed", -Infinity],
  ];
  for (const [field, key, minimum] of intFields) {
    const value = parseNumber(form[field]);
    if (value === undefined) continue;
    if (Number.isNaN(value) || !Number.isInteger(value) || value < minimum) {
      errors[field] = minimum > -Infinity ? `must be an integer >= ${minimum}` : "must be an integer";
    } else {
      config[key] = value;
    }
  }
  return { config, errors };
}

// --- requirement diff table ----------------------------------------------------

export type RowStatus = "unchanged" | "added" | "removed" | "changed";

export interface DiffRow {
  key: string;
  id: string;
  attack: string;
  targets: string[];
  text: string;
  status: RowStatus;
}

function reqKey(req: Requirement): string {
  return `${req.attack}|${[...req.targets].sort().join(",")}`;
}

/** Requirement table for a what-if run: current rows plus highlighted
 * removals, exactly as reported by the service diff. */
export function diffRows(current: Report, diff: ReportDiff | null): DiffRow[] {
  const added = new Set((diff?.added ?? []).map(reqKey));
  const changed = new Set((diff?.changed ?? []).map((c) => `${c.attack}|${[...c.targets].sort().join(",")}`));
  const rows: DiffRow[] = current.requirements.map((req) => {
    const key = reqKey(req);
    const status: RowStatus = added.has(key) ? "added" : changed.has(key) ? "changed" : "unchanged";
    return { key, id: req.id, attack: req.attack, targets: req.targets, text: req.text, status };
  });
  for (const req of diff?.removed ?? []) {
    rows.push({
      key: reqKey(req),
      id: req.id,
      attack: req.attack,
      targets: req.targets,
      text: req.text,
      status: "removed",
    });
  }
  return rows;
}

export function hasDifferences(diff: ReportDiff | null): boolean {
  if (!diff) return false;
  return (
    diff.added.length > 0 ||
    diff.removed.length > 0 ||
    diff.changed.length > 0 ||
    diff.residual_deltas.length > 0
  );
}

// --- risk bars and gauges --------------------------------------------------------

export interface ResidualBar {
  assertion: string;
  severity: string;
  residual: number;
  target: number;
  /** bar fill as a fraction of the target scale, capped for rendering */
  ratio: number;
  overTarget: boolean;
}

export function residualBars(report: Report): ResidualBar[] {
  return report.ledger.map((entry: LedgerEntry) => {
    const ratio = entry.effective_target > 0 ? entry.residual_risk / entry.effective_target : 1;
    return {
      assertion: entry.assertion,
      severity: entry.severity,
      residual: entry.residual_risk,
      target: entry.effective_target,
      ratio: Math.min(ratio, 10),
      overTarget: !entry.resolved,
    };
  });
}

export interface Gauges {
  ps: number;
  requiredPs: number;
  confidence: number;
  meets: boolean;
}

export function gauges(report: Report): Gauges | null {
  const cert = report.certificate;
  if (!cert) return null;
  return {
    ps: cert.ps,
    requiredPs: cert.required_ps,
    confidence: cert.confidence,
    meets: cert.ps >= cert.required_ps,
  };
}

// --- provenance narrative -----------------------------------------------------------

export interface NarrativeEntry {
  assertion: string;
  violated: string[];
  kind: "emission" | "already-covered";
  candidateRank: number;
  residualBefore?: number;
  residualAfter?: number;
  component?: string;
}

export interface ProvenanceNarrative {
  requirementId: string;
  text: string;
  attack: string;
  targetNames: string[];
  /** e.g. "Ground Station <-> Autopilot over Cellular Network" */
  pathLine: string | null;
  entries: NarrativeEntry[];
}

/** Explain-style narrative for one requirement, composed from the report
 * ledger and the canonical model's display names. */
export function provenanceNarrative(
  report: Report,
  model: CanonicalModel,
  requirementId: string,
): ProvenanceNarrative | null {
  const requirement = report.requirements.find((r) => r.id === requirementId);
  if (!requirement) return null;

  const ledgerById = new Map(report.ledger.map((entry) => [entry.assertion, entry]));
  const entries: NarrativeEntry[] = [];
  for (const prov of requirement.provenance) {
    const entry = ledgerById.get(prov.assertion);
    if (!entry) continue;
    if (prov.rank === 0) {
      entries.push({
        assertion: prov.assertion,
        violated: entry.violated,
        kind: "already-covered",
        candidateRank: 0,
      });
      continue;
    }
    const emission = entry.emissions.find((e) => e.requirement === requirementId);
    entries.push({
      assertion: prov.assertion,
      violated: entry.violated,
      kind: "emission",
      candidateRank: prov.rank,
      residualBefore: emission?.residual_before,
      residualAfter: emission?.residual_after,
      component: emission?.component,
    });
  }

  // For channel-attached requirements, name the endpoints either side of the
  // channel: the implicated component and the channel's most important other
  // endpoint (both straight from the model the service returned).
  let pathLine: string | null = null;
  const emission = entries.find((e) => e.kind === "emission" && e.component);
  const channelId = requirement.targets[0];
  const channel = model.components.find((c) => c.id === channelId);
  if (emission?.component && channel && channel.kind === "network") {
    const endpoints = model.edges
      .filter((e) => e.kind === "communicates-over" && e.dst === channelId)
      .map((e) => e.src)
      .filter((id) => id !== emission.component)
      .map((id) => model.components.find((c) => c.id === id))
      .filter((c): c is NonNullable<typeof c> => c !== undefined)
      .sort((a, b) => b.importance - a.importance || a.id.localeCompare(b.id));
    const peer = endpoints[0];
    if (peer) {
      pathLine = `${displayName(model, emission.component)} <-> ${peer.displayName} over ${channel.displayName}`;
    }
  }

  return {
    requirementId,
    text: requirement.text,
    attack: requirement.attack,
    targetNames: requirement.targets.map((t) => displayName(model, t)),
    pathLine,
    entries,
  };
}

// --- deterministic graph layout ---------------------------------------------------

export interface GraphNode {
  id: string;
  label: string;
  kind: string;
  x: number;
  y: number;
}

export interface GraphEdge {
  src: string;
  dst: string;
  kind: string;
}

export interface GraphLayout {
  nodes: GraphNode[];
  edges: GraphEdge[];
  width: number;
  height: number;
}

const KIND_COLUMNS = ["sensor", "actuator", "network", "program", "server", "board", "station"];

function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a |= 0;
    a = (a + 0x6d2b79f5) | 0;
    let t = Math.imul(a ^ (a >>> 15), 1 | a);
    t = (t + Math.imul(t ^ (t >>> 7), 61 | t)) ^ t;
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

/** Column-per-kind layout with a seeded vertical jitter; the same model and
 * seed always produce the same coordinates. */
export function graphLayout(model: CanonicalModel, seed = 1): GraphLayout {
  const rand = mulberry32(seed);
  const columnWidth = 170;
  const rowHeight = 86;
  const byKind = new Map<string, string[]>();
  for (const comp of [...model.components].sort((a, b) => a.id.localeCompare(b.id))) {
    const column = byKind.get(comp.kind) ?? [];
    column.push(comp.id);
    byKind.set(comp.kind, column);
  }
  const kinds = KIND_COLUMNS.filter((k) => byKind.has(k)).concat(
    [...byKind.keys()].filter((k) => !KIND_COLUMNS.includes(k)).sort(),
  );
  const nodes: GraphNode[] = [];
  let maxRows = 0;
  kinds.forEach((kind, columnIndex) => {
    const ids = byKind.get(kind) ?? [];
    maxRows = Math.max(maxRows, ids.length);
    ids.forEach((id, rowIndex) => {
      nodes.push({
        id,
        label: displayName(model, id),
        kind,
        x: 90 + columnIndex * columnWidth + Math.round(rand() * 18),
        y: 60 + rowIndex * rowHeight + Math.round(rand() * 18),
      });
    });
  });
  return {
    nodes,
    edges: model.edges.map((e) => ({ src: e.src, dst: e.dst, kind: e.kind })),
    width: 120 + kinds.length * columnWidth,
    height: 120 + maxRows * rowHeight,
  };
}

/** Attack matches for one component, read out of a report's diagnosis pools
 * (the service computed them; this only collects). */
export function matchedAttacks(report: Report, componentId: string): string[] {
  const attacks = new Set<string>();
  for (const entry of report.ledger) {
    for (const cause of entry.causes) {
      if (cause.component === componentId && cause.attack) {
        attacks.add(cause.attack);
      }
    }
  }
  return [...attacks].sort();
}
