/** Thin DOM builders over the view models. */

import type { Report } from "./api.js";
import type { CanonicalModel } from "./canonical.js";
import {
  DiffRow,
  Gauges,
  GraphLayout,
  ProvenanceNarrative,
  ResidualBar,
  matchedAttacks,
} from "./viewmodel.js";

const SVG_NS = "http://www.w3.org/2000/svg";

export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function renderGraph(
  layout: GraphLayout,
  onSelect: (componentId: string) => void,
): SVGSVGElement {
  const svg = document.createElementNS(SVG_NS, "svg");
  svg.setAttribute("viewBox", `0 0 ${layout.width} ${layout.height}`);
  svg.classList.add("model-graph");
  const positions = new Map(layout.nodes.map((n) => [n.id, n]));
  for (const edge of layout.edges) {
    const a = positions.get(edge.src);
    const b = positions.get(edge.dst);
    if (!a || !b) continue;
    const line = document.createElementNS(SVG_NS, "line");
    line.setAttribute("x1", String(a.x));
    line.setAttribute("y1", String(a.y));
    line.setAttribute("x2", String(b.x));
    line.setAttribute("y2", String(b.y));
    line.classList.add("edge", `edge-${edge.kind}`);
    svg.appendChild(line);
  }
  for (const node of layout.nodes) {
    const group = document.createElementNS(SVG_NS, "g");
    group.classList.add("node", `kind-${node.kind}`);
    group.setAttribute("transform", `translate(${node.x}, ${node.y})`);
    group.addEventListener("click", () => onSelect(node.id));
    const circle = document.createElementNS(SVG_NS, "circle");
    circle.setAttribute("r", "17");
    const label = document.createElementNS(SVG_NS, "text");
    label.setAttribute("y", "34");
    label.textContent = node.label;
    const kind = document.createElementNS(SVG_NS, "text");
    kind.setAttribute("y", "4");
    kind.classList.add("kind-letter");
    kind.textContent = node.kind[0]?.toUpperCase() ?? "?";
    group.append(circle, kind, label);
    svg.appendChild(group);
  }
  return svg;
}

export function renderComponentDetails(
  model: CanonicalModel,
  report: Report | null,
  componentId: string,
): HTMLElement {
  const comp = model.components.find((c) => c.id === componentId);
  const panel = el("div", "component-details");
  if (!comp) {
    panel.appendChild(el("p", "error-banner", `unknown component ${componentId}`));
    return panel;
  }
  panel.appendChild(el("h3", undefined, `${comp.displayName} (${comp.id})`));
  const list = el("dl");
  const push = (key: string, value: string) => {
    list.appendChild(el("dt", undefined, key));
    list.appendChild(el("dd", undefined, value));
  };
  push("class", comp.cls);
  push("kind", comp.kind);
  push("importance", String(comp.importance));
  for (const [key, value] of Object.entries(comp.attrs)) {
    if (["class", "kind", "importance", "display-name"].includes(key)) continue;
    push(key, String(value));
  }
  panel.appendChild(list);
  const attacks = report ? matchedAttacks(report, componentId) : [];
  panel.appendChild(el("h4", undefined, "matched attacks"));
  if (attacks.length === 0) {
    panel.appendChild(el("p", "muted", report ? "none" : "derive a baseline to see matches"));
  } else {
    const ul = el("ul", "attack-list");
    for (const attack of attacks) ul.appendChild(el("li", undefined, attack));
    panel.appendChild(ul);
  }
  return panel;
}

export function renderDiffTable(rows: DiffRow[], onSelect: (reqId: string) => void): HTMLElement {
  const table = el("table", "requirement-table");
  const head = el("tr");
  for (const title of ["", "id", "attack", "targets", "requirement"]) {
    head.appendChild(el("th", undefined, title));
  }
  table.appendChild(head);
  for (const row of rows) {
    const tr = el("tr", `row-${row.status}`);
    tr.appendChild(el("td", "status-cell", row.status === "unchanged" ? "" : row.status));
    const idCell = el("td", "req-id", row.id);
    idCell.addEventListener("click", () => onSelect(row.id));
    tr.appendChild(idCell);
    tr.appendChild(el("td", undefined, row.attack));
    tr.appendChild(el("td", undefined, row.targets.join(", ")));
    tr.appendChild(el("td", "req-text", row.text));
    table.appendChild(tr);
  }
  return table;
}

export function renderResidualBars(bars: ResidualBar[]): HTMLElement {
  const wrap = el("div", "residual-bars");
  for (const bar of bars) {
    const row = el("div", "residual-row");
    row.appendChild(
      el("span", "residual-label", `${bar.assertion} (${bar.severity})`),
    );
    const track = el("div", "bar-track");
    const fill = el("div", bar.overTarget ? "bar-fill over" : "bar-fill");
    fill.style.width = `${Math.min(bar.ratio, 1) * 100}%`;
    track.appendChild(fill);
    const marker = el("div", "bar-target");
    track.appendChild(marker);
    row.appendChild(track);
    row.appendChild(
      el(
        "span",
        "residual-numbers",
        `${bar.residual.toExponential(2)} / ${bar.target.toExponential(2)}`,
      ),
    );
    wrap.appendChild(row);
  }
  return wrap;
}

export function renderGauges(values: Gauges | null): HTMLElement {
  const wrap = el("div", "gauges");
  if (!values) {
    wrap.appendChild(el("p", "muted", "no certificate"));
    return wrap;
  }
  const make = (label: string, value: number, good: boolean) => {
    const gauge = el("div", good ? "gauge good" : "gauge bad");
    gauge.appendChild(el("div", "gauge-value", value.toFixed(4)));
    gauge.appendChild(el("div", "gauge-label", label));
    return gauge;
  };
  wrap.appendChild(make("Ps", values.ps, values.meets));
  wrap.appendChild(make("required", values.requiredPs, true));
  wrap.appendChild(make("confidence", values.confidence, values.confidence > 0.5));
  return wrap;
}

export function renderProvenance(narrative: ProvenanceNarrative): HTMLElement {
  const drawer = el("div", "provenance-drawer");
  drawer.appendChild(el("h3", undefined, `${narrative.requirementId}: ${narrative.attack}`));
  drawer.appendChild(el("p", "req-text", narrative.text));
  drawer.appendChild(
    el("p", undefined, `attached to: ${narrative.targetNames.join(", ")}`),
  );
  if (narrative.pathLine) {
    drawer.appendChild(el("p", "path-line", narrative.pathLine));
  }
  const list = el("ul", "provenance-entries");
  for (const entry of narrative.entries) {
    const violated = entry.violated.join(", ");
    const text =
      entry.kind === "emission"
        ? `violation of ${violated}: matched at candidate rank ${entry.candidateRank}` +
          (entry.residualBefore !== undefined
            ? `, residual ${entry.residualBefore.toExponential(2)} -> ${entry.residualAfter?.toExponential(2)}`
            : "")
        : `violation of ${violated}: already covered by this requirement`;
    list.appendChild(el("li", `prov-${entry.kind}`, text));
  }
  drawer.appendChild(list);
  return drawer;
}

export function renderIssues(issues: { code: string; detail: string }[]): HTMLElement {
  const banner = el("div", "error-banner");
  for (const issue of issues) {
    banner.appendChild(el("p", undefined, `${issue.code}: ${issue.detail}`));
  }
  return banner;
}
