/** Reader for the canonical model text the service stores and returns. */

export interface CanonicalComponent {
  id: string;
  cls: string;
  kind: string;
  importance: number;
  displayName: string;
  attrs: Record<string, string | number | boolean>;
}

export interface CanonicalEdge {
  src: string;
  kind: string;
  dst: string;
}

export interface CanonicalObservable {
  name: string;
  anchor: string;
  inputs: string[];
}

export interface CanonicalModel {
  name: string;
  components: CanonicalComponent[];
  edges: CanonicalEdge[];
  observables: CanonicalObservable[];
}

function splitFields(rest: string): string[] {
  const out: string[] = [];
  let buf = "";
  let inString = false;
  for (const ch of rest) {
    if (ch === '"') {
      inString = !inString;
      buf += ch;
    } else if (ch === " " && !inString) {
      if (buf) out.push(buf);
      buf = "";
    } else {
      buf += ch;
    }
  }
  if (buf) out.push(buf);
  return out;
}

function parseValue(raw: string): string | number | boolean {
  if (raw.startsWith('"') && raw.endsWith('"')) {
    return raw.slice(1, -1).replace(/\\"/g, '"').replace(/\\\\/g, "\\");
  }
  if (raw === "true") return true;
  if (raw === "false") return false;
  const num = Number(raw);
  return Number.isNaN(num) ? raw : num;
}

export function parseCanonicalModel(text: string): CanonicalModel {
  const lines = text.split("\n");
  if (lines[0]?.trim() !== "dcrypps-model v1") {
    throw new Error("not a canonical model document");
  }
  const model: CanonicalModel = { name: "model", components: [], edges: [], observables: [] };
  for (const raw of lines.slice(1)) {
    const line = raw.trim();
    if (!line) continue;
    const space = line.indexOf(" ");
    const word = space < 0 ? line : line.slice(0, space);
    const rest = space < 0 ? "" : line.slice(space + 1);
    if (word === "name") {
      model.name = rest.trim();
    } else if (word === "component") {
      const tokens = splitFields(rest);
      const id = tokens[0] ?? "";
      const attrs: Record<string, string | number | boolean> = {};
      for (const token of tokens.slice(1)) {
        const eq = token.indexOf("=");
        attrs[token.slice(0, eq)] = parseValue(token.slice(eq + 1));
      }
      const displayName = attrs["display-name"];
      model.components.push({
        id,
        cls: String(attrs["class"] ?? id),
        kind: String(attrs["kind"] ?? "program"),
        importance: Number(attrs["importance"] ?? 1),
        displayName: typeof displayName === "string" ? displayName : id,
        attrs,
      });
    } else if (word === "observable") {
      const tokens = splitFields(rest);
      const name = tokens[0] ?? "";
      let anchor = "";
      let inputs: string[] = [];
      for (const token of tokens.slice(1)) {
        const eq = token.indexOf("=");
        const key = token.slice(0, eq);
        const value = token.slice(eq + 1);
        if (key === "anchor") anchor = value;
        if (key === "inputs") inputs = value.split(",");
      }
      model.observables.push({ name, anchor, inputs });
    } else if (word === "edge") {
      const [src, kind, dst] = rest.split(" ");
      if (src && kind && dst) model.edges.push({ src, kind, dst });
    }
  }
  return model;
}

export function displayName(model: CanonicalModel, componentId: string): string {
  return model.components.find((c) => c.id === componentId)?.displayName ?? componentId;
}
