"""System model: components, dependency edges, observables, and graph queries.

The model is immutable after construction; every query here is read-only and
safe to call concurrently.
"""

from __future__ import annotations

import hashlib
from collections import deque
from dataclasses import dataclass, field

from .errors import ModelError, ParseError

COMPONENT_KINDS = frozenset(
    {"sensor", "actuator", "program", "board", "network", "server", "station"}
)
EDGE_KINDS = frozenset(
    {"hosted-on", "communicates-over", "reads-from", "controls", "shares-resource"}
)
EXPOSURE_TAGS = frozenset({"internet-facing", "radio", "local-only"})

# Kinds whose instances actively use a network/shared medium they are handed.
ENDPOINT_KINDS = frozenset({"sensor", "actuator", "program", "server", "station"})

AttrValue = "str | float | bool"


@dataclass(frozen=True)
class ComponentInstance:
    """One concrete component of the design under analysis."""

    id: str
    cls: str
    kind: str
    mtbf_hours: float | None = None
    defect_rate: float | None = None
    exposure: frozenset[str] = frozenset()
    importance: float = 1.0
    attrs: tuple[tuple[str, str | float | bool], ...] = ()

    def __post_init__(self):
        if self.kind not in COMPONENT_KINDS:
            raise ModelError(f"component {self.id}: unknown kind {self.kind!r}")
        if self.mtbf_hours is not None and not self.mtbf_hours > 0:
            raise ModelError(f"component {self.id}: mtbf-hours must be > 0")
        if self.defect_rate is not None and not 0.0 <= self.defect_rate <= 1.0:
            raise ModelError(f"component {self.id}: defect-rate must be in [0,1]")
        if not self.importance >= 1.0:
            raise ModelError(f"component {self.id}: importance must be >= 1")
        bad = self.exposure - EXPOSURE_TAGS
        if bad:
            raise ModelError(f"component {self.id}: unknown exposure tags {sorted(bad)}")

    def attr(self, name: str, default=None):
        for key, value in self.attrs:
            if key == name:
                return value
        return default

    @property
    def display_name(self) -> str:
        value = self.attr("display-name")
        return value if isinstance(value, str) else self.id

    @property
    def deadline_ms(self) -> float | None:
        value = self.attr("deadline-ms")
        return float(value) if isinstance(value, (int, float)) else None

    @property
    def role(self) -> str | None:
        value = self.attr("role")
        return value if isinstance(value, str) else None


@dataclass(frozen=True)
class DependencyEdge:
    """Directed structural relation between two components.

    Conventions: src hosted-on dst, src communicates-over dst (a network),
    src reads-from dst (the data source), src controls dst.
    """

    src: str
    kind: str
    dst: str

    def __post_init__(self):
        if self.kind not in EDGE_KINDS:
            raise ModelError(f"edge {self.src}->{self.dst}: unknown kind {self.kind!r}")
        if self.kind in ("communicates-over", "reads-from") and self.src == self.dst:
            raise ModelError(f"edge {self.src}: {self.kind} must not be a self-loop")


@dataclass(frozen=True)
class Observable:
    """A value some component maintains, referenced by properties."""

    name: str
    anchor: str
    inputs: frozenset[str] = frozenset()


@dataclass(frozen=True)
class SystemModel:
    name: str = "model"
    components: tuple[ComponentInstance, ...] = ()
    edges: frozenset[DependencyEdge] = frozenset()
    observables: tuple[Observable, ...] = ()
    # Field path -> instance, kept for lvar aliasing checks; not part of equality.
    bindings: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        ids = [c.id for c in self.components]
        if len(ids) != len(set(ids)):
            dupes = sorted({i for i in ids if ids.count(i) > 1})
            raise ModelError(f"duplicate component ids: {dupes}")
        known = set(ids)
        for edge in self.edges:
            for end in (edge.src, edge.dst):
                if end not in known:
                    raise ModelError(f"edge endpoint {end!r} is not a component")
        names = [o.name for o in self.observables]
        if len(names) != len(set(names)):
            raise ModelError("duplicate observable names")
        for obs in self.observables:
            if obs.anchor not in known:
                raise ModelError(f"observable {obs.name}: unknown anchor {obs.anchor!r}")
            for ref in obs.inputs:
                if ref not in known and ref not in names:
                    raise ModelError(f"observable {obs.name}: unresolved input {ref!r}")

    def component(self, component_id: str) -> ComponentInstance:
        for comp in self.components:
            if comp.id == component_id:
                return comp
        raise ModelError(f"unknown component {component_id!r}")

    def observable(self, name: str) -> Observable:
        for obs in self.observables:
            if obs.name == name:
                return obs
        raise ModelError(f"unknown observable {name!r}")

    def has_component(self, component_id: str) -> bool:
        return any(c.id == component_id for c in self.components)

    def with_observables(self, observables) -> "SystemModel":
        return SystemModel(
            name=self.name,
            components=self.components,
            edges=self.edges,
            observables=tuple(observables),
            bindings=self.bindings,
        )

    def digest(self) -> str:
        return hashlib.sha256(to_canonical(self).encode("utf-8")).hexdigest()[:16]


def _traversal_neighbors(model: SystemModel) -> dict[str, set[str]]:
    """Adjacency used for support-set search.

    hosted-on, communicates-over and shares-resource are walked in both
    directions; reads-from only from the reader to its source; controls only
    from the controlled component back to its controller.
    """
    adjacency: dict[str, set[str]] = {c.id: set() for c in model.components}
    for edge in model.edges:
        if edge.kind in ("hosted-on", "communicates-over", "shares-resource"):
            adjacency[edge.src].add(edge.dst)
            adjacency[edge.dst].add(edge.src)
        elif edge.kind == "reads-from":
            adjacency[edge.src].add(edge.dst)
        elif edge.kind == "controls":
            adjacency[edge.dst].add(edge.src)
    return adjacency


def distances_from(model: SystemModel, anchors) -> dict[str, int]:
    """Minimum hop count from any anchor to every reachable component."""
    anchors = list(anchors)
    for anchor in anchors:
        if not model.has_component(anchor):
            raise ModelError(f"unknown anchor component {anchor!r}")
    adjacency = _traversal_neighbors(model)
    dist: dict[str, int] = {a: 0 for a in anchors}
    queue = deque(anchors)
    while queue:
        current = queue.popleft()
        for neighbor in adjacency[current]:
            if neighbor not in dist:
                dist[neighbor] = dist[current] + 1
                queue.append(neighbor)
    return dist


def support_distances(model: SystemModel, observable_names) -> dict[str, int]:
    """Distance map for the components that could contribute to a violation
    of properties over the named observables."""
    anchors = sorted({model.observable(name).anchor for name in observable_names})
    if not anchors:
        raise ModelError("no observables referenced")
    return distances_from(model, anchors)


# ---------------------------------------------------------------------------
# Canonical model format


def _format_number(value: float) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if float(value).is_integer():
        return str(int(value))
    return repr(float(value))


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def to_canonical(model: SystemModel) -> str:
    """Deterministic, order-stable serialization of a model.

    Components sorted by id, observables by name, edges by (src, kind, dst);
    parsing the output and re-serializing yields identical bytes.
    """
    lines = ["dcrypps-model v1", f"name {model.name}"]
    for comp in sorted(model.components, key=lambda c: c.id):
        parts = [f"component {comp.id}", f"class={comp.cls}", f"kind={comp.kind}"]
        parts.append(f"importance={_format_number(comp.importance)}")
        if comp.mtbf_hours is not None:
            parts.append(f"mtbf-hours={_format_number(comp.mtbf_hours)}")
        if comp.defect_rate is not None:
            parts.append(f"defect-rate={_format_number(comp.defect_rate)}")
        if comp.exposure:
            parts.append("exposure=" + ",".join(sorted(comp.exposure)))
        for key, value in sorted(comp.attrs):
            if isinstance(value, str):
                parts.append(f"{key}={_quote(value)}")
            else:
                parts.append(f"{key}={_format_number(value)}")
        lines.append(" ".join(parts))
    for obs in sorted(model.observables, key=lambda o: o.name):
        line = f"observable {obs.name} anchor={obs.anchor}"
        if obs.inputs:
            line += " inputs=" + ",".join(sorted(obs.inputs))
        lines.append(line)
    for edge in sorted(model.edges, key=lambda e: (e.src, e.kind, e.dst)):
        lines.append(f"edge {edge.src} {edge.kind} {edge.dst}")
    return "\n".join(lines) + "\n"


def _parse_value(raw: str):
    if raw.startswith('"'):
        if not raw.endswith('"') or len(raw) < 2:
            raise ParseError(f"unterminated string {raw!r}")
        return raw[1:-1].replace('\\"', '"').replace("\\\\", "\\")
    if raw in ("true", "false"):
        return raw == "true"
    try:
        return float(raw)
    except ValueError:
        return raw


def _split_fields(rest: str) -> list[str]:
    """Split `a=1 b="x y"` style tails, honoring quotes."""
    out, buf, in_str = [], [], False
    for ch in rest:
        if ch == '"':
            in_str = not in_str
            buf.append(ch)
        elif ch == " " and not in_str:
            if buf:
                out.append("".join(buf))
                buf = []
        else:
            buf.append(ch)
    if buf:
        out.append("".join(buf))
    return out


def from_canonical(text: str) -> SystemModel:
    """Parse the canonical model format back into a SystemModel."""
    lines = text.splitlines()
    if not lines or lines[0].strip() != "dcrypps-model v1":
        raise ParseError("missing canonical model header", line=1, column=1)
    name = "model"
    components: list[ComponentInstance] = []
    observables: list[Observable] = []
    edges: set[DependencyEdge] = set()
    for lineno, raw in enumerate(lines[1:], start=2):
        line = raw.strip()
        if not line:
            continue
        word, _, rest = line.partition(" ")
        if word == "name":
            name = rest.strip()
        elif word == "component":
            tokens = _split_fields(rest)
            if not tokens:
                raise ParseError("component line without id", line=lineno, column=1)
            comp_id = tokens[0]
            kwargs: dict = {"id": comp_id, "cls": comp_id, "kind": "program"}
            attrs = []
            for token in tokens[1:]:
                key, _, value = token.partition("=")
                parsed = _parse_value(value)
                if key == "class":
                    kwargs["cls"] = str(parsed)
                elif key == "kind":
                    kwargs["kind"] = str(parsed)
                elif key == "importance":
                    kwargs["importance"] = float(parsed)
                elif key == "mtbf-hours":
                    kwargs["mtbf_hours"] = float(parsed)
                elif key == "defect-rate":
                    kwargs["defect_rate"] = float(parsed)
                elif key == "exposure":
                    kwargs["exposure"] = frozenset(str(parsed).split(","))
                else:
                    attrs.append((key, parsed))
            kwargs["attrs"] = tuple(sorted(attrs))
            components.append(ComponentInstance(**kwargs))
        elif word == "observable":
            tokens = _split_fields(rest)
            obs_name = tokens[0]
            anchor = ""
            inputs: frozenset[str] = frozenset()
            for token in tokens[1:]:
                key, _, value = token.partition("=")
                if key == "anchor":
                    anchor = value
                elif key == "inputs":
                    inputs = frozenset(value.split(","))
            observables.append(Observable(name=obs_name, anchor=anchor, inputs=inputs))
        elif word == "edge":
            tokens = rest.split()
            if len(tokens) != 3:
                raise ParseError("edge line must be `edge SRC KIND DST`", line=lineno, column=1)
            edges.add(DependencyEdge(src=tokens[0], kind=tokens[1], dst=tokens[2]))
        else:
            raise ParseError(f"unknown canonical record {word!r}", line=lineno, column=1)
    return SystemModel(
        name=name,
        components=tuple(sorted(components, key=lambda c: c.id)),
        edges=frozenset(edges),
        observables=tuple(sorted(observables, key=lambda o: o.name)),
    )
