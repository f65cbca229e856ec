"""Attack-type database and matcher.

Decides which attack models apply to a component given its kind, structural
context, exposure, and the attacker capabilities granted by the threat
assumptions. The KB is immutable after load; matching is pure.
"""

from __future__ import annotations

import importlib.resources
from dataclasses import dataclass

from .errors import KbError
from .model import SystemModel
from .properties import ThreatAssumptions

CATEGORIES = frozenset(
    {"sensor-spoofing", "transfer-function-modification", "timing", "physical"}
)
TARGET_SELECTORS = frozenset({"component", "channel", "peer"})
EDGE_PREDICATES = frozenset(
    {
        "communicates-over-network",
        "feeds-concentrator",
        "cohosted-with-management-server",
        "hosts-two-programs",
        "hosts-deadline-program",
        "deadline-endpoint",
        "reads-sensor",
    }
)

# Likelihood multiplier by the most exposed tag a component carries; a
# component with no exposure tags is treated like local-only.
EXPOSURE_FACTORS = {"internet-facing": 1.0, "radio": 0.8, "local-only": 0.4}
DEFAULT_EXPOSURE_FACTOR = 0.4


def exposure_factor(component) -> float:
    if not component.exposure:
        return DEFAULT_EXPOSURE_FACTOR
    return max(EXPOSURE_FACTORS[tag] for tag in component.exposure)


@dataclass(frozen=True)
class ApplicabilityRule:
    required_kind: frozenset[str] = frozenset()
    required_edges: tuple[str, ...] = ()
    required_exposure: frozenset[str] = frozenset()
    requires_deadline: bool = False
    requires_remote_channel: frozenset[str] = frozenset()
    requires_physical_access: bool = False

    def __post_init__(self):
        if not (
            self.required_kind
            or self.required_edges
            or self.required_exposure
            or self.requires_deadline
            or self.requires_remote_channel
            or self.requires_physical_access
        ):
            raise KbError("applicability rule has no requirements")


@dataclass(frozen=True)
class AttackModel:
    id: str
    name: str
    category: str
    applicability: ApplicabilityRule
    base_likelihood: float
    requirement_template: str
    mitigation_effectiveness: float = 1.0
    target_selector: str = "component"
    wan_template: str | None = None

    def __post_init__(self):
        if self.category not in CATEGORIES:
            raise KbError(f"attack {self.id}: category: unknown value {self.category!r}")
        if not 0.0 <= self.base_likelihood <= 1.0:
            raise KbError(f"attack {self.id}: base-likelihood: must be in [0,1]")
        if not 0.0 < self.mitigation_effectiveness <= 1.0:
            raise KbError(f"attack {self.id}: mitigation-effectiveness: must be in (0,1]")
        if self.target_selector not in TARGET_SELECTORS:
            raise KbError(f"attack {self.id}: targets: unknown selector {self.target_selector!r}")


@dataclass(frozen=True)
class AttackMatch:
    attack: str
    component: str
    peers: tuple[tuple[str, str], ...]  # (placeholder, component id)
    rationale: tuple[str, ...]

    def binding(self, placeholder: str) -> str | None:
        for name, component_id in self.peers:
            if name == placeholder:
                return component_id
        return None

    @property
    def target_ids(self) -> tuple[str, ...]:
        # filled in by the matcher via _targets_for; kept simple here
        raise NotImplementedError


class KnowledgeBase:
    def __init__(self, attacks):
        self.attacks = tuple(sorted(attacks, key=lambda a: a.id))
        seen = set()
        for attack in self.attacks:
            if attack.id in seen:
                raise KbError(f"duplicate attack id {attack.id!r}")
            seen.add(attack.id)

    def __iter__(self):
        return iter(self.attacks)

    def __len__(self):
        return len(self.attacks)

    def get(self, attack_id: str) -> AttackModel:
        for attack in self.attacks:
            if attack.id == attack_id:
                return attack
        raise KbError(f"unknown attack {attack_id!r}")


# ---------------------------------------------------------------------------
# KB document parsing

_LIST_KEYS = {"kinds", "edges", "exposure", "remote-channels"}
_BOOL_KEYS = {"requires-deadline", "requires-physical-access"}
_NUM_KEYS = {"base-likelihood", "mitigation-effectiveness"}
_TEXT_KEYS = {"name", "category", "template", "wan-template", "targets"}


def _parse_record(attack_id: str, fields: dict[str, str]) -> AttackModel:
    def field_error(key: str, message: str):
        raise KbError(f"attack {attack_id}: {key}: {message}")

    def split_list(key: str) -> tuple[str, ...]:
        raw = fields.get(key, "")
        return tuple(v.strip() for v in raw.split(",") if v.strip())

    def number(key: str, default: float | None = None) -> float:
        raw = fields.get(key)
        if raw is None:
            if default is None:
                field_error(key, "missing required field")
            return default
        try:
            return float(raw)
        except ValueError:
            field_error(key, f"not a number: {raw!r}")

    def boolean(key: str) -> bool:
        raw = fields.get(key, "false").strip()
        if raw not in ("true", "false"):
            field_error(key, f"must be true or false, got {raw!r}")
        return raw == "true"

    for key in fields:
        if key not in _LIST_KEYS | _BOOL_KEYS | _NUM_KEYS | _TEXT_KEYS:
            field_error(key, "unknown field")
    for required in ("name", "category", "template"):
        if required not in fields:
            field_error(required, "missing required field")

    edges = split_list("edges")
    for predicate in edges:
        if predicate not in EDGE_PREDICATES:
            field_error("edges", f"unknown predicate {predicate!r}")
    rule = ApplicabilityRule(
        required_kind=frozenset(split_list("kinds")),
        required_edges=edges,
        required_exposure=frozenset(split_list("exposure")),
        requires_deadline=boolean("requires-deadline"),
        requires_remote_channel=frozenset(split_list("remote-channels")),
        requires_physical_access=boolean("requires-physical-access"),
    )
    return AttackModel(
        id=attack_id,
        name=fields["name"],
        category=fields["category"],
        applicability=rule,
        base_likelihood=number("base-likelihood"),
        requirement_template=fields["template"],
        mitigation_effectiveness=number("mitigation-effectiveness", 1.0),
        target_selector=fields.get("targets", "component"),
        wan_template=fields.get("wan-template"),
    )


def parse_kb(text: str) -> KnowledgeBase:
    attacks: list[AttackModel] = []
    current_id: str | None = None
    fields: dict[str, str] = {}
    seen: set[str] = set()

    def close():
        nonlocal fields, current_id
        if current_id is not None:
            attacks.append(_parse_record(current_id, fields))
        current_id, fields = None, {}

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith(";;") or line.startswith("#"):
            continue
        if line.startswith("attack "):
            close()
            current_id = line[len("attack "):].strip()
            if not current_id:
                raise KbError(f"line {lineno}: attack record without id")
            if current_id in seen:
                raise KbError(f"duplicate attack id {current_id!r}")
            seen.add(current_id)
            continue
        if current_id is None:
            raise KbError(f"line {lineno}: field outside an attack record")
        key, sep, value = line.partition(":")
        if not sep:
            raise KbError(f"attack {current_id}: line {lineno}: expected `key: value`")
        fields[key.strip()] = value.strip()
    close()
    return KnowledgeBase(attacks)


def load_kb(source: str) -> KnowledgeBase:
    """Load a KB document; the reserved name `builtin` loads the shipped
    catalog."""
    if source == "builtin":
        text = importlib.resources.files("dcrypps.data").joinpath("builtin.kb").read_text("utf-8")
        return parse_kb(text)
    return parse_kb(source)


# ---------------------------------------------------------------------------
# Matching


def _communication_networks(model: SystemModel, component_id: str) -> list[str]:
    return sorted(
        e.dst for e in model.edges
        if e.src == component_id and e.kind == "communicates-over"
    )


def _endpoints(model: SystemModel, network_id: str) -> list[str]:
    return sorted(
        e.src for e in model.edges
        if e.dst == network_id and e.kind == "communicates-over"
    )


def _host_of(model: SystemModel, component_id: str) -> str | None:
    hosts = sorted(
        e.dst for e in model.edges if e.src == component_id and e.kind == "hosted-on"
    )
    return hosts[0] if hosts else None


def _hosted_on(model: SystemModel, host_id: str) -> list:
    return sorted(
        (model.component(e.src) for e in model.edges
         if e.dst == host_id and e.kind == "hosted-on"),
        key=lambda c: c.id,
    )


def _best_peer(model: SystemModel, candidates) -> str | None:
    """Deterministic peer choice: highest importance, then lexicographic id."""
    ranked = sorted(candidates, key=lambda c: (-c.importance, c.id))
    return ranked[0].id if ranked else None


def _template_placeholders(template: str):
    import string

    for _, name, _, _ in string.Formatter().parse(template):
        if name:
            yield name


def _eval_predicate(model: SystemModel, comp, predicate: str):
    """Returns (ok, bindings, rationale-fragment)."""
    if predicate == "communicates-over-network":
        networks = _communication_networks(model, comp.id)
        if not networks:
            return False, {}, None
        channel = networks[0]
        others = [model.component(c) for c in _endpoints(model, channel) if c != comp.id]
        bindings = {"channel": channel}
        peer = _best_peer(model, others)
        if peer:
            bindings["peer"] = peer
        return True, bindings, f"communicates over {channel}"
    if predicate == "feeds-concentrator":
        readers = sorted(
            e.src for e in model.edges
            if e.dst == comp.id and e.kind == "reads-from"
            and model.component(e.src).role == "concentrator"
        )
        if not readers:
            return False, {}, None
        return True, {"peer": readers[0]}, f"feeds concentrator {readers[0]}"
    if predicate == "cohosted-with-management-server":
        host = _host_of(model, comp.id)
        if host is None:
            return False, {}, None
        servers = [
            c for c in _hosted_on(model, host)
            if c.id != comp.id and c.kind == "server" and c.role == "management"
        ]
        peer = _best_peer(model, servers)
        if peer is None:
            return False, {}, None
        return True, {"peer": peer}, f"co-hosted with management server {peer} on {host}"
    if predicate == "hosts-two-programs":
        programs = [c for c in _hosted_on(model, comp.id) if c.kind in ("program", "server")]
        if len(programs) < 2:
            return False, {}, None
        return True, {}, f"hosts {len(programs)} programs"
    if predicate == "hosts-deadline-program":
        programs = [
            c for c in _hosted_on(model, comp.id)
            if c.kind in ("program", "server") and c.deadline_ms is not None
        ]
        peer = _best_peer(model, programs)
        if peer is None:
            return False, {}, None
        return True, {"peer": peer}, f"hosts deadline-bearing program {peer}"
    if predicate == "deadline-endpoint":
        programs = [
            model.component(c) for c in _endpoints(model, comp.id)
            if model.component(c).deadline_ms is not None
        ]
        peer = _best_peer(model, programs)
        if peer is None:
            return False, {}, None
        return True, {"peer": peer}, f"carries deadline-bearing traffic of {peer}"
    if predicate == "reads-sensor":
        sensors = [
            model.component(e.dst) for e in model.edges
            if e.src == comp.id and e.kind == "reads-from"
            and model.component(e.dst).kind == "sensor"
        ]
        peer = _best_peer(model, sensors)
        if peer is None:
            return False, {}, None
        return True, {"peer": peer}, f"reads sensor {peer}"
    raise KbError(f"unknown edge predicate {predicate!r}")


def match_attack(
    model: SystemModel,
    component_id: str,
    attack: AttackModel,
    assumptions: ThreatAssumptions,
) -> AttackMatch | None:
    comp = model.component(component_id)
    rule = attack.applicability
    rationale: list[str] = []

    if rule.required_kind and comp.kind not in rule.required_kind:
        return None
    rationale.append(f"kind {comp.kind}")
    if rule.required_exposure:
        overlap = comp.exposure & rule.required_exposure
        if not overlap:
            return None
        rationale.append("exposure " + ",".join(sorted(overlap)))
    if rule.requires_physical_access and not assumptions.physical_access:
        return None
    if rule.requires_remote_channel:
        channels = assumptions.effective_channels() & rule.requires_remote_channel
        if not channels:
            return None
        rationale.append("remote channel " + ",".join(sorted(channels)))

    bindings: dict[str, str] = {}
    deadline_seen = not rule.requires_deadline
    for predicate in rule.required_edges:
        ok, predicate_bindings, fragment = _eval_predicate(model, comp, predicate)
        if not ok:
            return None
        for key, value in predicate_bindings.items():
            bindings.setdefault(key, value)
        rationale.append(fragment)
        if predicate in ("hosts-deadline-program", "deadline-endpoint"):
            deadline_seen = True
    if not deadline_seen:
        # Rule demands a deadline but names no deadline predicate: require a
        # deadline-bearing program somewhere in the model.
        if not any(c.deadline_ms is not None for c in model.components):
            return None
        deadline_seen = True

    # The match must be fully instantiable: every placeholder the templates
    # use and the target selector's binding have to be resolvable.
    needed = set(_template_placeholders(attack.requirement_template))
    if attack.wan_template:
        needed |= set(_template_placeholders(attack.wan_template))
    needed.discard("component")
    if attack.target_selector in ("channel", "peer"):
        needed.add(attack.target_selector)
    if any(name not in bindings for name in needed):
        return None

    return AttackMatch(
        attack=attack.id,
        component=component_id,
        peers=tuple(sorted(bindings.items())),
        rationale=tuple(rationale),
    )


def applicable_attacks(
    model: SystemModel,
    component_id: str,
    assertion,
    assumptions: ThreatAssumptions,
    kb: KnowledgeBase,
) -> list[AttackMatch]:
    """Every attack model whose applicability rule is satisfied by the
    component and permitted by the threat assumptions, ordered by attack id.

    The assertion parameter is accepted for context symmetry with the
    diagnosis engine; applicability is structural, so it does not vary with
    the particular violated property.
    """
    del assertion
    matches = []
    for attack in kb:
        match = match_attack(model, component_id, attack, assumptions)
        if match is not None:
            matches.append(match)
    return matches


def targets_for(model: SystemModel, attack: AttackModel, match: AttackMatch) -> tuple[str, ...]:
    """Component ids the derived requirement attaches to."""
    if attack.target_selector == "component":
        return (match.component,)
    if attack.target_selector == "channel":
        channel = match.binding("channel")
        if channel is None:
            raise KbError(f"attack {attack.id}: channel target but no channel bound")
        return (channel,)
    peer = match.binding("peer")
    if peer is None:
        raise KbError(f"attack {attack.id}: peer target but no peer bound")
    return (peer,)
