"""Requirement derivation: iterate violation assertions, diagnose, convert
top-ranked cyber causes into requirements, and stop at the risk target.

A derivation is one logical sequential task (suppression state is shared
across assertions by design); independent derivations can run concurrently
on immutable inputs.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field

from .attacks import KnowledgeBase, targets_for
from .diagnosis import DiagnosisResult, diagnose
from .errors import ConfigError, ReportError
from .model import SystemModel, to_canonical
from .properties import (
    Severity,
    ThreatAssumptions,
    ViolationAssertion,
    enumerate_assertions,
    observables_of,
)

REPORT_FORMAT = "dcrypps-report/1"

DEFAULT_RISK_TARGETS = {
    Severity.CATASTROPHIC: 0.001,
    Severity.REDUCED_CAPABILITY: 0.01,
    Severity.ANNOYANCE: 0.05,
}


@dataclass(frozen=True)
class DerivationConfig:
    base_risk_target: dict = field(default_factory=lambda: dict(DEFAULT_RISK_TARGETS))
    mission_hours: float = 10.0
    alpha: float = 0.6
    max_cardinality: int = 2
    max_joint: int = 2
    effectiveness_default: float = 1.0
    seed: int = 0
    candidate_cap: int = 10000

    def __post_init__(self):
        if self.mission_hours <= 0:
            raise ConfigError("mission_hours must be > 0")
        if not 0.0 < self.alpha <= 1.0:
            raise ConfigError("alpha must be in (0, 1]")
        if self.max_cardinality < 1:
            raise ConfigError("max_cardinality must be >= 1")
        if self.max_joint < 1:
            raise ConfigError("max_joint must be >= 1")
        if not 0.0 < self.effectiveness_default <= 1.0:
            raise ConfigError("effectiveness_default must be in (0, 1]")
        targets = self.base_risk_target
        for severity in (Severity.CATASTROPHIC, Severity.REDUCED_CAPABILITY, Severity.ANNOYANCE):
            if severity not in targets:
                raise ConfigError(f"missing risk target for {severity.value}")
            if not 0.0 <= targets[severity] <= 1.0:
                raise ConfigError(f"risk target for {severity.value} out of [0,1]")
        if not (
            targets[Severity.CATASTROPHIC]
            <= targets[Severity.REDUCED_CAPABILITY]
            <= targets[Severity.ANNOYANCE]
        ):
            raise ConfigError("risk targets must be ordered Catastrophic <= ReducedCapability <= Annoyance")


def config_from_overrides(overrides: dict | None) -> DerivationConfig:
    """Build a config from a JSON-style override mapping (partial allowed)."""
    overrides = dict(overrides or {})
    kwargs: dict = {}
    if "base_risk_target" in overrides:
        raw = overrides.pop("base_risk_target")
        if not isinstance(raw, dict):
            raise ConfigError("base_risk_target must be a mapping")
        targets = dict(DEFAULT_RISK_TARGETS)
        for key, value in raw.items():
            targets[Severity.parse(key)] = float(value)
        kwargs["base_risk_target"] = targets
    for key in ("mission_hours", "alpha", "effectiveness_default"):
        if key in overrides:
            kwargs[key] = float(overrides.pop(key))
    for key in ("max_cardinality", "max_joint", "seed", "candidate_cap"):
        if key in overrides:
            value = overrides.pop(key)
            if not float(value).is_integer():
                raise ConfigError(f"{key} must be an integer")
            kwargs[key] = int(value)
    if overrides:
        raise ConfigError(f"unknown config fields: {sorted(overrides)}")
    return DerivationConfig(**kwargs)


def effective_target(severity: Severity, importance: float, config: DerivationConfig) -> float:
    """Acceptable residual risk, weighted by the importance of the function."""
    if importance < 1:
        raise ConfigError("importance must be >= 1")
    return config.base_risk_target[severity] / importance


def residual_risk(causes) -> float:
    """Probability that at least one unmitigated cause is active, assuming
    independence."""
    product = 1.0
    for cause in sorted(causes, key=lambda c: (c.component, c.cause.key)):
        product *= 1.0 - cause.effective_probability
    return 1.0 - product


def render_requirement(attack, match, model: SystemModel) -> str:
    """Instantiate the attack's requirement template with display names."""
    template = attack.requirement_template
    channel_id = match.binding("channel")
    if (
        attack.wan_template
        and channel_id is not None
        and "internet-facing" in model.component(channel_id).exposure
    ):
        template = attack.wan_template
    values = {"component": model.component(match.component).display_name}
    for placeholder in ("peer", "channel"):
        bound = match.binding(placeholder)
        if bound is not None:
            values[placeholder] = model.component(bound).display_name
    try:
        return template.format(**values)
    except KeyError as exc:
        raise ReportError(
            f"attack {attack.id}: unbound template placeholder {{{exc.args[0]}}}"
        ) from None


@dataclass
class CyberRequirement:
    id: str
    attack: str
    targets: tuple[str, ...]
    text: str
    effectiveness: float
    provenance: list = field(default_factory=list)  # of (assertion id, rank)

    @property
    def key(self) -> tuple:
        return (self.attack, self.targets)


@dataclass
class Emission:
    component: str
    attack: str
    requirement: str
    candidate_rank: int
    residual_before: float
    residual_after: float


@dataclass
class AssertionLedger:
    assertion: str
    violated: tuple[str, ...]
    severity: Severity
    importance: float
    effective_target: float
    initial_risk: float
    residual_risk: float
    resolved: bool
    causes: tuple  # final pool snapshot (CauseHypothesis)
    emissions: list[Emission]


@dataclass
class DerivationReport:
    model_name: str
    model_digest: str
    config: DerivationConfig
    requirements: list[CyberRequirement]
    ledger: list[AssertionLedger]
    traces: list[DiagnosisResult]
    unresolved: list[str]
    certificate: dict | None = None


def _assertion_importance(model: SystemModel, assertion: ViolationAssertion) -> float:
    anchors = {
        model.observable(name).anchor for name in observables_of(assertion.expression)
    }
    return max(model.component(a).importance for a in anchors)


def _candidate_rank(result: DiagnosisResult, cause_key) -> int:
    for rank, candidate in enumerate(result.candidates, start=1):
        if any(c.key == cause_key for c in candidate.causes):
            return rank
    return 0


def derive(
    model: SystemModel,
    properties,
    kb: KnowledgeBase,
    assumptions: ThreatAssumptions,
    config: DerivationConfig | None = None,
) -> DerivationReport:
    """Run the full derivation loop over every violation assertion."""
    config = config or DerivationConfig()
    assertions = enumerate_assertions(properties, config.max_joint)

    suppressed: dict[tuple[str, str], float] = {}
    requirement_by_key: dict[tuple, CyberRequirement] = {}
    requirement_by_pair: dict[tuple[str, str], CyberRequirement] = {}
    requirements: list[CyberRequirement] = []
    ledger: list[AssertionLedger] = []
    traces: list[DiagnosisResult] = []
    unresolved: list[str] = []

    for assertion in assertions:
        incoming_suppressed = set(suppressed)
        result = diagnose(model, assertion, kb, assumptions, config, suppressed)
        importance = _assertion_importance(model, assertion)
        target = effective_target(assertion.severity, importance, config)

        pool = list(result.pool)
        initial = residual_risk(pool)
        residual = initial
        emissions: list[Emission] = []

        while residual > target:
            open_cyber = [
                c for c in pool if c.is_cyber and not c.mitigated
            ]
            if not open_cyber:
                break
            top = min(
                open_cyber,
                key=lambda c: (-c.adjusted_probability, c.component, c.cause.key),
            )
            attack = kb.get(top.cause.attack)
            effectiveness = attack.mitigation_effectiveness
            targets = tuple(sorted(targets_for(model, attack, top.match)))
            key = (attack.id, targets)
            rank = _candidate_rank(result, top.key)
            requirement = requirement_by_key.get(key)
            if requirement is None:
                requirement = CyberRequirement(
                    id=f"REQ-{len(requirements) + 1}",
                    attack=attack.id,
                    targets=targets,
                    text=render_requirement(attack, top.match, model),
                    effectiveness=effectiveness,
                )
                requirements.append(requirement)
                requirement_by_key[key] = requirement
            requirement.provenance.append((assertion.id, rank))
            requirement_by_pair[top.key] = requirement
            suppressed[top.key] = effectiveness

            before = residual
            pool = [
                dataclasses.replace(c, mitigated=True, effectiveness=effectiveness)
                if c.key == top.key
                else c
                for c in pool
            ]
            residual = residual_risk(pool)
            emissions.append(
                Emission(
                    component=top.component,
                    attack=attack.id,
                    requirement=requirement.id,
                    candidate_rank=rank,
                    residual_before=before,
                    residual_after=residual,
                )
            )

        # A previously mitigated cause showing up again is recorded as extra
        # provenance on its requirement instead of a new emission.
        for cause in pool:
            if cause.key in incoming_suppressed and cause.key in requirement_by_pair:
                requirement_by_pair[cause.key].provenance.append((assertion.id, 0))

        resolved = residual <= target
        if not resolved:
            unresolved.append(assertion.id)
        ledger.append(
            AssertionLedger(
                assertion=assertion.id,
                violated=assertion.violated,
                severity=assertion.severity,
                importance=importance,
                effective_target=target,
                initial_risk=initial,
                residual_risk=residual,
                resolved=resolved,
                causes=tuple(pool),
                emissions=emissions,
            )
        )
        traces.append(result)

    return DerivationReport(
        model_name=model.name,
        model_digest=model.digest(),
        config=config,
        requirements=requirements,
        ledger=ledger,
        traces=traces,
        unresolved=unresolved,
    )


# ---------------------------------------------------------------------------
# Report serialization (stable field order for golden-file tests)


def _config_dict(config: DerivationConfig) -> dict:
    return {
        "base_risk_target": {
            severity.value: config.base_risk_target[severity]
            for severity in (
                Severity.CATASTROPHIC,
                Severity.REDUCED_CAPABILITY,
                Severity.ANNOYANCE,
            )
        },
        "mission_hours": config.mission_hours,
        "alpha": config.alpha,
        "max_cardinality": config.max_cardinality,
        "max_joint": config.max_joint,
        "effectiveness_default": config.effectiveness_default,
        "seed": config.seed,
        "candidate_cap": config.candidate_cap,
    }


def _cause_dict(cause) -> dict:
    return {
        "component": cause.component,
        "kind": cause.cause.kind,
        "attack": cause.cause.attack,
        "base": cause.base_probability,
        "distance": cause.distance,
        "adjusted": cause.adjusted_probability,
        "mitigated": cause.mitigated,
        "effectiveness": cause.effectiveness,
    }


def report_to_dict(report: DerivationReport) -> dict:
    return {
        "format": REPORT_FORMAT,
        "model_name": report.model_name,
        "model_digest": report.model_digest,
        "config": _config_dict(report.config),
        "requirements": [
            {
                "id": req.id,
                "attack": req.attack,
                "targets": list(req.targets),
                "text": req.text,
                "effectiveness": req.effectiveness,
                "provenance": [
                    {"assertion": assertion, "rank": rank}
                    for assertion, rank in req.provenance
                ],
            }
            for req in report.requirements
        ],
        "ledger": [
            {
                "assertion": entry.assertion,
                "violated": list(entry.violated),
                "severity": entry.severity.value,
                "importance": entry.importance,
                "effective_target": entry.effective_target,
                "initial_risk": entry.initial_risk,
                "residual_risk": entry.residual_risk,
                "resolved": entry.resolved,
                "causes": [_cause_dict(c) for c in entry.causes],
                "emissions": [
                    {
                        "component": e.component,
                        "attack": e.attack,
                        "requirement": e.requirement,
                        "candidate_rank": e.candidate_rank,
                        "residual_before": e.residual_before,
                        "residual_after": e.residual_after,
                    }
                    for e in entry.emissions
                ],
            }
            for entry in report.ledger
        ],
        "unresolved": list(report.unresolved),
        "traces": [
            {
                "assertion": trace.assertion.id,
                "conflicts": [
                    {
                        "property": conflict.property_id,
                        "components": sorted(conflict.components),
                    }
                    for conflict in trace.conflicts
                ],
                "support": [
                    {"component": comp, "distance": dist} for comp, dist in trace.support
                ],
                "truncated": trace.truncated,
                "candidates": [
                    {
                        "probability": candidate.probability,
                        "cardinality": candidate.cardinality,
                        "causes": [
                            {
                                "component": cause.component,
                                "kind": cause.cause.kind,
                                "attack": cause.cause.attack,
                                "probability": cause.effective_probability,
                            }
                            for cause in candidate.causes
                        ],
                    }
                    for candidate in trace.candidates
                ],
            }
            for trace in report.traces
        ],
        "certificate": report.certificate,
    }


def serialize_report(report) -> str:
    """Deterministic JSON serialization; identical inputs yield identical
    bytes. Accepts a DerivationReport or an already-built report dict."""
    data = report if isinstance(report, dict) else report_to_dict(report)
    return json.dumps(data, indent=2, ensure_ascii=False) + "\n"


def parse_report(text: str) -> dict:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ReportError(f"not a report document: {exc}") from None
    if not isinstance(data, dict) or data.get("format") != REPORT_FORMAT:
        raise ReportError("not a report document: bad format marker")
    return data


# ---------------------------------------------------------------------------
# Report comparison (the designer what-if loop)


def diff_reports(a: dict, b: dict) -> dict:
    """Compare two reports over the same model: requirement additions,
    removals, changes, and per-assertion residual deltas."""
    if a.get("model_digest") != b.get("model_digest"):
        raise ReportError("cannot diff reports for different models")

    def by_key(report: dict) -> dict:
        return {
            (req["attack"], tuple(req["targets"])): req
            for req in report["requirements"]
        }

    before, after = by_key(a), by_key(b)
    added = [after[k] for k in sorted(after.keys() - before.keys())]
    removed = [before[k] for k in sorted(before.keys() - after.keys())]
    changed = []
    for key in sorted(before.keys() & after.keys()):
        old, new = before[key], after[key]
        if old["text"] != new["text"] or old["effectiveness"] != new["effectiveness"]:
            changed.append({"attack": key[0], "targets": list(key[1]), "before": old, "after": new})

    residuals_a = {entry["assertion"]: entry["residual_risk"] for entry in a["ledger"]}
    residuals_b = {entry["assertion"]: entry["residual_risk"] for entry in b["ledger"]}
    deltas = []
    for assertion in sorted(residuals_a.keys() | residuals_b.keys()):
        before_val = residuals_a.get(assertion)
        after_val = residuals_b.get(assertion)
        if before_val != after_val:
            deltas.append({"assertion": assertion, "before": before_val, "after": after_val})
    return {
        "added": added,
        "removed": removed,
        "changed": changed,
        "residual_deltas": deltas,
    }
