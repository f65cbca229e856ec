"""Reverse diagnosis: fault candidates for asserted violations.

Conflicts are structural (dependency-reachability support sets rather than
value propagation); candidates are minimal hitting sets decorated with cause
hypotheses and ranked by probability. Everything here is pure, so distinct
assertions can be diagnosed concurrently.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

from .attacks import AttackMatch, KnowledgeBase, applicable_attacks, exposure_factor
from .errors import ConfigError, ModelError
from .model import ComponentInstance, SystemModel
from .properties import ThreatAssumptions, ViolationAssertion, member_support

HARDWARE = "hardware-failure"
SOFTWARE = "software-bug"
CYBER = "cyber-attack"


@dataclass(frozen=True)
class CauseKind:
    kind: str  # cyber-attack | hardware-failure | software-bug
    attack: str | None = None

    def __post_init__(self):
        if self.kind not in (CYBER, HARDWARE, SOFTWARE):
            raise ModelError(f"unknown cause kind {self.kind!r}")
        if self.kind == CYBER and not self.attack:
            raise ModelError("cyber-attack cause needs an attack id")

    @property
    def key(self) -> str:
        return self.attack if self.kind == CYBER else self.kind


@dataclass(frozen=True)
class CauseHypothesis:
    component: str
    cause: CauseKind
    base_probability: float
    distance: int
    adjusted_probability: float
    mitigated: bool = False
    effectiveness: float = 0.0  # of the mitigation already applied, if any
    match: AttackMatch | None = None

    @property
    def is_cyber(self) -> bool:
        return self.cause.kind == CYBER

    @property
    def effective_probability(self) -> float:
        if not self.mitigated:
            return self.adjusted_probability
        return self.adjusted_probability * (1.0 - self.effectiveness)

    @property
    def key(self) -> tuple[str, str]:
        return (self.component, self.cause.key)


@dataclass(frozen=True)
class Candidate:
    causes: tuple[CauseHypothesis, ...]
    probability: float

    @property
    def cardinality(self) -> int:
        return len(self.causes)

    @property
    def components(self) -> tuple[str, ...]:
        return tuple(sorted(c.component for c in self.causes))


@dataclass(frozen=True)
class Conflict:
    property_id: str
    components: frozenset[str]


@dataclass(frozen=True)
class DiagnosisResult:
    assertion: ViolationAssertion
    candidates: tuple[Candidate, ...]
    conflicts: tuple[Conflict, ...]
    support: tuple[tuple[str, int], ...]  # (component, distance), merged
    pool: tuple[CauseHypothesis, ...]  # every hypothesis over hitting-set members
    truncated: bool = False


def cause_probability(
    component: ComponentInstance,
    cause: CauseKind,
    mission_hours: float,
    attack=None,
) -> float:
    """Base probability of a cause being active over the mission duration."""
    if mission_hours <= 0:
        raise ConfigError("mission_hours must be > 0")
    if cause.kind == HARDWARE:
        if component.mtbf_hours is None:
            raise ModelError(f"component {component.id}: no mtbf-hours for hardware cause")
        return 1.0 - math.exp(-mission_hours / component.mtbf_hours)
    if cause.kind == SOFTWARE:
        if component.defect_rate is None:
            raise ModelError(f"component {component.id}: no defect-rate for software cause")
        return component.defect_rate
    if attack is None:
        raise ModelError("cyber cause needs its attack model")
    return attack.base_likelihood * exposure_factor(component)


def adjust_for_distance(base: float, distance: int, alpha: float) -> float:
    """Down-weight a cause by its hop count from the violated observable."""
    if not 0.0 < alpha <= 1.0:
        raise ConfigError("alpha must be in (0, 1]")
    if distance < 0:
        raise ConfigError("distance must be >= 0")
    return base * alpha**distance


def conflicts_for(model: SystemModel, assertion: ViolationAssertion) -> tuple[Conflict, ...]:
    """One structural conflict per violated property: the support set of the
    property's observables."""
    out = []
    for prop_id, dist in member_support(model, assertion).items():
        if not dist:
            raise ModelError(f"assertion {assertion.id}: empty support set for {prop_id}")
        out.append(Conflict(property_id=prop_id, components=frozenset(dist)))
    return tuple(out)


def minimal_hitting_sets(conflicts, max_cardinality: int) -> set[frozenset[str]]:
    """All inclusion-minimal component sets of size <= max_cardinality that
    intersect every conflict."""
    if max_cardinality < 1:
        raise ConfigError("max_cardinality must be >= 1")
    conflict_sets = [frozenset(c) for c in conflicts]
    if not conflict_sets:
        return {frozenset()}
    universe = sorted(set().union(*conflict_sets))
    found: set[frozenset[str]] = set()
    for size in range(1, max_cardinality + 1):
        for combo in itertools.combinations(universe, size):
            candidate = frozenset(combo)
            if any(prior <= candidate for prior in found):
                continue
            if all(candidate & conflict for conflict in conflict_sets):
                found.add(candidate)
    return found


def _causes_for_component(
    model: SystemModel,
    comp: ComponentInstance,
    distance: int,
    assertion: ViolationAssertion,
    kb: KnowledgeBase,
    assumptions: ThreatAssumptions,
    config,
    suppressed,
) -> list[CauseHypothesis]:
    causes: list[CauseHypothesis] = []

    def add(cause: CauseKind, base: float, match=None):
        mitigation = suppressed.get((comp.id, cause.key))
        causes.append(
            CauseHypothesis(
                component=comp.id,
                cause=cause,
                base_probability=base,
                distance=distance,
                adjusted_probability=adjust_for_distance(base, distance, config.alpha),
                mitigated=mitigation is not None,
                effectiveness=mitigation if mitigation is not None else 0.0,
                match=match,
            )
        )

    if comp.mtbf_hours is not None:
        cause = CauseKind(HARDWARE)
        add(cause, cause_probability(comp, cause, config.mission_hours))
    if comp.defect_rate is not None:
        cause = CauseKind(SOFTWARE)
        add(cause, cause_probability(comp, cause, config.mission_hours))
    for match in applicable_attacks(model, comp.id, assertion, assumptions, kb):
        attack = kb.get(match.attack)
        cause = CauseKind(CYBER, attack=attack.id)
        add(cause, cause_probability(comp, cause, config.mission_hours, attack), match)
    return causes


def diagnose(
    model: SystemModel,
    assertion: ViolationAssertion,
    kb: KnowledgeBase,
    assumptions: ThreatAssumptions,
    config,
    suppressed=None,
) -> DiagnosisResult:
    """Enumerate and rank fault candidates for one asserted violation.

    suppressed maps (component id, cause key) -> mitigation effectiveness for
    causes already handled by an emitted requirement. Fully mitigated causes
    stay in the hypothesis pool (flagged) but are excluded from candidates.
    """
    suppressed = dict(suppressed or {})
    conflicts = conflicts_for(model, assertion)
    hitting_sets = minimal_hitting_sets(
        (c.components for c in conflicts), config.max_cardinality
    )

    member_distances = member_support(model, assertion)
    merged: dict[str, int] = {}
    for dist_map in member_distances.values():
        for comp_id, dist in dist_map.items():
            if comp_id not in merged or dist < merged[comp_id]:
                merged[comp_id] = dist
    support = tuple(sorted(merged.items(), key=lambda item: (item[1], item[0])))

    members = sorted(set().union(*hitting_sets)) if hitting_sets else []
    causes_by_component: dict[str, list[CauseHypothesis]] = {}
    for comp_id in members:
        causes_by_component[comp_id] = _causes_for_component(
            model,
            model.component(comp_id),
            merged[comp_id],
            assertion,
            kb,
            assumptions,
            config,
            suppressed,
        )

    pool = tuple(
        sorted(
            (c for causes in causes_by_component.values() for c in causes),
            key=lambda c: (-c.adjusted_probability, c.component, c.cause.key),
        )
    )

    candidates: list[Candidate] = []
    truncated = False
    cap = getattr(config, "candidate_cap", 10000)
    for hitting_set in sorted(hitting_sets, key=lambda s: (len(s), tuple(sorted(s)))):
        actives = []
        for comp_id in sorted(hitting_set):
            active = [
                c for c in causes_by_component[comp_id]
                if not (c.mitigated and c.effectiveness >= 1.0)
            ]
            actives.append(active)
        if any(not active for active in actives):
            continue
        for combo in itertools.product(*actives):
            if len(candidates) >= cap:
                truncated = True
                break
            probability = 1.0
            for cause in combo:
                probability *= cause.effective_probability
            candidates.append(Candidate(causes=tuple(combo), probability=probability))
        if truncated:
            break

    candidates.sort(
        key=lambda cand: (
            -cand.probability,
            cand.cardinality,
            cand.components,
            tuple(sorted(c.cause.key for c in cand.causes)),
        )
    )
    return DiagnosisResult(
        assertion=assertion,
        candidates=tuple(candidates),
        conflicts=conflicts,
        support=support,
        pool=pool,
        truncated=truncated,
    )
