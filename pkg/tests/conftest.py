from __future__ import annotations

import importlib.resources
import random

import pytest

from dcrypps import pipeline
from dcrypps.model import ComponentInstance, DependencyEdge, Observable, SystemModel
from dcrypps.properties import (
    Comparison,
    InvariantProperty,
    ObservableRef,
    Severity,
    ThreatAssumptions,
)


def data_text(name: str) -> str:
    return importlib.resources.files("dcrypps.data").joinpath(name).read_text("utf-8")


@pytest.fixture(scope="session")
def autopilot_pam() -> str:
    return data_text("autopilot.pam")


@pytest.fixture(scope="session")
def usecase_setup(autopilot_pam):
    """Autopilot model with the two worked use-case properties attached."""
    return pipeline.load_inputs(autopilot_pam, data_text("usecase.properties"))


@pytest.fixture(scope="session")
def evaluation_setup(autopilot_pam):
    """Autopilot model with the full 17-property evaluation set attached."""
    return pipeline.load_inputs(autopilot_pam, data_text("autopilot.properties"))


def build_model(components, edges=(), observables=(), name="model") -> SystemModel:
    """Compact synthetic-model builder for tests.

    components: list of dicts with at least id and kind.
    edges: (src, kind, dst) triples.
    observables: (name, anchor) pairs.
    """
    comps = []
    for spec in components:
        spec = dict(spec)
        attrs = tuple(sorted(spec.pop("attrs", {}).items()))
        exposure = frozenset(spec.pop("exposure", ()))
        comps.append(
            ComponentInstance(
                id=spec.pop("id"),
                cls=spec.pop("cls", "Test"),
                kind=spec.pop("kind"),
                exposure=exposure,
                attrs=attrs,
                **spec,
            )
        )
    return SystemModel(
        name=name,
        components=tuple(sorted(comps, key=lambda c: c.id)),
        edges=frozenset(DependencyEdge(*e) for e in edges),
        observables=tuple(Observable(name=n, anchor=a) for n, a in observables),
    )


def simple_property(prop_id: str, observable: str, severity=Severity.CATASTROPHIC,
                    category="safety") -> InvariantProperty:
    return InvariantProperty(
        id=prop_id,
        category=category,
        severity=severity,
        expression=Comparison(op="<=", lhs=ObservableRef(observable), rhs="Limit"),
    )


KINDS = ["sensor", "actuator", "program", "board", "network", "server", "station"]
SEVERITIES = [Severity.CATASTROPHIC, Severity.REDUCED_CAPABILITY, Severity.ANNOYANCE]
CATEGORIES = [
    "safety", "system-protection", "performance",
    "regulations", "resources", "information-security",
]


def random_setup(rng: random.Random, max_components: int = 8):
    """Random but valid (model, properties, assumptions) triple."""
    n = rng.randint(2, max_components)
    components = []
    for i in range(n):
        kind = rng.choice(KINDS)
        spec = {"id": f"c{i}", "kind": kind, "importance": float(rng.choice([1, 1, 2, 5, 10]))}
        if rng.random() < 0.7:
            spec["mtbf_hours"] = 10.0 ** rng.uniform(3, 6)
        if rng.random() < 0.6:
            spec["defect_rate"] = rng.uniform(1e-5, 5e-2)
        exposure = [tag for tag in ("internet-facing", "radio", "local-only") if rng.random() < 0.25]
        spec["exposure"] = exposure
        attrs = {}
        if kind in ("program", "server") and rng.random() < 0.4:
            attrs["deadline-ms"] = float(rng.randint(10, 200))
        if kind == "server" and rng.random() < 0.3:
            attrs["role"] = rng.choice(["management", "concentrator"])
        spec["attrs"] = attrs
        components.append(spec)

    ids = [c["id"] for c in components]
    by_kind = {}
    for comp in components:
        by_kind.setdefault(comp["kind"], []).append(comp["id"])

    edges = set()
    networks = by_kind.get("network", [])
    boards = by_kind.get("board", [])
    sensors = by_kind.get("sensor", [])
    for comp in components:
        cid, kind = comp["id"], comp["kind"]
        if kind != "network" and networks and rng.random() < 0.6:
            dst = rng.choice(networks)
            if dst != cid:
                edges.add((cid, "communicates-over", dst))
        if kind in ("program", "server") and boards and rng.random() < 0.5:
            edges.add((cid, "hosted-on", rng.choice(boards)))
        if kind in ("program", "server") and sensors and rng.random() < 0.3:
            dst = rng.choice(sensors)
            if dst != cid:
                edges.add((cid, "reads-from", dst))

    observables = []
    for i in range(rng.randint(1, 3)):
        observables.append((f"obs{i}", rng.choice(ids)))

    model = build_model(components, edges, observables, name=f"random-{rng.randint(0, 10**6)}")

    properties = []
    for i in range(rng.randint(1, 4)):
        obs = observables[rng.randrange(len(observables))][0]
        properties.append(
            simple_property(
                f"p{i}", obs,
                severity=rng.choice(SEVERITIES),
                category=rng.choice(CATEGORIES),
            )
        )
    assumptions = ThreatAssumptions(
        physical_access=rng.random() < 0.3,
        supply_chain_tampering=False,
        full_design_knowledge=True,
        remote_channels=frozenset(rng.choice([("internet", "radio"), ("internet",), ("radio",)])),
    )
    return model, properties, assumptions
