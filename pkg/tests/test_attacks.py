from __future__ import annotations

import pytest

from dcrypps.attacks import (
    applicable_attacks,
    exposure_factor,
    load_kb,
    match_attack,
    parse_kb,
    targets_for,
)
from dcrypps.errors import KbError
from dcrypps.properties import ThreatAssumptions, negate

from conftest import build_model, simple_property

BUILTIN_IDS = [
    "physical-tamper",
    "spoof-via-concentrator",
    "spoof-via-mitm",
    "tfm-numeric-sensitivity",
    "tfm-open-ports",
    "tfm-protocol-overflow",
    "tfm-web-management",
    "timing-job-flood",
    "timing-network-saturation",
    "timing-process-load",
]

REMOTE = ThreatAssumptions(
    physical_access=False,
    supply_chain_tampering=False,
    full_design_knowledge=True,
    remote_channels=frozenset({"internet", "radio"}),
)


def test_builtin_catalog_has_the_ten_scenarios():
    kb = load_kb("builtin")
    assert sorted(a.id for a in kb) == BUILTIN_IDS
    assert len(kb) == 10


def test_duplicate_attack_id_rejected():
    text = """
attack dup
  name: one
  category: timing
  kinds: board
  base-likelihood: 0.1
  template: x
attack dup
  name: two
  category: timing
  kinds: board
  base-likelihood: 0.1
  template: x
"""
    with pytest.raises(KbError, match="duplicate attack id 'dup'"):
        parse_kb(text)


def test_empty_document_is_empty_kb():
    assert len(parse_kb(";; nothing here\n")) == 0


def test_schema_error_names_field():
    text = """
attack bad
  name: x
  category: timing
  kinds: board
  base-likelihood: lots
  template: x
"""
    with pytest.raises(KbError, match="attack bad: base-likelihood"):
        parse_kb(text)


def test_unknown_edge_predicate_rejected():
    text = """
attack bad
  name: x
  category: timing
  kinds: board
  edges: levitates
  base-likelihood: 0.1
  template: x
"""
    with pytest.raises(KbError, match="edges: unknown predicate"):
        parse_kb(text)


def test_exposure_factor_table():
    comp = build_model([{"id": "a", "kind": "sensor", "exposure": ["internet-facing"]}]).components[0]
    assert exposure_factor(comp) == 1.0
    comp = build_model([{"id": "a", "kind": "sensor", "exposure": ["radio"]}]).components[0]
    assert exposure_factor(comp) == 0.8
    comp = build_model([{"id": "a", "kind": "sensor", "exposure": ["local-only"]}]).components[0]
    assert exposure_factor(comp) == 0.4
    comp = build_model([{"id": "a", "kind": "sensor"}]).components[0]
    assert exposure_factor(comp) == 0.4
    comp = build_model(
        [{"id": "a", "kind": "sensor", "exposure": ["radio", "internet-facing"]}]
    ).components[0]
    assert exposure_factor(comp) == 1.0


def test_gps_over_local_network_matches_mitm(usecase_setup):
    model, doc = usecase_setup
    kb = load_kb("builtin")
    assertion = negate(doc.properties[0])
    matches = applicable_attacks(model, "GPS", assertion, REMOTE, kb)
    ids = [m.attack for m in matches]
    assert "spoof-via-mitm" in ids
    mitm = next(m for m in matches if m.attack == "spoof-via-mitm")
    assert mitm.binding("channel") == "localnet"
    assert mitm.binding("peer") == "P1"  # highest-importance other endpoint


def test_physical_access_filtering(usecase_setup):
    model, _ = usecase_setup
    kb = load_kb("builtin")
    tamper = kb.get("physical-tamper")
    assert match_attack(model, "GPS", tamper, REMOTE) is None
    allowed = ThreatAssumptions(
        physical_access=True,
        supply_chain_tampering=False,
        remote_channels=frozenset({"internet"}),
    )
    match = match_attack(model, "GPS", tamper, allowed)
    assert match is not None
    assert targets_for(model, tamper, match) == ("GPS",)


def test_component_with_no_edges_or_exposure_matches_nothing():
    model = build_model([{"id": "lonely", "kind": "program"}], observables=[("o", "lonely")])
    kb = load_kb("builtin")
    assertion = negate(simple_property("p", "o"))
    assert applicable_attacks(model, "lonely", assertion, REMOTE, kb) == []


def test_remote_channel_requirement_blocks_isolated_attacker(usecase_setup):
    model, _ = usecase_setup
    kb = load_kb("builtin")
    no_remote = ThreatAssumptions(
        physical_access=True,
        supply_chain_tampering=False,
        remote_channels=frozenset({"none"}),
    )
    mitm = kb.get("spoof-via-mitm")
    assert match_attack(model, "GPS", mitm, no_remote) is None


def test_monotonicity_in_attacker_capability(usecase_setup):
    """Enlarging remote channels or enabling physical access never shrinks
    the match set."""
    model, doc = usecase_setup
    kb = load_kb("builtin")
    assertion = negate(doc.properties[0])
    weak = ThreatAssumptions(
        physical_access=False,
        supply_chain_tampering=False,
        remote_channels=frozenset({"radio"}),
    )
    strong = ThreatAssumptions(
        physical_access=True,
        supply_chain_tampering=False,
        remote_channels=frozenset({"radio", "internet"}),
    )
    for comp in model.components:
        weak_ids = {m.attack for m in applicable_attacks(model, comp.id, assertion, weak, kb)}
        strong_ids = {m.attack for m in applicable_attacks(model, comp.id, assertion, strong, kb)}
        assert weak_ids <= strong_ids


def test_soundness_no_match_violates_assumptions(usecase_setup):
    model, doc = usecase_setup
    kb = load_kb("builtin")
    assertion = negate(doc.properties[0])
    assumptions = ThreatAssumptions(
        physical_access=False,
        supply_chain_tampering=False,
        remote_channels=frozenset({"internet"}),
    )
    for comp in model.components:
        for match in applicable_attacks(model, comp.id, assertion, assumptions, kb):
            rule = kb.get(match.attack).applicability
            assert not rule.requires_physical_access
            if rule.requires_remote_channel:
                assert rule.requires_remote_channel & {"internet"}


def test_concentrator_scenario():
    model = build_model(
        [
            {"id": "temp", "kind": "sensor"},
            {"id": "dc", "kind": "server", "attrs": {"role": "concentrator"}},
            {"id": "net", "kind": "network"},
        ],
        [
            ("dc", "reads-from", "temp"),
            ("dc", "communicates-over", "net"),
        ],
        [("o", "temp")],
    )
    kb = load_kb("builtin")
    attack = kb.get("spoof-via-concentrator")
    match = match_attack(model, "temp", attack, REMOTE)
    assert match is not None
    assert match.binding("peer") == "dc"
    assert targets_for(model, attack, match) == ("dc",)


def test_timing_rules_need_a_deadline():
    board = {"id": "b1", "kind": "board", "exposure": ["internet-facing"]}
    fast = {"id": "ctl", "kind": "program", "attrs": {"deadline-ms": 20.0}}
    slow = {"id": "log", "kind": "program"}
    net = {"id": "net", "kind": "network"}
    edges = [
        ("ctl", "hosted-on", "b1"),
        ("log", "hosted-on", "b1"),
        ("ctl", "communicates-over", "net"),
    ]
    model = build_model([board, fast, slow, net], edges, [("o", "ctl")])
    kb = load_kb("builtin")
    assert match_attack(model, "b1", kb.get("timing-process-load"), REMOTE) is not None
    assert match_attack(model, "b1", kb.get("timing-job-flood"), REMOTE) is not None
    saturation = match_attack(model, "net", kb.get("timing-network-saturation"), REMOTE)
    assert saturation is not None
    assert saturation.binding("peer") == "ctl"

    # strip the deadline: every timing rule stops matching
    no_deadline = build_model(
        [board, {"id": "ctl", "kind": "program"}, slow, net], edges, [("o", "ctl")]
    )
    assert match_attack(no_deadline, "b1", kb.get("timing-process-load"), REMOTE) is None
    assert match_attack(no_deadline, "b1", kb.get("timing-job-flood"), REMOTE) is None
    assert match_attack(no_deadline, "net", kb.get("timing-network-saturation"), REMOTE) is None


def test_matches_ordered_by_attack_id(usecase_setup):
    model, doc = usecase_setup
    kb = load_kb("builtin")
    assertion = negate(doc.properties[0])
    for comp in model.components:
        ids = [m.attack for m in applicable_attacks(model, comp.id, assertion, REMOTE, kb)]
        assert ids == sorted(ids)
