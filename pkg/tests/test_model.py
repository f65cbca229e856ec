from __future__ import annotations

import math

import pytest
from hypothesis import given, strategies as st

from dcrypps.errors import ModelError, ParseError, PropertyError
from dcrypps.model import DependencyEdge, SystemModel, distances_from
from dcrypps.pamela import load_model
from dcrypps.properties import (
    And,
    Comparison,
    Dist,
    Not,
    ObservableRef,
    Or,
    Severity,
    ThreatAssumptions,
    enumerate_assertions,
    negate,
    negate_expr,
    parse_expr,
    parse_properties,
    support_set,
)

from conftest import build_model, data_text, simple_property


# --- negation --------------------------------------------------------------


def test_negate_flips_sensor_disagreement_bound():
    prop = next(
        p for p in parse_properties(data_text("usecase.properties")).properties
        if p.id == "sensors-agree"
    )
    assertion = negate(prop)
    assert assertion.violated == ("sensors-agree",)
    expr = assertion.expression
    assert isinstance(expr, Comparison)
    assert expr.op == ">"
    assert expr.lhs == Dist("position.gps", "position.vor")
    assert expr.rhs == "MaximumSensorDisagreement"


def test_negate_de_morgan():
    expr = And(
        (
            Comparison("<", ObservableRef("a"), "K1"),
            Comparison("<", ObservableRef("b"), "K2"),
        )
    )
    negated = negate_expr(expr)
    assert isinstance(negated, Or)
    assert [c.op for c in negated.children] == [">=", ">="]


_comparison = st.builds(
    Comparison,
    op=st.sampled_from(["<", "<=", ">", ">="]),
    lhs=st.one_of(
        st.builds(ObservableRef, name=st.sampled_from(["x", "y", "z"])),
        st.builds(Dist, a=st.just("x"), b=st.just("y")),
    ),
    rhs=st.sampled_from(["K1", "K2"]),
)
_expr = st.recursive(
    _comparison,
    lambda children: st.one_of(
        st.builds(lambda a, b: And((a, b)), children, children),
        st.builds(lambda a, b: Or((a, b)), children, children),
    ),
    max_leaves=8,
)


@given(_expr)
def test_negate_is_an_involution(expr):
    assert negate_expr(negate_expr(expr)) == expr


def test_not_unwraps_and_normalizes():
    assert negate_expr(Not(Comparison("<", ObservableRef("a"), "K"))) == Comparison(
        "<", ObservableRef("a"), "K"
    )
    parsed = parse_expr("(not (< a K))")
    assert parsed == Comparison(">=", ObservableRef("a"), "K")


# --- assertion enumeration ---------------------------------------------------


def test_enumerate_two_properties_gives_three_assertions():
    props = [simple_property("a", "obs"), simple_property("b", "obs")]
    assertions = enumerate_assertions(props, max_joint=2)
    assert [a.violated for a in assertions] == [("a",), ("b",), ("a", "b")]


def test_enumerate_singletons_only():
    props = [simple_property(f"p{i}", "obs") for i in range(5)]
    assert len(enumerate_assertions(props, max_joint=1)) == 5


def test_enumerate_17_properties_matches_binomial_oracle():
    props = [simple_property(f"p{i:02d}", "obs") for i in range(17)]
    expected = math.comb(17, 1) + math.comb(17, 2)  # independent count oracle
    assert expected == 153
    assert len(enumerate_assertions(props, max_joint=2)) == expected


@given(st.integers(min_value=1, max_value=7), st.integers(min_value=1, max_value=4))
def test_enumerate_count_formula(k, max_joint):
    props = [simple_property(f"p{i}", "obs") for i in range(k)]
    expected = sum(math.comb(k, j) for j in range(1, max_joint + 1))
    assert len(enumerate_assertions(props, max_joint=max_joint)) == expected


def test_enumerate_orders_by_severity_then_id():
    props = [
        simple_property("b", "obs", severity=Severity.ANNOYANCE),
        simple_property("a", "obs", severity=Severity.CATASTROPHIC),
        simple_property("c", "obs", severity=Severity.CATASTROPHIC),
    ]
    assertions = enumerate_assertions(props, max_joint=1)
    assert [a.id for a in assertions] == ["a", "c", "b"]


def test_enumerate_rejects_bad_max_joint():
    with pytest.raises(Exception):
        enumerate_assertions([simple_property("a", "obs")], max_joint=0)


# --- support sets ------------------------------------------------------------


# Expected distances derived by hand: breadth-first search over the bundled
# model's edge list from the position-estimate anchor P1, walking hosted-on
# and communicates-over in both directions and reads-from from reader to
# source only (so the dashboard TD1 that only reads GS1 is not implicated).
EXPECTED_AUTOPILOT_DISTANCES = {
    "P1": 0,
    "C1": 1,
    "localnet": 1,
    "FC": 2,
    "GPS": 2,
    "INS": 2,
    "VOR": 2,
    "W1": 2,
    "cellnet": 3,
    "GS1": 4,
}


def test_bundled_autopilot_support_distances(usecase_setup):
    model, doc = usecase_setup
    prop = next(p for p in doc.properties if p.id == "trajectory-hold")
    support = support_set(model, negate(prop))
    assert dict(support) == EXPECTED_AUTOPILOT_DISTANCES
    assert "TD1" not in dict(support)


def test_support_includes_implicated_parts(usecase_setup):
    model, doc = usecase_setup
    prop = next(p for p in doc.properties if p.id == "trajectory-hold")
    members = {comp for comp, _ in support_set(model, negate(prop))}
    assert {"GPS", "VOR", "localnet", "P1"} <= members


def test_single_component_support():
    model = build_model(
        [{"id": "only", "kind": "program"}], observables=[("o", "only")]
    )
    assertion = negate(simple_property("p", "o"))
    assert support_set(model, assertion) == [("only", 0)]


def test_support_sorted_by_distance_then_id(usecase_setup):
    model, doc = usecase_setup
    assertion = negate(doc.properties[0])
    support = support_set(model, assertion)
    assert support == sorted(support, key=lambda item: (item[1], item[0]))


def test_shortest_path_property(usecase_setup):
    """Every reported distance is realizable and none shorter: re-verify by
    exhaustive path expansion up to the reported length."""
    model, doc = usecase_setup
    dist = dict(support_set(model, negate(doc.properties[0])))

    neighbors: dict[str, set[str]] = {c.id: set() for c in model.components}
    for e in model.edges:
        if e.kind in ("hosted-on", "communicates-over", "shares-resource"):
            neighbors[e.src].add(e.dst)
            neighbors[e.dst].add(e.src)
        elif e.kind == "reads-from":
            neighbors[e.src].add(e.dst)
        elif e.kind == "controls":
            neighbors[e.dst].add(e.src)

    frontier = {"P1"}
    seen = {"P1"}
    hops = 0
    levels = {0: {"P1"}}
    while frontier:
        hops += 1
        frontier = {n for f in frontier for n in neighbors[f]} - seen
        seen |= frontier
        if frontier:
            levels[hops] = set(frontier)
    expected = {comp: d for d, comps in levels.items() for comp in comps}
    assert dist == expected


def test_monotonicity_adding_edge_never_shrinks_support():
    components = [
        {"id": "a", "kind": "program"},
        {"id": "b", "kind": "sensor"},
        {"id": "n", "kind": "network"},
    ]
    base = build_model(components, [("a", "communicates-over", "n")], [("o", "a")])
    bigger = build_model(
        components,
        [("a", "communicates-over", "n"), ("b", "communicates-over", "n")],
        [("o", "a")],
    )
    assertion = negate(simple_property("p", "o"))
    before = dict(support_set(base, assertion))
    after = dict(support_set(bigger, assertion))
    assert set(before) <= set(after)
    for comp, d in before.items():
        assert after[comp] <= d


def test_unresolved_observable_errors():
    model = build_model([{"id": "x", "kind": "program"}], observables=[("o", "x")])
    assertion = negate(simple_property("p", "nope"))
    with pytest.raises(ModelError, match="unknown observable"):
        support_set(model, assertion)


# --- model invariants ---------------------------------------------------------


def test_duplicate_component_ids_rejected():
    with pytest.raises(ModelError, match="duplicate component ids"):
        build_model([{"id": "a", "kind": "sensor"}, {"id": "a", "kind": "board"}])


def test_edge_endpoints_must_exist():
    with pytest.raises(ModelError, match="not a component"):
        build_model([{"id": "a", "kind": "sensor"}], [("a", "communicates-over", "n")])


def test_self_loop_rejected_for_comm():
    with pytest.raises(ModelError, match="self-loop"):
        DependencyEdge("a", "communicates-over", "a")


def test_mtbf_must_be_positive():
    with pytest.raises(ModelError, match="mtbf-hours"):
        build_model([{"id": "a", "kind": "sensor", "mtbf_hours": 0.0}])


# --- properties document -------------------------------------------------------


def test_parse_properties_bundled_counts():
    doc = parse_properties(data_text("autopilot.properties"))
    assert len(doc.properties) == 17
    categories = {p.category for p in doc.properties}
    assert categories == {
        "safety", "system-protection", "performance",
        "regulations", "resources", "information-security",
    }
    assert doc.assumptions.physical_access is False
    assert doc.assumptions.remote_channels == frozenset({"internet", "radio"})
    assert doc.threshold("MaximumSensorDisagreement").value == 100.0
    assert doc.threshold("MaximumSensorDisagreement").unit == "m"


def test_parse_expr_prefix_syntax():
    expr = parse_expr("(> (dist GPS.pos VOR.pos) MaximumSensorDisagreement)")
    assert expr == Comparison(">", Dist("GPS.pos", "VOR.pos"), "MaximumSensorDisagreement")


def test_property_with_unknown_observable_rejected():
    text = """
[thresholds]
K = 1 m
[observables]
a anchor=x
[properties]
p category=safety severity=Catastrophic expr=(< missing K)
[assumptions]
remote_channels = internet
"""
    with pytest.raises(PropertyError, match="unknown observable"):
        parse_properties(text)


def test_property_with_unknown_threshold_rejected():
    text = """
[thresholds]
K = 1 m
[observables]
a anchor=x
[properties]
p category=safety severity=Catastrophic expr=(< a Missing)
[assumptions]
remote_channels = internet
"""
    with pytest.raises(PropertyError, match="unknown threshold"):
        parse_properties(text)


def test_bad_section_has_location():
    with pytest.raises(ParseError) as exc:
        parse_properties("[bogus]\n")
    assert exc.value.line == 1


def test_threat_assumptions_invariant():
    with pytest.raises(PropertyError, match="remote_channels"):
        ThreatAssumptions(
            physical_access=False,
            supply_chain_tampering=True,
            remote_channels=frozenset(),
        )
    # allowed when both access flags are set
    ThreatAssumptions(
        physical_access=True, supply_chain_tampering=True, remote_channels=frozenset()
    )


def test_distance_to_next_waypoint_is_observable_without_property():
    doc = parse_properties(data_text("autopilot.properties"))
    names = {o.name for o in doc.observables}
    assert "distance-to-next-waypoint" in names
    from dcrypps.properties import observables_of

    used = set()
    for p in doc.properties:
        used |= observables_of(p.expression)
    assert "distance-to-next-waypoint" not in used
