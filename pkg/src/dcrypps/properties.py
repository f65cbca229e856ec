"""Desirable-property language: expressions, severities, violation assertions.

Property expressions are symbolic only; they are never numerically evaluated.
Thresholds are named constants whose values and units are opaque annotations.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass

from .errors import ConfigError, ParseError, PropertyError
from .model import SystemModel, support_distances

CATEGORIES = frozenset(
    {
        "safety",
        "system-protection",
        "performance",
        "regulations",
        "resources",
        "information-security",
    }
)


class Severity(enum.Enum):
    CATASTROPHIC = "Catastrophic"
    REDUCED_CAPABILITY = "ReducedCapability"
    ANNOYANCE = "Annoyance"

    @property
    def rank(self) -> int:
        return {"Catastrophic": 3, "ReducedCapability": 2, "Annoyance": 1}[self.value]

    @classmethod
    def parse(cls, text: str) -> "Severity":
        for member in cls:
            if member.value == text:
                return member
        raise PropertyError(f"unknown severity {text!r}")


# --- expression tree -------------------------------------------------------


@dataclass(frozen=True)
class ObservableRef:
    name: str

    def render(self) -> str:
        return self.name


@dataclass(frozen=True)
class Dist:
    a: str
    b: str

    def render(self) -> str:
        return f"(dist {self.a} {self.b})"


@dataclass(frozen=True)
class Comparison:
    op: str  # one of < <= > >=
    lhs: "ObservableRef | Dist"
    rhs: str  # threshold constant name

    def render(self) -> str:
        return f"({self.op} {self.lhs.render()} {self.rhs})"


@dataclass(frozen=True)
class And:
    children: tuple

    def render(self) -> str:
        return "(and " + " ".join(c.render() for c in self.children) + ")"


@dataclass(frozen=True)
class Or:
    children: tuple

    def render(self) -> str:
        return "(or " + " ".join(c.render() for c in self.children) + ")"


@dataclass(frozen=True)
class Not:
    child: object

    def render(self) -> str:
        return f"(not {self.child.render()})"


_FLIP = {"<": ">=", "<=": ">", ">": "<=", ">=": "<"}


def negate_expr(expr):
    """Structural negation: comparisons flip, and/or dualize, not unwraps."""
    if isinstance(expr, Comparison):
        return Comparison(op=_FLIP[expr.op], lhs=expr.lhs, rhs=expr.rhs)
    if isinstance(expr, And):
        return Or(tuple(negate_expr(c) for c in expr.children))
    if isinstance(expr, Or):
        return And(tuple(negate_expr(c) for c in expr.children))
    if isinstance(expr, Not):
        return expr.child
    raise PropertyError(f"cannot negate {expr!r}")


def observables_of(expr) -> frozenset[str]:
    if isinstance(expr, Comparison):
        lhs = expr.lhs
        if isinstance(lhs, Dist):
            return frozenset({lhs.a, lhs.b})
        return frozenset({lhs.name})
    if isinstance(expr, (And, Or)):
        out: frozenset[str] = frozenset()
        for child in expr.children:
            out |= observables_of(child)
        return out
    if isinstance(expr, Not):
        return observables_of(expr.child)
    raise PropertyError(f"not an expression: {expr!r}")


def thresholds_of(expr) -> frozenset[str]:
    if isinstance(expr, Comparison):
        return frozenset({expr.rhs})
    if isinstance(expr, (And, Or)):
        out: frozenset[str] = frozenset()
        for child in expr.children:
            out |= thresholds_of(child)
        return out
    if isinstance(expr, Not):
        return thresholds_of(expr.child)
    raise PropertyError(f"not an expression: {expr!r}")


@dataclass(frozen=True)
class InvariantProperty:
    id: str
    category: str
    severity: Severity
    expression: object

    def __post_init__(self):
        if self.category not in CATEGORIES:
            raise PropertyError(f"property {self.id}: unknown category {self.category!r}")


def negate(prop: InvariantProperty) -> "ViolationAssertion":
    """Turn a desirable property into the assertion that it has been violated."""
    expr = negate_expr(prop.expression)
    return ViolationAssertion(
        violated=(prop.id,),
        expression=expr,
        members=((prop.id, expr),),
        severity=prop.severity,
    )


@dataclass(frozen=True)
class ViolationAssertion:
    """One or more simultaneously asserted property violations.

    The expression is the conjunction of the member negations; each member
    keeps its own negated expression so per-property conflicts can be built.
    """

    violated: tuple[str, ...]
    expression: object
    members: tuple[tuple[str, object], ...]
    severity: Severity

    @property
    def id(self) -> str:
        return "+".join(self.violated)


def joint_assertion(props) -> ViolationAssertion:
    props = sorted(props, key=lambda p: p.id)
    members = tuple((p.id, negate_expr(p.expression)) for p in props)
    exprs = tuple(expr for _, expr in members)
    expression = exprs[0] if len(exprs) == 1 else And(exprs)
    return ViolationAssertion(
        violated=tuple(p.id for p in props),
        expression=expression,
        members=members,
        severity=max((p.severity for p in props), key=lambda s: s.rank),
    )


def enumerate_assertions(properties, max_joint: int = 2) -> list[ViolationAssertion]:
    """All singleton negations first, then pairs, up to max_joint-tuples.

    Each tier is ordered by severity descending, then property ids
    lexicographically, so iteration order is deterministic.
    """
    if max_joint < 1:
        raise ConfigError("max_joint must be >= 1")
    properties = list(properties)
    ids = [p.id for p in properties]
    if len(ids) != len(set(ids)):
        raise PropertyError("duplicate property ids")
    out: list[ViolationAssertion] = []
    for size in range(1, max_joint + 1):
        tier = [joint_assertion(combo) for combo in itertools.combinations(properties, size)]
        tier.sort(key=lambda a: (-a.severity.rank, a.violated))
        out.extend(tier)
    return out


def support_set(model: SystemModel, assertion: ViolationAssertion) -> list[tuple[str, int]]:
    """Components that could contribute to the asserted violation, with their
    minimum hop distance from the violated observables' anchors.

    For joint assertions this is the union of the member support sets with
    the minimum distance across members.
    """
    names = observables_of(assertion.expression)
    if not names:
        raise PropertyError(f"assertion {assertion.id}: no observables referenced")
    dist = support_distances(model, names)
    return sorted(dist.items(), key=lambda item: (item[1], item[0]))


def member_support(model: SystemModel, assertion: ViolationAssertion) -> dict[str, dict[str, int]]:
    """Per violated property: its own support distance map."""
    out = {}
    for prop_id, expr in assertion.members:
        out[prop_id] = support_distances(model, observables_of(expr))
    return out


# --- threat assumptions ----------------------------------------------------

REMOTE_CHANNELS = frozenset({"internet", "radio", "none"})


@dataclass(frozen=True)
class ThreatAssumptions:
    physical_access: bool = False
    supply_chain_tampering: bool = False
    full_design_knowledge: bool = True
    remote_channels: frozenset[str] = frozenset({"internet", "radio"})

    def __post_init__(self):
        bad = self.remote_channels - REMOTE_CHANNELS
        if bad:
            raise PropertyError(f"unknown remote channels {sorted(bad)}")
        if not self.remote_channels and not (self.physical_access and self.supply_chain_tampering):
            raise PropertyError("remote_channels must be nonempty unless both access flags are set")

    def effective_channels(self) -> frozenset[str]:
        return self.remote_channels - {"none"}


# --- properties document ---------------------------------------------------


@dataclass(frozen=True)
class Threshold:
    name: str
    value: float
    unit: str


@dataclass(frozen=True)
class PropertiesDoc:
    thresholds: tuple[Threshold, ...]
    observables: tuple  # of model.Observable
    properties: tuple[InvariantProperty, ...]
    assumptions: ThreatAssumptions

    def threshold(self, name: str) -> Threshold:
        for t in self.thresholds:
            if t.name == name:
                return t
        raise PropertyError(f"unknown threshold {name!r}")


def _tokenize_expr(text: str, lineno: int) -> list[str]:
    tokens: list[str] = []
    buf: list[str] = []
    for ch in text:
        if ch in "()":
            if buf:
                tokens.append("".join(buf))
                buf = []
            tokens.append(ch)
        elif ch.isspace():
            if buf:
                tokens.append("".join(buf))
                buf = []
        else:
            buf.append(ch)
    if buf:
        tokens.append("".join(buf))
    return tokens


def parse_expr(text: str, lineno: int = 0):
    """Parse the small prefix expression syntax, e.g.
    `(<= (dist position.gps position.vor) MaximumSensorDisagreement)`."""
    tokens = _tokenize_expr(text, lineno)
    pos = 0

    def fail(msg: str):
        raise ParseError(msg, line=lineno, column=1)

    def next_token() -> str:
        nonlocal pos
        if pos >= len(tokens):
            fail("unexpected end of expression")
        token = tokens[pos]
        pos += 1
        return token

    def parse_term():
        token = next_token()
        if token == "(":
            head = next_token()
            if head != "dist":
                fail(f"expected dist, got {head!r}")
            a, b = next_token(), next_token()
            if next_token() != ")":
                fail("expected ) after dist")
            return Dist(a, b)
        if token == ")":
            fail("unexpected )")
        return ObservableRef(token)

    def parse_node():
        token = next_token()
        if token != "(":
            fail(f"expected (, got {token!r}")
        head = next_token()
        if head in ("<", "<=", ">", ">="):
            lhs = parse_term()
            rhs = next_token()
            if rhs in ("(", ")"):
                fail("threshold must be a named constant")
            if next_token() != ")":
                fail("expected ) after comparison")
            return Comparison(op=head, lhs=lhs, rhs=rhs)
        if head in ("and", "or"):
            children = []
            while pos < len(tokens) and tokens[pos] != ")":
                children.append(parse_node())
            if next_token() != ")":
                fail(f"unterminated ({head} ...)")
            if len(children) < 2:
                fail(f"({head} ...) needs at least two children")
            return And(tuple(children)) if head == "and" else Or(tuple(children))
        if head == "not":
            child = parse_node()
            if next_token() != ")":
                fail("unterminated (not ...)")
            # normalize: negation is pushed to the comparisons, so stored
            # expressions are Not-free and negate is a structural involution
            return negate_expr(child)
        fail(f"unknown operator {head!r}")

    node = parse_node()
    if pos != len(tokens):
        fail("trailing tokens after expression")
    return node


def parse_properties(text: str, file: str = "<properties>") -> PropertiesDoc:
    """Parse the properties document: thresholds, observables, properties,
    and the threat-assumptions block."""
    from .model import Observable  # local to avoid cycle at import time

    thresholds: list[Threshold] = []
    observables: list[Observable] = []
    properties: list[InvariantProperty] = []
    assumption_fields: dict = {}
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split(";;")[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if section not in ("thresholds", "observables", "properties", "assumptions"):
                raise ParseError(f"unknown section [{section}]", file, lineno, 1)
            continue
        if section == "thresholds":
            name, _, rest = line.partition("=")
            parts = rest.split()
            if not name.strip() or len(parts) != 2:
                raise ParseError("threshold must be `Name = value unit`", file, lineno, 1)
            try:
                value = float(parts[0])
            except ValueError:
                raise ParseError(f"bad threshold value {parts[0]!r}", file, lineno, 1) from None
            thresholds.append(Threshold(name.strip(), value, parts[1]))
        elif section == "observables":
            tokens = line.split()
            name = tokens[0]
            anchor = ""
            inputs: frozenset[str] = frozenset()
            for token in tokens[1:]:
                key, _, value = token.partition("=")
                if key == "anchor":
                    anchor = value
                elif key == "inputs":
                    inputs = frozenset(value.split(","))
                else:
                    raise ParseError(f"unknown observable field {key!r}", file, lineno, 1)
            if not anchor:
                raise ParseError(f"observable {name}: missing anchor", file, lineno, 1)
            observables.append(Observable(name=name, anchor=anchor, inputs=inputs))
        elif section == "properties":
            prop_id, _, rest = line.partition(" ")
            fields: dict[str, str] = {}
            rest = rest.strip()
            while rest and not rest.startswith("expr="):
                token, _, rest = rest.partition(" ")
                key, _, value = token.partition("=")
                fields[key] = value
                rest = rest.strip()
            if not rest.startswith("expr="):
                raise ParseError(f"property {prop_id}: missing expr=", file, lineno, 1)
            expr_text = rest[len("expr="):]
            try:
                expression = parse_expr(expr_text, lineno)
            except ParseError as exc:
                raise ParseError(f"property {prop_id}: {exc}", file, lineno, 1) from None
            if "category" not in fields or "severity" not in fields:
                raise ParseError(f"property {prop_id}: needs category= and severity=", file, lineno, 1)
            properties.append(
                InvariantProperty(
                    id=prop_id,
                    category=fields["category"],
                    severity=Severity.parse(fields["severity"]),
                    expression=expression,
                )
            )
        elif section == "assumptions":
            key, _, value = line.partition("=")
            key, value = key.strip(), value.strip()
            if key in ("physical_access", "supply_chain_tampering", "full_design_knowledge"):
                if value not in ("true", "false"):
                    raise ParseError(f"{key} must be true or false", file, lineno, 1)
                assumption_fields[key] = value == "true"
            elif key == "remote_channels":
                channels = frozenset(v.strip() for v in value.split(",") if v.strip())
                assumption_fields["remote_channels"] = channels
            else:
                raise ParseError(f"unknown assumption {key!r}", file, lineno, 1)
        else:
            raise ParseError("content before any [section]", file, lineno, 1)

    names = {t.name for t in thresholds}
    obs_names = {o.name for o in observables}
    for prop in properties:
        for ref in sorted(thresholds_of(prop.expression)):
            if ref not in names:
                raise PropertyError(f"property {prop.id}: unknown threshold {ref!r}")
        for ref in sorted(observables_of(prop.expression)):
            if ref not in obs_names:
                raise PropertyError(f"property {prop.id}: unknown observable {ref!r}")
    return PropertiesDoc(
        thresholds=tuple(thresholds),
        observables=tuple(observables),
        properties=tuple(properties),
        assumptions=ThreatAssumptions(**assumption_fields),
    )
