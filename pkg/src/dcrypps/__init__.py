"""DCRYPPS: derive cyber-security requirements from CPS design models.

From a component-level design model plus desirable-property invariants, the
pipeline asserts hypothetical violations, diagnoses them structurally, matches
attack models against implicated components, and emits a ranked, deduplicated
requirement set with a risk ledger and a probabilistic certificate.
"""

from .attacks import (
    AttackMatch,
    AttackModel,
    ApplicabilityRule,
    KnowledgeBase,
    applicable_attacks,
    load_kb,
)
from .derivation import (
    CyberRequirement,
    DerivationConfig,
    DerivationReport,
    derive,
    diff_reports,
    effective_target,
    render_requirement,
    residual_risk,
    serialize_report,
)
from .diagnosis import (
    Candidate,
    CauseHypothesis,
    CauseKind,
    Conflict,
    DiagnosisResult,
    adjust_for_distance,
    cause_probability,
    conflicts_for,
    diagnose,
    minimal_hitting_sets,
)
from .errors import (
    ConfigError,
    DcryppsError,
    KbError,
    ModelError,
    ParseError,
    PropertyError,
    ReportError,
)
from .model import (
    ComponentInstance,
    DependencyEdge,
    Observable,
    SystemModel,
    from_canonical,
    to_canonical,
)
from .pamela import FieldInit, PClassDef, SourceSpan, instantiate, load_model, parse
from .pcc import ParameterUncertainty, build_certificate, compute_confidence, compute_ps
from .properties import (
    InvariantProperty,
    PropertiesDoc,
    Severity,
    ThreatAssumptions,
    ViolationAssertion,
    enumerate_assertions,
    negate,
    parse_properties,
    support_set,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
