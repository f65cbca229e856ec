"""End-to-end runs shared by the CLI and the HTTP service, so both produce
byte-identical reports for identical inputs."""

from __future__ import annotations

from .attacks import KnowledgeBase, load_kb
from .derivation import DerivationConfig, derive, report_to_dict
from .errors import DcryppsError, ParseError
from .model import SystemModel
from .pamela import load_model, parse
from .pcc import build_certificate, parse_uncertainty
from .properties import PropertiesDoc, parse_properties


def attach_observables(model: SystemModel, doc: PropertiesDoc) -> SystemModel:
    return model.with_observables(doc.observables)


def load_inputs(
    pam_text: str,
    properties_text: str,
    root: str | None = None,
    pam_file: str = "<model>",
    properties_file: str = "<properties>",
) -> tuple[SystemModel, PropertiesDoc]:
    model = load_model(pam_text, root=root, file=pam_file)
    doc = parse_properties(properties_text, file=properties_file)
    return attach_observables(model, doc), doc


def validate_inputs(
    pam_text: str,
    properties_text: str,
    root: str | None = None,
    pam_file: str = "<model>",
    properties_file: str = "<properties>",
) -> list[dict]:
    """Collect blocking issues instead of raising; empty list means valid."""
    issues: list[dict] = []
    model = None
    try:
        model = load_model(pam_text, root=root, file=pam_file)
    except ParseError as exc:
        issues.append(
            {"code": "model-parse", "detail": str(exc), "line": exc.line, "column": exc.column}
        )
    except DcryppsError as exc:
        issues.append({"code": "model-invalid", "detail": str(exc)})
    doc = None
    try:
        doc = parse_properties(properties_text, file=properties_file)
    except ParseError as exc:
        issues.append(
            {"code": "properties-parse", "detail": str(exc), "line": exc.line, "column": exc.column}
        )
    except DcryppsError as exc:
        issues.append({"code": "properties-invalid", "detail": str(exc)})
    if model is not None and doc is not None:
        try:
            attach_observables(model, doc)
        except DcryppsError as exc:
            issues.append({"code": "observable-binding", "detail": str(exc)})
    return issues


def run(
    model: SystemModel,
    doc: PropertiesDoc,
    kb: KnowledgeBase | None = None,
    config: DerivationConfig | None = None,
    required_ps: float = 0.9,
    samples: int = 10000,
    uncertainty: dict | None = None,
) -> dict:
    """Full derivation plus certificate, as a serializable report dict."""
    kb = kb or load_kb("builtin")
    config = config or DerivationConfig()
    report = report_to_dict(derive(model, doc.properties, kb, doc.assumptions, config))
    report["certificate"] = build_certificate(
        report,
        uncertainty=parse_uncertainty(uncertainty),
        required_ps=required_ps,
        samples=samples,
        seed=config.seed,
    )
    return report
