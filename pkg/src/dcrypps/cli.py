"""Command-line driver: validate, derive, explain, serve.

Exit codes: 0 success, 1 validation or derivation error, 2 usage error.
"""

from __future__ import annotations

import json
import os
import sys
from pathlib import Path

import click

from . import pipeline
from .attacks import load_kb
from .derivation import config_from_overrides, parse_report, serialize_report
from .errors import DcryppsError
from .pcc import compute_ps
from .properties import Severity


def _read(path: str) -> str:
    try:
        return Path(path).read_text("utf-8")
    except OSError as exc:
        raise click.UsageError(f"cannot read {path}: {exc.strerror}") from exc


@click.group()
def main():
    """Derive cyber-security requirements from a CPS design model."""


@main.command()
@click.argument("model_path", metavar="MODEL.PAM")
@click.option("--properties", "properties_path", required=True, help="Properties file.")
@click.option("--root", default=None, help="Root class (default: last defpclass).")
def validate(model_path, properties_path, root):
    """Check a model and properties file; exit 0 iff nothing blocks."""
    issues = pipeline.validate_inputs(
        _read(model_path),
        _read(properties_path),
        root=root,
        pam_file=model_path,
        properties_file=properties_path,
    )
    if not issues:
        click.echo("OK")
        return
    for issue in issues:
        click.echo(f"{issue['code']}: {issue['detail']}")
    sys.exit(1)


def _summary_table(report: dict) -> str:
    lines = []
    lines.append(f"{'REQ':<8} {'ATTACK':<26} TARGETS")
    for req in report["requirements"]:
        lines.append(f"{req['id']:<8} {req['attack']:<26} {','.join(req['targets'])}")
    lines.append("")
    lines.append(f"{'ASSERTION':<24} {'INITIAL':>12} {'RESIDUAL':>12} {'TARGET':>12}  STATE")
    for entry in report["ledger"]:
        state = "ok" if entry["resolved"] else "unresolved"
        lines.append(
            f"{entry['assertion']:<24} {entry['initial_risk']:>12.3e} "
            f"{entry['residual_risk']:>12.3e} {entry['effective_target']:>12.3e}  {state}"
        )
    cert = report["certificate"]
    lines.append("")
    lines.append(
        f"Ps = {cert['ps']:.6f}   required_ps = {cert['required_ps']:.4f}   "
        f"confidence = {cert['confidence']:.4f}"
    )
    return "\n".join(lines)


@main.command()
@click.argument("model_path", metavar="MODEL.PAM")
@click.option("--properties", "properties_path", required=True, help="Properties file.")
@click.option("--root", default=None, help="Root class (default: last defpclass).")
@click.option("--kb", "kb_path", default="builtin", show_default=True,
              help="Attack KB file, or `builtin`.")
@click.option("--risk-target-catastrophic", type=float, default=None)
@click.option("--risk-target-reduced", type=float, default=None)
@click.option("--risk-target-annoyance", type=float, default=None)
@click.option("--alpha", type=float, default=None, help="Distance decay in (0,1].")
@click.option("--max-faults", type=int, default=None, help="Max candidate cardinality.")
@click.option("--max-joint", type=int, default=None, help="Max jointly asserted violations.")
@click.option("--mission-hours", type=float, default=None)
@click.option("--effectiveness-default", type=float, default=None,
              help="Mitigation effectiveness used when the KB omits it.")
@click.option("--seed", type=int, default=None)
@click.option("--required-ps", type=float, default=0.9, show_default=True)
@click.option("--samples", type=int, default=10000, show_default=True)
@click.option("--out", "out_path", required=True, help="Report path, or - for stdout.")
def derive(model_path, properties_path, root, kb_path, risk_target_catastrophic,
           risk_target_reduced, risk_target_annoyance, alpha, max_faults, max_joint,
           mission_hours, effectiveness_default, seed, required_ps, samples, out_path):
    """Run the full derivation and write the report."""
    overrides: dict = {}
    targets = {}
    if risk_target_catastrophic is not None:
        targets[Severity.CATASTROPHIC.value] = risk_target_catastrophic
    if risk_target_reduced is not None:
        targets[Severity.REDUCED_CAPABILITY.value] = risk_target_reduced
    if risk_target_annoyance is not None:
        targets[Severity.ANNOYANCE.value] = risk_target_annoyance
    if targets:
        overrides["base_risk_target"] = targets
    for key, value in (
        ("alpha", alpha),
        ("max_cardinality", max_faults),
        ("max_joint", max_joint),
        ("mission_hours", mission_hours),
        ("effectiveness_default", effectiveness_default),
        ("seed", seed),
    ):
        if value is not None:
            overrides[key] = value
    try:
        kb = load_kb("builtin") if kb_path == "builtin" else load_kb(_read(kb_path))
        model, doc = pipeline.load_inputs(
            _read(model_path),
            _read(properties_path),
            root=root,
            pam_file=model_path,
            properties_file=properties_path,
        )
        report = pipeline.run(
            model,
            doc,
            kb=kb,
            config=config_from_overrides(overrides),
            required_ps=required_ps,
            samples=samples,
        )
    except DcryppsError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    text = serialize_report(report)
    if out_path == "-":
        click.echo(text, nl=False)
    else:
        Path(out_path).write_text(text, "utf-8")
    click.echo(_summary_table(report))


@main.command()
@click.argument("report_path", metavar="REPORT")
@click.argument("req_id", metavar="REQ-ID")
def explain(report_path, req_id):
    """Print the provenance narrative for one requirement."""
    try:
        report = parse_report(_read(report_path))
    except DcryppsError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    requirement = next((r for r in report["requirements"] if r["id"] == req_id), None)
    if requirement is None:
        click.echo(f"error: no requirement {req_id} in this report", err=True)
        sys.exit(1)
    click.echo(f"{requirement['id']}: {requirement['text']}")
    click.echo(f"attack model: {requirement['attack']}")
    click.echo(f"targets: {', '.join(requirement['targets'])}")
    click.echo(f"mitigation effectiveness: {requirement['effectiveness']}")
    click.echo("")
    ledger_by_id = {entry["assertion"]: entry for entry in report["ledger"]}
    for prov in requirement["provenance"]:
        assertion = prov["assertion"]
        entry = ledger_by_id[assertion]
        violated = ", ".join(entry["violated"])
        if prov["rank"] == 0:
            click.echo(
                f"- asserted violation of {violated} ({assertion}): cause already "
                f"mitigated by this requirement when diagnosed"
            )
            continue
        emission = next(
            (e for e in entry["emissions"] if e["requirement"] == req_id), None
        )
        line = (
            f"- asserted violation of {violated} ({assertion}): matched at "
            f"candidate rank {prov['rank']}"
        )
        if emission is not None:
            line += (
                f"; residual {emission['residual_before']:.3e} -> "
                f"{emission['residual_after']:.3e}"
            )
        click.echo(line)
    ps = compute_ps(report)
    click.echo("")
    click.echo(f"report Ps = {ps:.6f}")


@main.command()
@click.option("--port", type=int, default=None,
              help="Listen port (default: $DCRYPPS_PORT or 8080).")
@click.option("--data-dir", default="dcrypps-data", show_default=True)
@click.option("--ui-dir", default=None, help="Static console files to serve at /.")
def serve(port, data_dir, ui_dir):
    """Run the HTTP service until interrupted."""
    import uvicorn

    from .service import create_app

    if port is None:
        env = os.environ.get("DCRYPPS_PORT")
        port = int(env) if env else 8080
    app = create_app(data_dir=data_dir, ui_dir=ui_dir)
    try:
        uvicorn.run(app, host="127.0.0.1", port=port, log_level="warning")
    except (OSError, SystemExit) as exc:
        if isinstance(exc, SystemExit) and not exc.code:
            return
        click.echo(f"error: cannot serve on port {port}: {exc}", err=True)
        sys.exit(1)


if __name__ == "__main__":
    main()
