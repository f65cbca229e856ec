"""HTTP/JSON facade over the pipeline: model upload, derivation, what-if runs,
report retrieval.

Persistence is an append-only on-disk store of JSON documents keyed by
content-hash tokens, so any stored report can be regenerated byte-identically
from its model and config. What-if runs never persist anything.
"""

from __future__ import annotations

import datetime
import hashlib
import json
import threading
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from . import pipeline
from .attacks import load_kb
from .derivation import config_from_overrides, diff_reports, serialize_report
from .errors import DcryppsError
from .model import from_canonical, to_canonical
from .pamela import load_model
from .properties import parse_properties


class ApiError(Exception):
    def __init__(self, status: int, code: str, detail: str):
        super().__init__(detail)
        self.status = status
        self.code = code
        self.detail = detail


class Store:
    """Append-only document store; tokens are content-hash prefixes plus a
    monotonic counter."""

    def __init__(self, root: Path):
        self.root = Path(root)
        (self.root / "models").mkdir(parents=True, exist_ok=True)
        (self.root / "reports").mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    def _next_token(self, kind: str, payload: str) -> str:
        digest = hashlib.sha256(payload.encode("utf-8")).hexdigest()[:12]
        count = len(list((self.root / f"{kind}s").glob("*.json")))
        return f"{kind[0]}-{digest}-{count + 1}"

    def put(self, kind: str, record: dict, payload: str) -> str:
        with self._lock:
            token = self._next_token(kind, payload)
            record = {f"{kind}_id": token, **record}
            path = self.root / f"{kind}s" / f"{token}.json"
            path.write_text(json.dumps(record, indent=2, ensure_ascii=False) + "\n", "utf-8")
            return token

    def get(self, kind: str, token: str) -> dict:
        path = self.root / f"{kind}s" / f"{token}.json"
        if not path.is_file():
            raise ApiError(404, f"unknown-{kind}", f"no such {kind}: {token}")
        return json.loads(path.read_text("utf-8"))


class ModelUpload(BaseModel):
    model: str
    properties: str
    root: str | None = None


class DeriveRequest(BaseModel):
    config: dict = {}
    required_ps: float = 0.9
    samples: int = 10000
    uncertainty: dict = {}


class WhatIfRequest(DeriveRequest):
    baseline_report_id: str | None = None


def _load_stored_model(record: dict):
    model = from_canonical(record["model"])
    doc = parse_properties(record["properties"])
    return pipeline.attach_observables(model, doc), doc


def _run_from_record(record: dict, body: DeriveRequest) -> dict:
    try:
        config = config_from_overrides(body.config)
        model, doc = _load_stored_model(record)
        return pipeline.run(
            model,
            doc,
            config=config,
            required_ps=body.required_ps,
            samples=body.samples,
            uncertainty=body.uncertainty,
        )
    except DcryppsError as exc:
        raise ApiError(422, "invalid-config", str(exc)) from exc


def create_app(data_dir: Path | str = "dcrypps-data", ui_dir: Path | str | None = None) -> FastAPI:
    app = FastAPI(title="dcrypps", version="0.1.0")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    store = Store(Path(data_dir))

    @app.exception_handler(ApiError)
    async def api_error_handler(_request: Request, exc: ApiError):
        return JSONResponse(
            status_code=exc.status, content={"code": exc.code, "detail": exc.detail}
        )

    @app.post("/api/models", status_code=201)
    def upload_model(body: ModelUpload):
        issues = pipeline.validate_inputs(body.model, body.properties, root=body.root)
        if issues:
            raise ApiError(422, "invalid-model", json.dumps(issues))
        model = load_model(body.model, root=body.root)
        canonical = to_canonical(model)
        token = store.put(
            "model",
            {
                "model": canonical,
                "properties": body.properties,
                "root": body.root,
                "created_at": datetime.datetime.now(datetime.timezone.utc).isoformat(),
            },
            canonical + body.properties,
        )
        return {"model_id": token, "issues": []}

    @app.get("/api/models/{model_id}")
    def get_model(model_id: str):
        return store.get("model", model_id)

    @app.post("/api/models/{model_id}/derive")
    def derive_model(model_id: str, body: DeriveRequest):
        record = store.get("model", model_id)
        report = _run_from_record(record, body)
        token = store.put(
            "report",
            {
                "model_id": model_id,
                "request": body.model_dump(),
                "report": report,
            },
            serialize_report(report),
        )
        return {"report_id": token, "model_id": model_id, "report": report}

    @app.post("/api/models/{model_id}/whatif")
    def whatif(model_id: str, body: WhatIfRequest):
        record = store.get("model", model_id)
        baseline = None
        if body.baseline_report_id is not None:
            baseline_record = store.get("report", body.baseline_report_id)
            if baseline_record["model_id"] != model_id:
                raise ApiError(
                    409,
                    "baseline-mismatch",
                    f"report {body.baseline_report_id} belongs to model "
                    f"{baseline_record['model_id']}, not {model_id}",
                )
            baseline = baseline_record["report"]
        report = _run_from_record(record, body)
        diff = diff_reports(baseline, report) if baseline is not None else None
        return {"report": report, "diff": diff}

    @app.get("/api/reports/{report_id}")
    def get_report(report_id: str):
        return store.get("report", report_id)

    @app.get("/api/attack-kb")
    def attack_kb():
        kb = load_kb("builtin")
        return {
            "attacks": [
                {
                    "id": attack.id,
                    "name": attack.name,
                    "category": attack.category,
                    "base_likelihood": attack.base_likelihood,
                    "mitigation_effectiveness": attack.mitigation_effectiveness,
                    "targets": attack.target_selector,
                    "template": attack.requirement_template,
                    "wan_template": attack.wan_template,
                    "applicability": {
                        "kinds": sorted(attack.applicability.required_kind),
                        "edges": list(attack.applicability.required_edges),
                        "exposure": sorted(attack.applicability.required_exposure),
                        "requires_deadline": attack.applicability.requires_deadline,
                        "remote_channels": sorted(attack.applicability.requires_remote_channel),
                        "requires_physical_access": attack.applicability.requires_physical_access,
                    },
                }
                for attack in kb
            ]
        }

    if ui_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
