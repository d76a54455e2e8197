"""HTTP prediction service: features in, labels out, never any form values.

The wire schema has no slot for field values, so the privacy boundary is
enforced by construction; request logging records counts and latencies only.
"""

from __future__ import annotations

import json
import logging
import threading
import time
from dataclasses import dataclass
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, ConfigDict, Field

from .ensemble import EnsemblePolicy, LookupTable, ensemble_predict
from .extractor import FieldFeatures
from .forest import ForestModel
from .forest import load as load_model
from .rules import RuleSet, load_rules_file

logger = logging.getLogger("fieldsense.service")

MAX_FIELDS_PER_REQUEST = 256


class WireField(BaseModel):
    model_config = ConfigDict(extra="forbid")

    label: str = ""
    name: str = ""
    id: str = ""
    control_type: str = ""
    url: str = ""


class PredictRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    fields: list[WireField]


class WirePrediction(BaseModel):
    field_index: int
    class_name: str
    confidence: float
    source: str
    scores: dict[str, float] | None = None


class PredictResponse(BaseModel):
    model_version: str
    predictions: list[WirePrediction]


@dataclass(frozen=True)
class Snapshot:
    """One immutable serving state; requests never see a torn mixture."""

    model: ForestModel
    ruleset: RuleSet | None
    lookup: LookupTable | None
    policy: EnsemblePolicy


class SnapshotStore:
    """Holds the current snapshot; swaps are atomic reference assignments."""

    def __init__(
        self,
        model_path: str | Path | None = None,
        rules_path: str | Path | None = None,
        lookup_path: str | Path | None = None,
        threshold: float = 0.5,
    ) -> None:
        self._model_path = model_path
        self._rules_path = rules_path
        self._lookup_path = lookup_path
        self._threshold = threshold
        self._lock = threading.Lock()
        self.snapshot: Snapshot | None = None

    def install(self, snapshot: Snapshot) -> None:
        self.snapshot = snapshot

    @property
    def reloadable(self) -> bool:
        return self._model_path is not None

    def reload(self) -> Snapshot:
        """Re-read the configured files and swap them in as one snapshot."""
        if self._model_path is None:
            raise ValueError("store was not configured with a model path")
        with self._lock:  # serialize file reads, not serving
            model = load_model(Path(self._model_path).read_bytes())
            ruleset = load_rules_file(self._rules_path) if self._rules_path else None
            lookup = LookupTable.load(self._lookup_path) if self._lookup_path else None
            snapshot = Snapshot(
                model=model,
                ruleset=ruleset,
                lookup=lookup,
                policy=EnsemblePolicy(forest_confidence_threshold=self._threshold),
            )
            self.install(snapshot)
            return snapshot


def _error(status: int, message: str, path: str | None = None) -> JSONResponse:
    body: dict = {"error": message}
    if path is not None:
        body["path"] = path
    return JSONResponse(status_code=status, content=body)


def _loc_to_path(loc: tuple) -> str:
    parts = [str(p) for p in loc if p != "body"]
    return ".".join(parts) if parts else "body"


def create_app(store: SnapshotStore, log_requests: bool = False) -> FastAPI:
    app = FastAPI(title="fieldsense", docs_url=None, redoc_url=None)

    @app.exception_handler(RequestValidationError)
    async def on_validation_error(request: Request, exc: RequestValidationError):
        first = exc.errors()[0] if exc.errors() else {"loc": (), "msg": "invalid body"}
        return _error(400, f"schema violation: {first.get('msg')}", _loc_to_path(tuple(first.get("loc", ()))))

    if log_requests:

        @app.middleware("http")
        async def request_log(request: Request, call_next):
            start = time.monotonic()
            response = await call_next(request)
            record = {
                "event": "request",
                "method": request.method,
                "path": request.url.path,
                "status": response.status_code,
                "fields": getattr(request.state, "field_count", None),
                "duration_ms": round((time.monotonic() - start) * 1000, 3),
            }
            logger.info(json.dumps(record))
            return response

    @app.get("/healthz")
    async def healthz():
        if store.snapshot is None:
            return _error(503, "model not loaded")
        return {"status": "ok"}

    @app.get("/v1/model")
    async def model_info():
        snap = store.snapshot
        if snap is None:
            return _error(503, "model not loaded")
        m = snap.model
        return {
            "model_version": m.model_version,
            "class_names": list(m.class_names),
            "vocabulary_width": m.vocabulary.total_width,
            "params": {
                "tree_count": m.params.tree_count,
                "max_depth": m.params.max_depth,
                "random_splits_per_node": m.params.random_splits_per_node,
                "min_samples_per_leaf": m.params.min_samples_per_leaf,
                "resampling": m.params.resampling,
                "seed": m.params.seed,
            },
        }

    @app.post("/v1/predict")
    async def predict(request: Request, body: PredictRequest):
        request.state.field_count = len(body.fields)
        if not body.fields:
            return _error(400, "schema violation: fields must be non-empty", "fields")
        if len(body.fields) > MAX_FIELDS_PER_REQUEST:
            return _error(
                413, f"too many fields: {len(body.fields)} > {MAX_FIELDS_PER_REQUEST}"
            )
        snap = store.snapshot  # read once: one consistent snapshot per request
        if snap is None:
            return _error(503, "model not loaded")

        predictions = []
        for i, wire in enumerate(body.fields):
            if not (wire.label or wire.name or wire.id):
                return _error(
                    400,
                    "schema violation: at least one of label, name, id must be non-empty",
                    f"fields.{i}",
                )
            features = FieldFeatures(
                label_text=wire.label,
                name=wire.name,
                id=wire.id,
                control_type=wire.control_type.strip().lower() or "text",
                page_url=wire.url,
            )
            result = ensemble_predict(features, snap.lookup, snap.ruleset, snap.model, snap.policy)
            predictions.append(
                WirePrediction(
                    field_index=i,
                    class_name=result.class_name,
                    confidence=result.confidence,
                    source=result.source,
                    scores=result.detail if isinstance(result.detail, dict) else None,
                )
            )
        return PredictResponse(
            model_version=snap.model.model_version, predictions=predictions
        )

    @app.post("/v1/reload")
    async def reload():
        if not store.reloadable:
            return _error(400, "reload not configured: store has no model path")
        snapshot = store.reload()
        return {"status": "ok", "model_version": snapshot.model.model_version}

    return app
