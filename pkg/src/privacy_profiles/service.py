"""HTTP facade: classify a questionnaire into a profile and recommend the
missing settings from that profile's cluster.

The service holds immutable snapshots loaded at startup (model, question
catalog, per-cluster ratings matrices) and never mutates them, so identical
request bodies produce byte-identical responses and concurrent requests need
no locking.  Error bodies are always {code, message, detail}.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from . import corpus
from .classifier import NetworkModel, load_model, predict_scores, snapshot_digest
from .clustering import profile_names
from .errors import ParameterError
from .recommender import RatingsMatrix, recommend_top_n

DEFAULT_SUBSET = "G+AP2"


class ClassifyRequest(BaseModel):
    answers: dict[str, float] = {}


class RecommendRequest(BaseModel):
    profile_id: int | None = None
    known: dict[str, float] = {}
    k: int = 15
    n: int = 50


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str, detail: str | None = None):
        self.status = status
        self.code = code
        self.message = message
        self.detail = detail
        super().__init__(message)


@dataclass
class ServiceState:
    catalog: corpus.QuestionCatalog
    model: NetworkModel | None = None
    model_digest: str | None = None
    matrices: list[RatingsMatrix | None] | None = None
    names: list[str] = field(default_factory=list)
    alias_to_pos: dict[str, int] = field(default_factory=dict)

    @property
    def recommender_ready(self) -> bool:
        return self.matrices is not None


def _project_catalog(catalog: corpus.QuestionCatalog, aliases: list[str]) -> corpus.QuestionCatalog:
    by_alias = {q.alias: q for q in catalog.questions}
    missing = [a for a in aliases if a not in by_alias]
    if missing:
        raise ParameterError(f"taxonomy lacks model features: {missing[:5]}")
    questions = [
        dataclasses.replace(by_alias[a], id=i) for i, a in enumerate(aliases)
    ]
    return corpus.QuestionCatalog(questions)


def build_state(
    model_path: str | Path | None,
    data_path: str | Path | None = None,
    taxonomy_path: str | Path | None = None,
    clustering_path: str | Path | None = None,
    subset: str = DEFAULT_SUBSET,
) -> ServiceState:
    """Load immutable snapshots.  The ratings matrices need data plus the
    clustering assignment; without them the service runs classify-only."""
    full_catalog = (
        corpus.load_taxonomy(taxonomy_path) if taxonomy_path else corpus.reference_catalog()
    )

    model = None
    digest = None
    if model_path is not None:
        model = load_model(model_path)
        digest = snapshot_digest(model_path)

    if model is not None and model.feature_aliases:
        catalog = _project_catalog(full_catalog, model.feature_aliases)
    else:
        ids = full_catalog.subset_ids(subset.split("+"))
        catalog = _project_catalog(full_catalog, [full_catalog.questions[i].alias for i in ids])

    matrices = None
    if data_path is not None:
        if clustering_path is None:
            raise ParameterError("recommendations need --clustering next to --data")
        if model is None:
            raise ParameterError("recommendations need a model snapshot")
        dataset = corpus.load_dataset(data_path, full_catalog)
        projected = corpus.select_subset(dataset, subset.split("+"))
        if projected.catalog.aliases != catalog.aliases:
            raise ParameterError("dataset subset does not match the model's features")
        assignment = _read_assignment(clustering_path, projected.user_ids)
        features = projected.matrix()
        matrices = []
        for c in range(model.kappa):
            members = np.flatnonzero(assignment == c)
            if len(members) == 0:
                matrices.append(None)
            else:
                matrices.append(
                    RatingsMatrix(
                        features[members],
                        [projected.users[i].user_id for i in members],
                        catalog.aliases,
                    )
                )

    kappa = model.kappa if model is not None else 0
    return ServiceState(
        catalog=catalog,
        model=model,
        model_digest=digest,
        matrices=matrices,
        names=profile_names(kappa),
        alias_to_pos={a: i for i, a in enumerate(catalog.aliases)},
    )


def _read_assignment(path: str | Path, user_ids: list[str]) -> np.ndarray:
    by_user = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != ["user_id", "cluster"]:
            raise ParameterError(f"{path}: expected header user_id,cluster")
        for row in reader:
            by_user[row["user_id"]] = int(row["cluster"])
    missing = [u for u in user_ids if u not in by_user]
    if missing:
        raise ParameterError(f"clustering file lacks users: {missing[:5]}")
    return np.array([by_user[u] for u in user_ids], dtype=np.int64)


def create_app(state: ServiceState) -> FastAPI:
    app = FastAPI(title="privacy-profile service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    def error_body(code: str, message: str, detail=None) -> dict:
        return {"code": code, "message": message, "detail": detail}

    @app.exception_handler(ApiError)
    def handle_api_error(request: Request, exc: ApiError):
        return JSONResponse(
            status_code=exc.status, content=error_body(exc.code, exc.message, exc.detail)
        )

    @app.exception_handler(RequestValidationError)
    def handle_validation(request: Request, exc: RequestValidationError):
        first = exc.errors()[0] if exc.errors() else {}
        return JSONResponse(
            status_code=400,
            content=error_body("bad_request", "malformed request body", str(first.get("msg", ""))),
        )

    def require_model() -> NetworkModel:
        if state.model is None:
            raise ApiError(503, "model_not_loaded", "no model snapshot is loaded")
        return state.model

    def features_from(answers: dict[str, float], field_name: str) -> tuple[np.ndarray, list[str]]:
        features = np.zeros(state.catalog.width)
        for alias, value in answers.items():
            pos = state.alias_to_pos.get(alias)
            if pos is None:
                raise ApiError(400, "unknown_alias", f"unknown question alias {alias!r}")
            if value not in (0.0, 1.0):
                raise ApiError(
                    400, "invalid_value", f"{field_name}[{alias!r}] must be 0 or 1"
                )
            features[pos] = value
        assumed = sorted(set(state.catalog.aliases) - set(answers))
        return features, assumed

    @app.get("/api/health")
    def health():
        if state.model is None:
            return JSONResponse(
                status_code=503,
                content=error_body("model_not_loaded", "no model snapshot is loaded"),
            )
        return {
            "status": "ok",
            "model_digest": state.model_digest,
            "recommender_ready": state.recommender_ready,
        }

    questions_payload = [
        {
            "alias": q.alias,
            "text": q.text,
            "group": q.group,
            "value_kind": q.value_kind,
            "position": q.id,
        }
        for q in state.catalog.questions
    ]
    questions_etag = hashlib.sha256(
        json.dumps(questions_payload, sort_keys=True).encode()
    ).hexdigest()

    @app.get("/api/questions")
    def questions():
        return JSONResponse(content=questions_payload, headers={"ETag": questions_etag})

    def classify_features(features: np.ndarray) -> tuple[int, list[float]]:
        model = require_model()
        scores = predict_scores(model, features)
        return int(np.argmax(scores)), [float(s) for s in scores]

    @app.post("/api/classify")
    def classify(body: ClassifyRequest):
        features, assumed = features_from(body.answers, "answers")
        profile_id, scores = classify_features(features)
        return {
            "profile_id": profile_id,
            "profile_name": state.names[profile_id],
            "class_scores": scores,
            "assumed": assumed,
            "model_digest": state.model_digest,
        }

    @app.post("/api/recommend")
    def recommend(body: RecommendRequest):
        model = require_model()
        if not state.recommender_ready:
            raise ApiError(503, "recommender_unavailable", "service is in classify-only mode")
        if body.profile_id is None and not body.known:
            raise ApiError(422, "no_evidence", "provide known settings or a profile_id")
        if body.k < 1:
            raise ApiError(400, "invalid_value", "k must be >= 1")
        if body.n < 0:
            raise ApiError(400, "invalid_value", "n must be >= 0")

        features, _ = features_from(body.known, "known")
        if body.profile_id is not None:
            if not 0 <= body.profile_id < model.kappa:
                raise ApiError(400, "unknown_profile", f"profile_id {body.profile_id} out of range")
            profile_id = body.profile_id
        else:
            profile_id, _ = classify_features(features)

        matrix = state.matrices[profile_id]
        if matrix is None:
            raise ApiError(503, "cluster_empty", f"profile {profile_id} has no member data")

        if body.known:
            target = np.full(state.catalog.width, np.nan)
            for alias, value in body.known.items():
                target[state.alias_to_pos[alias]] = value
            result = recommend_top_n(matrix, target, k=body.k, n=body.n)
            entries = [
                {"setting": e.alias, "score": e.score, "value": e.value, "fallback": e.fallback}
                for e in result.entries
            ]
        else:
            # no personal evidence: rank the cluster's prevailing settings
            means = matrix.values.mean(axis=0)
            ranked = sorted(
                ((float(means[i]), a) for i, a in enumerate(matrix.aliases)),
                key=lambda t: (-t[0], t[1]),
            )
            entries = [
                {"setting": a, "score": m, "value": 1 if m >= 0.5 else 0, "fallback": True}
                for m, a in ranked[: body.n]
            ]

        return {
            "profile_id": profile_id,
            "profile_name": state.names[profile_id],
            "k": body.k,
            "n": body.n,
            "entries": entries,
            "model_digest": state.model_digest,
        }

    return app
