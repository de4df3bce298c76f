"""HTTP face of the annotation workflow.

Status codes: 400 for validation problems, 403 for unknown assignments,
409 for workflow precondition failures, 404 for missing resources.
"""

from __future__ import annotations

from datetime import datetime, timezone
from typing import Optional

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, PlainTextResponse
from pydantic import BaseModel, Field

from ..risks import CANONICAL_ORDER, RiskLabelSet
from .store import (
    AnnotationRecord,
    AnnotationStore,
    PreconditionError,
    UnknownAssignmentError,
    ValidationFailure,
    export_lines,
)


class FactorInfo(BaseModel):
    name: str
    display_name: str
    short_code: str
    description: str
    index: int


class SchemaResponse(BaseModel):
    factors: list[FactorInfo]


class AssignmentOut(BaseModel):
    sample_id: str
    batch: str


class QueueResponse(BaseModel):
    annotator_id: str
    remaining: int
    assignments: list[AssignmentOut]


class SampleResponse(BaseModel):
    sample_id: str
    article_id: str
    company_id: str
    company_name: str
    headline: str
    sentences: list[str]
    truncated_text: str


class AnnotationIn(BaseModel):
    sample_id: str
    annotator_id: str
    labels: dict[str, bool] = Field(default_factory=dict)
    no_risk_confirmed: bool = False
    status: str = "submitted"
    reject_reason: Optional[str] = None


class AnnotationAck(BaseModel):
    sample_id: str
    annotator_id: str
    status: str
    labels: dict[str, bool]


class ConflictOut(BaseModel):
    positive: list[str]
    negative: list[str]


class DisagreementResponse(BaseModel):
    sample_id: str
    unanimous: bool
    submissions: dict[str, dict[str, bool]]
    conflicts: dict[str, ConflictOut]


class AdjudicationIn(BaseModel):
    sample_id: str
    labels: dict[str, bool] = Field(default_factory=dict)
    adjudicator_id: str


class GoldOut(BaseModel):
    sample_id: str
    labels: dict[str, bool]
    adjudicated_by: str
    source: str


class FactorAgreement(BaseModel):
    raw_agreement: float
    kappa: float


class AgreementResponse(BaseModel):
    factors: dict[str, FactorAgreement]


def create_app(store: AnnotationStore) -> FastAPI:
    app = FastAPI(title="newsrisk annotation service")

    @app.exception_handler(ValidationFailure)
    async def _validation(_request: Request, exc: ValidationFailure):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.exception_handler(UnknownAssignmentError)
    async def _unknown(_request: Request, exc: UnknownAssignmentError):
        return JSONResponse(status_code=403, content={"detail": str(exc)})

    @app.exception_handler(PreconditionError)
    async def _precondition(_request: Request, exc: PreconditionError):
        return JSONResponse(status_code=409, content={"detail": str(exc)})

    @app.exception_handler(RequestValidationError)
    async def _request_validation(_request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"detail": exc.errors()})

    @app.get("/schema/factors", response_model=SchemaResponse)
    def schema_factors() -> SchemaResponse:
        return SchemaResponse(
            factors=[
                FactorInfo(
                    name=factor.value,
                    display_name=factor.display_name,
                    short_code=factor.short_code,
                    description=factor.description,
                    index=index,
                )
                for index, factor in enumerate(CANONICAL_ORDER)
            ]
        )

    @app.get("/queue/{annotator_id}", response_model=QueueResponse)
    def queue(annotator_id: str) -> QueueResponse:
        pending = store.queue(annotator_id)
        return QueueResponse(
            annotator_id=annotator_id,
            remaining=len(pending),
            assignments=[
                AssignmentOut(sample_id=a.sample_id, batch=a.batch) for a in pending
            ],
        )

    @app.get("/samples/{sample_id}", response_model=SampleResponse)
    def get_sample(sample_id: str):
        sample = store.samples.get(sample_id)
        if sample is None:
            return JSONResponse(
                status_code=404, content={"detail": f"unknown sample {sample_id!r}"}
            )
        return SampleResponse(
            sample_id=sample.sample_id,
            article_id=sample.article_id,
            company_id=sample.company_id,
            company_name=sample.company_name,
            headline=sample.headline,
            sentences=list(sample.sentences),
            truncated_text=sample.truncated_text,
        )

    @app.post("/annotations", response_model=AnnotationAck)
    def post_annotation(body: AnnotationIn) -> AnnotationAck:
        try:
            labels = RiskLabelSet.from_mapping(body.labels)
        except ValueError as exc:
            raise ValidationFailure(str(exc)) from exc
        try:
            record = AnnotationRecord(
                sample_id=body.sample_id,
                annotator_id=body.annotator_id,
                labels=labels,
                no_risk_confirmed=body.no_risk_confirmed,
                submitted_at=datetime.now(timezone.utc),
                status=body.status,
                reject_reason=body.reject_reason,
            )
        except ValueError as exc:
            raise ValidationFailure(str(exc)) from exc
        stored = store.submit(record)
        return AnnotationAck(
            sample_id=stored.sample_id,
            annotator_id=stored.annotator_id,
            status=stored.status,
            labels=stored.labels.to_mapping(),
        )

    @app.get("/disagreements/{sample_id}", response_model=DisagreementResponse)
    def disagreements(sample_id: str) -> DisagreementResponse:
        report = store.disagreements(sample_id)
        return DisagreementResponse(
            sample_id=report.sample_id,
            unanimous=report.unanimous,
            submissions={
                annotator: labels.to_mapping()
                for annotator, labels in report.submissions.items()
            },
            conflicts={
                factor.value: ConflictOut(positive=list(pos), negative=list(neg))
                for factor, (pos, neg) in report.conflicts.items()
            },
        )

    @app.post("/adjudications", response_model=GoldOut)
    def post_adjudication(body: AdjudicationIn) -> GoldOut:
        try:
            labels = RiskLabelSet.from_mapping(body.labels)
        except ValueError as exc:
            raise ValidationFailure(str(exc)) from exc
        gold = store.adjudicate(body.sample_id, labels, body.adjudicator_id)
        return GoldOut(
            sample_id=gold.sample_id,
            labels=gold.labels.to_mapping(),
            adjudicated_by=gold.adjudicated_by,
            source=gold.source,
        )

    @app.get("/stats/agreement", response_model=AgreementResponse)
    def agreement() -> AgreementResponse:
        stats = store.agreement_stats()
        return AgreementResponse(
            factors={
                factor.value: FactorAgreement(**values)
                for factor, values in stats.items()
            }
        )

    @app.get("/export/gold", response_class=PlainTextResponse)
    def export_gold() -> PlainTextResponse:
        result = store.export_gold()
        return PlainTextResponse(
            export_lines(result),
            headers={
                "x-excluded-unadjudicated": str(result.excluded_unadjudicated),
                "x-excluded-rejected": str(result.excluded_rejected),
            },
        )

    return app
