"""HTTP/JSON facade over the workbench.

Every route delegates to :class:`cxrboard.workbench.Workbench`; the only
logic here is translating domain errors to status codes and shaping
machine-readable error bodies ({code, message, details}).  The service
holds no state above the session logs: restart and replay.
"""

from __future__ import annotations

from typing import Literal

from fastapi import FastAPI, Query, Request, Response
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .errors import (
    IncompleteReview,
    MissingGeometry,
    SessionFinalized,
    StageNotReachable,
    UnknownFinding,
    UnknownSession,
    UnknownStudy,
    UnreadableFile,
    WorkbenchError,
)
from .workbench import Workbench

_NOT_FOUND = (UnknownStudy, UnknownSession, UnknownFinding, UnreadableFile)
_CONFLICT = (StageNotReachable, SessionFinalized, IncompleteReview, MissingGeometry)


def _status_for(exc: WorkbenchError) -> int:
    if isinstance(exc, _NOT_FOUND):
        return 404
    if isinstance(exc, _CONFLICT):
        return 409
    return 400


def _error_body(exc: WorkbenchError) -> dict:
    body = {"code": exc.code, "message": str(exc), "details": {}}
    if isinstance(exc, IncompleteReview):
        body["details"] = {
            "missing_stages": exc.missing_stages,
            "unverdicted": exc.unverdicted,
        }
    return body


class SessionCreate(BaseModel):
    image_id: str
    clinician_id: str


class VerdictBody(BaseModel):
    finding_id: str
    verdict: Literal["ACCEPT", "REJECT", "UNCERTAIN"]
    note: str = ""


class BackBody(BaseModel):
    stage: str


class ManualCheckBody(BaseModel):
    key: str = Field(min_length=1)
    value: bool


def create_app(workbench: Workbench) -> FastAPI:
    app = FastAPI(title="cxrboard", docs_url=None, redoc_url=None)

    @app.exception_handler(WorkbenchError)
    async def _workbench_error(request: Request, exc: WorkbenchError):
        return JSONResponse(status_code=_status_for(exc), content=_error_body(exc))

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    @app.get("/studies")
    def list_studies():
        return workbench.list_studies()

    @app.get("/studies/{image_id}")
    def study_detail(image_id: str):
        return workbench.study_detail(image_id)

    @app.post("/sessions", status_code=201)
    def create_session(body: SessionCreate):
        state = workbench.start_session(body.image_id, body.clinician_id)
        return state.to_dict()

    @app.get("/sessions/{session_id}")
    def session_state(session_id: str):
        return workbench.session_state(session_id).to_dict()

    @app.get("/sessions/{session_id}/stages/{stage}")
    def stage_view(
        session_id: str,
        stage: str,
        vw: int = Query(default=0, ge=0),
        vh: int = Query(default=0, ge=0),
    ):
        return workbench.stage_view(session_id, stage, vw, vh)

    @app.post("/sessions/{session_id}/verdicts")
    def set_verdict(session_id: str, body: VerdictBody):
        state = workbench.set_verdict(session_id, body.finding_id, body.verdict, body.note)
        return state.to_dict()

    @app.post("/sessions/{session_id}/manual-checks")
    def set_manual_check(session_id: str, body: ManualCheckBody):
        state = workbench.set_manual_check(session_id, body.key, body.value)
        return state.to_dict()

    @app.post("/sessions/{session_id}/advance")
    def advance(session_id: str):
        state = workbench.advance(session_id)
        return {"stage_cursor": state.stage_cursor, "visited": state.to_dict()["visited"]}

    @app.post("/sessions/{session_id}/back")
    def back(session_id: str, body: BackBody):
        state = workbench.back(session_id, body.stage)
        return {"stage_cursor": state.stage_cursor, "visited": state.to_dict()["visited"]}

    @app.post("/sessions/{session_id}/finalize")
    def finalize(session_id: str):
        return workbench.finalize(session_id)

    @app.get("/sessions/{session_id}/report")
    def report(session_id: str):
        return workbench.get_report(session_id)

    @app.get("/images/{image_id}/crop")
    def crop(
        image_id: str,
        x0: int,
        y0: int,
        x1: int,
        y1: int,
        w: int = Query(ge=1, le=4096),
        h: int = Query(ge=1, le=4096),
    ):
        png = workbench.crop_png(image_id, x0, y0, x1, y1, w, h)
        return Response(content=png, media_type="image/png")

    @app.get("/findings/{finding_id}/viewport")
    def finding_viewport(
        finding_id: str,
        vw: int = Query(ge=1, le=16384),
        vh: int = Query(ge=1, le=16384),
    ):
        return workbench.viewport_for_finding(finding_id, vw, vh).to_dict()

    return app
