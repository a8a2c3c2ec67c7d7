"""HTTP endpoints backing the annotation UI.

GET  /tasks/next?annotator=ID  -> TaskPayload or 204 when the queue is done
POST /annotators               -> register an annotator
POST /annotations              -> submit one AnnotationRecord
GET  /progress                 -> per-annotator and overall counts
GET  /export                   -> ground truth as JSON lines
"""

from __future__ import annotations

import json

from fastapi import FastAPI, HTTPException, Response
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel

from ..core import AnnotationRecord, Label
from .store import AnnotationStore, UnknownAnnotatorError


class AnnotationIn(BaseModel):
    video_id: str
    annotator_id: str
    label: str


class AnnotatorIn(BaseModel):
    annotator_id: str


def create_app(store: AnnotationStore) -> FastAPI:
    app = FastAPI(title="vidguard annotation service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.post("/annotators", status_code=201)
    def register(body: AnnotatorIn):
        store.register(body.annotator_id)
        return {"annotator_id": body.annotator_id}

    @app.get("/tasks/next")
    def next_task(annotator: str):
        try:
            task = store.next_task(annotator)
        except UnknownAnnotatorError:
            raise HTTPException(status_code=404, detail=f"unknown annotator: {annotator}")
        if task is None:
            return Response(status_code=204)
        return task.to_dict()

    @app.post("/annotations", status_code=201)
    def submit(body: AnnotationIn):
        try:
            label = Label(body.label)
        except ValueError:
            raise HTTPException(status_code=422, detail=f"unknown label: {body.label}")
        record = AnnotationRecord(body.video_id, body.annotator_id, label)
        try:
            store.submit(record)
        except UnknownAnnotatorError:
            raise HTTPException(
                status_code=404, detail=f"unknown annotator: {body.annotator_id}"
            )
        except KeyError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        return {"status": "stored"}

    @app.get("/progress")
    def progress():
        return store.progress()

    @app.get("/export")
    def export():
        entries, excluded = store.export_ground_truth()
        lines = [json.dumps(e.to_dict(), ensure_ascii=False) for e in entries]
        body = "\n".join(lines) + ("\n" if lines else "")
        return Response(
            content=body,
            media_type="application/x-ndjson",
            headers={"X-Excluded-Count": str(excluded)},
        )

    return app


def serve(store: AnnotationStore, host: str = "127.0.0.1", port: int = 8400) -> None:
    import uvicorn

    uvicorn.run(create_app(store), host=host, port=port, log_level="warning")
