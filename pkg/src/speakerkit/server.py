"""HTTP surface: jobs, setups, results, speaker registry.

Thin JSON layer over the orchestrator; all state lives in its data directory.
"""

from __future__ import annotations

import hashlib
import json
import threading
from dataclasses import asdict
from pathlib import Path

from fastapi import FastAPI, File, Form, Request, UploadFile
from fastapi.responses import JSONResponse, PlainTextResponse, Response
from fastapi.staticfiles import StaticFiles

from .audio import decode_wav
from .errors import (
    IndexOutOfRange,
    MalformedContainer,
    RevisionConflict,
    SpeakerkitError,
    TooShort,
    UnknownSetup,
    UnsupportedEncoding,
)
from .orchestrator import Orchestrator
from .transcript import apply_edit, doc_to_dict, export_srt


def _error(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"code": code, "message": message})


def _setup_to_dict(s) -> dict:
    return {
        "setup_id": s.setup_id,
        "title": s.title,
        "description": s.description,
        "preprocessing": s.preprocessing,
        "backend_id": s.backend_id,
        "si": {
            "enabled": s.si.enabled,
            "speaker_set_id": s.si.speaker_set_id,
            "open_set": s.si.params.open_set,
            "threshold": s.si.params.threshold,
        },
        "asr": {"engine_id": s.asr.engine_id, "language": s.asr.language},
    }


def create_app(orch: Orchestrator, static_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="speakerkit")
    edit_lock = threading.Lock()

    catalog_payload = [_setup_to_dict(s) for s in orch.catalog()]
    catalog_etag = '"' + hashlib.sha1(json.dumps(catalog_payload, sort_keys=True).encode()).hexdigest()[:16] + '"'

    @app.exception_handler(SpeakerkitError)
    async def _domain_error(request: Request, exc: SpeakerkitError):
        return _error(500, "internal", str(exc))

    @app.exception_handler(Exception)
    async def _unhandled(request: Request, exc: Exception):
        # no stack traces on the wire
        return _error(500, "internal", "internal error")

    @app.get("/api/setups")
    def get_setups():
        return Response(
            content=json.dumps(catalog_payload),
            media_type="application/json",
            headers={"ETag": catalog_etag},
        )

    @app.post("/api/jobs", status_code=202)
    async def post_job(file: UploadFile = File(...), setup_id: str = Form(...)):
        media = await file.read()
        if len(media) > orch.config.max_upload_bytes:
            return _error(400, "validation", "upload exceeds size limit")
        try:
            job_id = orch.submit(media, setup_id)
        except UnknownSetup as e:
            return _error(400, "unknown_setup", str(e))
        except (MalformedContainer, UnsupportedEncoding) as e:
            return _error(400, "malformed_media", str(e))
        return {"job_id": job_id}

    @app.get("/api/jobs")
    def list_jobs():
        return [asdict(j) for j in orch.list_jobs()]

    @app.get("/api/jobs/{job_id}")
    def get_job(job_id: str):
        job = orch.get_job(job_id)
        if job is None:
            return _error(404, "not_found", f"no job {job_id}")
        return asdict(job)

    @app.get("/api/jobs/{job_id}/result")
    def get_result(job_id: str):
        job = orch.get_job(job_id)
        if job is None:
            return _error(404, "not_found", f"no job {job_id}")
        if job.state != "COMPLETED":
            return _error(409, "validation", f"job is {job.state}, result not available")
        return doc_to_dict(orch.get_result(job_id))

    @app.patch("/api/jobs/{job_id}/result")
    def patch_result(job_id: str, edit: dict):
        job = orch.get_job(job_id)
        if job is None:
            return _error(404, "not_found", f"no job {job_id}")
        if job.state != "COMPLETED":
            return _error(409, "validation", f"job is {job.state}, result not editable")
        for key in ("segment_index", "expected_revision"):
            if key not in edit:
                return _error(400, "validation", f"missing {key!r}")
        with edit_lock:
            doc = orch.get_result(job_id)
            try:
                doc = apply_edit(doc, edit)
            except RevisionConflict as e:
                return _error(409, "revision_conflict", str(e))
            except IndexOutOfRange as e:
                return _error(400, "validation", str(e))
            orch.save_result(job_id, doc)
        return doc_to_dict(doc)

    @app.get("/api/jobs/{job_id}/export")
    def export(job_id: str, format: str = "srt"):
        if format != "srt":
            return _error(400, "validation", f"unsupported export format {format!r}")
        job = orch.get_job(job_id)
        if job is None:
            return _error(404, "not_found", f"no job {job_id}")
        if job.state != "COMPLETED":
            return _error(409, "validation", f"job is {job.state}, nothing to export")
        return PlainTextResponse(export_srt(orch.get_result(job_id)))

    @app.get("/api/jobs/{job_id}/media")
    def get_media(job_id: str, request: Request):
        job = orch.get_job(job_id)
        if job is None:
            return _error(404, "not_found", f"no job {job_id}")
        data = orch.media_path(job_id).read_bytes()
        range_header = request.headers.get("range")
        if range_header and range_header.startswith("bytes="):
            spec = range_header[len("bytes="):].split(",")[0].strip()
            start_s, _, end_s = spec.partition("-")
            try:
                if start_s == "":
                    n = int(end_s)
                    start, end = max(0, len(data) - n), len(data) - 1
                else:
                    start = int(start_s)
                    end = int(end_s) if end_s else len(data) - 1
            except ValueError:
                return _error(400, "validation", "bad Range header")
            if start >= len(data):
                return _error(416, "validation", "range out of bounds")
            end = min(end, len(data) - 1)
            chunk = data[start : end + 1]
            return Response(
                content=chunk,
                status_code=206,
                media_type="audio/wav",
                headers={
                    "Content-Range": f"bytes {start}-{end}/{len(data)}",
                    "Accept-Ranges": "bytes",
                },
            )
        return Response(content=data, media_type="audio/wav", headers={"Accept-Ranges": "bytes"})

    # -- speaker registry ----------------------------------------------

    def _set_to_dict(s) -> dict:
        return {
            "set_id": s.set_id,
            "backend_id": s.backend_id,
            "profiles": [
                {
                    "speaker_id": p.speaker_id,
                    "display_name": p.display_name,
                    "n_utterances": p.n_utterances,
                    "enrolled_at": p.enrolled_at,
                }
                for p in s.profiles
            ],
        }

    @app.get("/api/speaker-sets")
    def list_speaker_sets():
        return [_set_to_dict(orch.speaker_sets.load(sid)) for sid in orch.speaker_sets.list_ids()]

    @app.post("/api/speaker-sets", status_code=201)
    def create_speaker_set(body: dict):
        set_id = body.get("set_id")
        if not set_id:
            return _error(400, "validation", "set_id required")
        try:
            s = orch.speaker_sets.create(set_id, body.get("backend_id", "baseline-melstats"))
        except ValueError as e:
            return _error(400, "validation", str(e))
        return _set_to_dict(s)

    @app.post("/api/speaker-sets/{set_id}/speakers", status_code=201)
    async def enroll_speaker(
        set_id: str,
        display_name: str = Form(...),
        files: list[UploadFile] = File(...),
    ):
        if not orch.speaker_sets.exists(set_id):
            return _error(404, "not_found", f"no speaker set {set_id}")
        utterances = []
        for f in files:
            raw = await f.read()
            try:
                utterances.append(decode_wav(raw))
            except (MalformedContainer, UnsupportedEncoding) as e:
                return _error(400, "malformed_media", f"{f.filename}: {e}")
        try:
            profile = orch.speaker_sets.enroll(set_id, display_name, utterances)
        except TooShort as e:
            return _error(400, "validation", str(e))
        return {
            "speaker_id": profile.speaker_id,
            "display_name": profile.display_name,
            "n_utterances": profile.n_utterances,
            "enrolled_at": profile.enrolled_at,
        }

    @app.delete("/api/speaker-sets/{set_id}/speakers/{speaker_id}")
    def delete_speaker(set_id: str, speaker_id: str):
        if not orch.speaker_sets.exists(set_id):
            return _error(404, "not_found", f"no speaker set {set_id}")
        if not orch.speaker_sets.delete_speaker(set_id, speaker_id):
            return _error(404, "not_found", f"no speaker {speaker_id} in {set_id}")
        return {"deleted": speaker_id}

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")

    return app
