"""HTTP front end over the store: submissions, browsing, moderation,
stats, release downloads.

The service holds no state of its own; every handler delegates to the
same library calls the CLI uses, so the two entry points cannot drift.
Errors surface as ``{"error": <code>, "detail": <text>}``.
"""

from __future__ import annotations

import base64
import binascii
import hmac
from pathlib import Path

from fastapi import Depends, FastAPI, Header, Query, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import FileResponse, JSONResponse, Response
from pydantic import BaseModel

from . import pipeline, release, rewards, stats, validate
from .config import SecretConfig
from .errors import (
    AuthError,
    CorpusError,
    DuplicateBatchError,
    InvalidFilterError,
    MissingProfileError,
    NotFoundError,
    ParseError,
    SchemeError,
    TerminalStateError,
    UploadRejectedError,
)
from .models import CollectionMethod, Language, Message, Source, Status, SubmissionBatch
from .store import CorpusStore

DEFAULT_MAX_PAYLOAD = 1_000_000


class PayloadTooLargeError(CorpusError):
    code = "payload_too_large"


_STATUS_BY_ERROR = (
    (PayloadTooLargeError, 413),
    (UploadRejectedError, 401),
    (AuthError, 401),
    (NotFoundError, 404),
    (TerminalStateError, 409),
    (DuplicateBatchError, 409),
    (InvalidFilterError, 422),
    (MissingProfileError, 400),
    (ParseError, 400),
    (SchemeError, 400),
)

_ARTIFACT_MEDIA = {
    "xml": "application/xml",
    "sql": "application/sql",
    "stats": "application/json",
    "manifest": "text/plain",
}


class SubmissionRequest(BaseModel):
    source: Source
    payload: str | None = None
    payload_b64: str | None = None
    method: CollectionMethod | None = None
    profile: dict[str, str | None] | None = None
    contributor: str | None = None


class DecisionRequest(BaseModel):
    decision: str
    scheme: str | None = None
    reason: str | None = None


def _status_for(exc: CorpusError) -> int:
    for cls, status in _STATUS_BY_ERROR:
        if isinstance(exc, cls):
            return status
    return 400


def _message_json(m: Message) -> dict:
    return {
        "id": m.id,
        "body": m.body,
        "language": m.language.value,
        "method": m.collection_method.value,
        "source": m.source.value,
        "profile_id": m.profile_id,
        "sent_at": m.sent_at,
        "sender_token": m.sender_token,
        "receiver_token": m.receiver_token,
    }


def _batch_json(b: SubmissionBatch) -> dict:
    return {
        "id": b.id,
        "contributor_ref": b.contributor_ref,
        "method": b.collection_method.value,
        "source": b.source.value,
        "received_at": b.received_at,
        "status": b.status.value,
        "message_count": len(b.message_ids),
        "rejection_reason": b.rejection_reason,
        "reward_amount": str(b.reward_amount) if b.reward_amount is not None else None,
        "reward_currency": b.reward_currency,
    }


def create_app(
    store: CorpusStore,
    secrets: SecretConfig,
    *,
    policy: validate.Policy | None = None,
    blocklist: list[str] | None = None,
    schemes: dict[str, rewards.RewardScheme] | None = None,
    max_payload_bytes: int = DEFAULT_MAX_PAYLOAD,
    ui_dir: str | Path | None = None,
) -> FastAPI:
    policy = policy or validate.default_policy()
    blocklist = blocklist if blocklist is not None else validate.default_blocklist()
    schemes = schemes or rewards.builtin_schemes()

    app = FastAPI(title="sms corpus service", version="0.1.0")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(CorpusError)
    async def corpus_error_handler(request: Request, exc: CorpusError):
        return JSONResponse(
            status_code=_status_for(exc), content={"error": exc.code, "detail": exc.detail}
        )

    @app.exception_handler(RequestValidationError)
    async def validation_error_handler(request: Request, exc: RequestValidationError):
        detail = "; ".join(
            f"{'.'.join(str(p) for p in e['loc'])}: {e['msg']}" for e in exc.errors()[:5]
        )
        return JSONResponse(status_code=422, content={"error": "invalid_request", "detail": detail})

    def require_admin(x_admin_token: str | None = Header(default=None)) -> None:
        if x_admin_token is None or not hmac.compare_digest(
            x_admin_token.encode("utf-8"), secrets.admin_token.encode("utf-8")
        ):
            raise AuthError("missing or invalid admin token")

    # -- submission

    @app.post("/submissions", status_code=201)
    def create_submission(req: SubmissionRequest):
        if (req.payload is None) == (req.payload_b64 is None):
            raise ParseError("provide exactly one of payload or payload_b64")
        if req.payload is not None:
            data = req.payload.encode("utf-8")
        else:
            try:
                data = base64.b64decode(req.payload_b64, validate=True)
            except (binascii.Error, ValueError):
                raise ParseError("payload_b64 is not valid base64") from None
        if len(data) > max_payload_bytes:
            raise PayloadTooLargeError("payload exceeds the size cap")
        result = pipeline.submit_payload(
            store,
            data,
            source=req.source,
            secrets=secrets,
            declared_method=req.method,
            profile_answers=req.profile,
            contributor_ref=req.contributor,
            policy=policy,
            blocklist=blocklist,
        )
        return {
            "batch_id": result.batch.id,
            "status": result.batch.status.value,
            "message_count": len(result.messages),
            "report": result.report.to_dict(),
            "warnings": result.warnings,
            "profile_id": result.profile.id if result.profile else None,
        }

    @app.middleware("http")
    async def content_length_guard(request: Request, call_next):
        length = request.headers.get("content-length")
        if length and length.isdigit() and int(length) > max_payload_bytes + 4096:
            return JSONResponse(
                status_code=413,
                content={"error": "payload_too_large", "detail": "request body exceeds the size cap"},
            )
        return await call_next(request)

    # -- browsing

    @app.get("/corpus/messages")
    def browse_messages(
        language: Language | None = None,
        source: Source | None = None,
        method: CollectionMethod | None = None,
        profile_id: str | None = None,
        offset: int = Query(0, ge=0),
        limit: int = Query(100, ge=1, le=1000),
    ):
        messages, total = store.query_messages(
            language=language,
            source=source,
            method=method,
            status=Status.APPROVED,
            profile_id=profile_id,
            offset=offset,
            limit=limit,
        )
        return {
            "total": total,
            "offset": offset,
            "limit": limit,
            "messages": [_message_json(m) for m in messages],
        }

    @app.get("/stats")
    def get_stats():
        return stats.corpus_report(store)

    @app.get("/releases")
    def list_releases():
        return {
            "versions": [
                {
                    "version_id": v.version_id,
                    "created_at": v.created_at,
                    "message_count_en": v.message_count_en,
                    "message_count_zh": v.message_count_zh,
                    "artifact_checksums": v.artifact_checksums,
                }
                for v in store.versions()
            ]
        }

    @app.get("/releases/{version_id}/{artifact}")
    def download_artifact(version_id: str, artifact: str):
        if artifact not in _ARTIFACT_MEDIA:
            raise NotFoundError(f"unknown artifact kind: {artifact}")
        if store.get_version(version_id) is None:
            raise NotFoundError(f"unknown version: {version_id}")
        name = release.artifact_names(version_id)[artifact]
        data = store.read_artifact(version_id, name)
        return Response(
            content=data,
            media_type=_ARTIFACT_MEDIA[artifact],
            headers={"Content-Disposition": f'attachment; filename="{name}"'},
        )

    # -- moderation

    @app.get("/moderation/queue")
    def moderation_queue(_: None = Depends(require_admin)):
        items = []
        corpus_bodies = store.corpus_bodies()
        for batch in store.pending_batches():
            messages = store.messages_for_batch(batch.id)
            report = validate.quality_report(
                [m.body for m in messages],
                [m.language for m in messages],
                corpus_bodies,
                blocklist,
                policy,
            )
            previews = [
                {"id": m.id, "body": m.body, "language": m.language.value}
                for m in messages[:20]
            ]
            items.append(
                {
                    "batch": _batch_json(batch),
                    "report": report.to_dict(),
                    "messages": previews,
                    "reward_previews": {
                        name: {
                            "amount": str(r.amount),
                            "currency": r.currency,
                            "below_minimum": r.below_minimum,
                        }
                        for name, r in (
                            (name, rewards.compute_reward(s, len(batch.message_ids)))
                            for name, s in sorted(schemes.items())
                        )
                    },
                }
            )
        return {"queue": items}

    @app.post("/moderation/{batch_id}/decision")
    def decide(batch_id: str, req: DecisionRequest, _: None = Depends(require_admin)):
        if req.decision not in ("approve", "reject"):
            raise ParseError(f"decision must be approve or reject, not {req.decision!r}")
        scheme = None
        if req.scheme is not None:
            if req.scheme not in schemes:
                raise SchemeError(f"unknown scheme: {req.scheme}")
            scheme = schemes[req.scheme]
        batch = validate.moderate(
            store, batch_id, req.decision, reason=req.reason, scheme=scheme, policy=policy
        )
        return {"batch": _batch_json(batch)}

    # -- optional static UI

    if ui_dir is not None:
        base = Path(ui_dir).resolve()

        @app.get("/ui")
        @app.get("/ui/{path:path}")
        def ui(path: str = ""):
            target = (base / path).resolve() if path else base / "index.html"
            if target.is_dir():
                target = target / "index.html"
            if base != target and base not in target.parents:
                raise NotFoundError("not found")
            if not target.is_file():
                target = base / "index.html"
            if not target.is_file():
                raise NotFoundError("not found")
            return FileResponse(target)

    return app
