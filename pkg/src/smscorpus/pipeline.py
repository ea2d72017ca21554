"""The shared submission pipeline.

CLI and HTTP submissions go through the same function so both produce the
same store state: sniff the format, parse, verify (uploads), anonymize,
screen, persist as a pending batch alongside its quality report.
"""

from __future__ import annotations

import uuid
from dataclasses import dataclass
from datetime import datetime, timezone

from . import anonymize, ingest, validate
from .config import SecretConfig
from .errors import ParseError, UploadRejectedError
from .models import CollectionMethod, Message, Source, Status, SubmissionBatch, UserProfile
from .store import CorpusStore
from .validate import Policy, QualityReport


@dataclass
class SubmissionResult:
    batch: SubmissionBatch
    messages: list[Message]
    report: QualityReport
    warnings: list[str]
    profile: UserProfile | None = None


def _now_iso() -> str:
    return datetime.now(timezone.utc).isoformat()


def _new_id(prefix: str) -> str:
    return f"{prefix}{uuid.uuid4().hex}"


def submit_payload(
    store: CorpusStore,
    payload: bytes,
    *,
    source: Source,
    secrets: SecretConfig,
    declared_method: CollectionMethod | None = None,
    profile_answers: dict | None = None,
    contributor_ref: str | None = None,
    policy: Policy | None = None,
    blocklist: list[str] | None = None,
    emoticons: dict[str, str] | None = None,
    received_at: str | None = None,
) -> SubmissionResult:
    """Ingest one submission payload end to end.

    The payload format decides the collection method; a declared method
    that contradicts the detected one is an error, not a silent override.
    The batch lands in the store as pending, with the screening report's
    recommendation left to a human moderator.
    """
    fmt = ingest.detect_format(payload)
    if fmt == ingest.PayloadFormat.UNKNOWN:
        raise ParseError("unrecognized submission format")
    method = ingest.FORMAT_METHOD[fmt]
    if declared_method is not None and declared_method != method:
        raise ParseError(
            f"payload looks like {method.value} but was declared {declared_method.value}"
        )

    warnings: list[str] = []
    if fmt == ingest.PayloadFormat.TRANSCRIPTION:
        raws = ingest.parse_transcription(payload)
    elif fmt in (ingest.PayloadFormat.EXPORT_CSV, ingest.PayloadFormat.EXPORT_XML):
        raws, warnings = ingest.parse_export(
            payload, "csv" if fmt == ingest.PayloadFormat.EXPORT_CSV else "xml"
        )
    else:
        draft = ingest.parse_upload_draft(payload)
        if not ingest.verify_upload(draft, secrets.upload_secret):
            raise UploadRejectedError("upload verification code does not match")
        raws = draft.messages
        if contributor_ref is None:
            contributor_ref = draft.device_id_token

    if contributor_ref is None:
        contributor_ref = _new_id("anon-")

    profile = None
    if profile_answers is not None:
        profile = UserProfile.from_answers(_new_id("p"), profile_answers)

    batch_id = _new_id("b")
    key = secrets.pseudonym_key
    messages = []
    for raw in raws:
        body = anonymize.anonymize_body(raw.body_raw, emoticons)
        messages.append(
            Message(
                id=_new_id("m"),
                body=body,
                language=validate.detect_language(body),
                collection_method=method,
                source=source,
                batch_id=batch_id,
                sender_token=anonymize.endpoint_token(raw.sender_raw, key),
                receiver_token=anonymize.endpoint_token(raw.receiver_raw, key),
                sent_at=raw.sent_at,
                profile_id=profile.id if profile else None,
                status=Status.PENDING,
            )
        )

    policy = policy or validate.default_policy()
    blocklist = blocklist if blocklist is not None else validate.default_blocklist()
    report = validate.quality_report(
        [m.body for m in messages],
        [m.language for m in messages],
        store.corpus_bodies(),
        blocklist,
        policy,
    )

    batch = SubmissionBatch(
        id=batch_id,
        contributor_ref=contributor_ref,
        collection_method=method,
        source=source,
        received_at=received_at or _now_iso(),
        status=Status.PENDING,
    )
    store.put_batch(batch, messages, profile)
    return SubmissionResult(
        batch=batch, messages=messages, report=report, warnings=warnings, profile=profile
    )
