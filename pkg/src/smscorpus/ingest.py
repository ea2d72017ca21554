"""Channel parsers: web transcription, phone export (CSV/XML), app upload.

Every parser maps arbitrary bytes to either a list of raw messages or a
ParseError; nothing here may crash on malformed input.  Raw messages are
pre-anonymization and must never be persisted directly.
"""

from __future__ import annotations

import csv
import hashlib
import hmac
import io
import json
import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from datetime import datetime
from enum import Enum

from .errors import ParseError
from .models import CollectionMethod

DRAFT_HEADER = "SMS-CORPUS-UPLOAD v1"
EXPORT_CSV_HEADER = ["direction", "peer_number", "timestamp", "body"]

# Exact message counts each transcription task may carry, per language.
TRANSCRIPTION_COUNTS: dict[str, tuple[int, ...]] = {
    "english": (2, 5),
    "chinese": (10, 20),
}


@dataclass
class RawMessage:
    """A message as a channel delivered it, before any anonymization."""

    body_raw: str
    sender_raw: str | None = None
    receiver_raw: str | None = None
    sent_at: str | None = None


@dataclass
class UploadDraft:
    verification_code: str
    device_id_token: str
    messages: list[RawMessage] = field(default_factory=list)


class PayloadFormat(str, Enum):
    TRANSCRIPTION = "transcription"
    EXPORT_CSV = "export_csv"
    EXPORT_XML = "export_xml"
    UPLOAD_DRAFT = "upload_draft"
    UNKNOWN = "unknown"


FORMAT_METHOD = {
    PayloadFormat.TRANSCRIPTION: CollectionMethod.TRANSCRIPTION,
    PayloadFormat.EXPORT_CSV: CollectionMethod.EXPORT,
    PayloadFormat.EXPORT_XML: CollectionMethod.EXPORT,
    PayloadFormat.UPLOAD_DRAFT: CollectionMethod.UPLOAD,
}


def _decode(data: bytes | str) -> str:
    if isinstance(data, str):
        return data.lstrip("﻿")
    try:
        return data.decode("utf-8-sig")
    except UnicodeDecodeError as exc:
        raise ParseError(f"payload is not valid UTF-8: {exc}") from None


def _parse_iso(value: str) -> str | None:
    """Canonical ISO-8601 form, or None when the value does not parse."""
    value = value.strip()
    if value.endswith(("Z", "z")):
        value = value[:-1] + "+00:00"
    try:
        return datetime.fromisoformat(value).isoformat()
    except ValueError:
        return None


# --- web transcription ---------------------------------------------------------


def parse_transcription(
    payload: bytes | str | dict,
    counts: dict[str, tuple[int, ...]] | None = None,
) -> list[RawMessage]:
    """Parse a transcription task submission.

    The payload is a JSON object: ``{"language": ..., "messages": [...]}``.
    The number of message slots must exactly match one of the task sizes
    offered for that language, every slot must be non-empty, and each body
    is kept verbatim except for one trailing newline.
    """
    counts = counts or TRANSCRIPTION_COUNTS
    if isinstance(payload, dict):
        record = payload
    else:
        try:
            record = json.loads(_decode(payload))
        except json.JSONDecodeError as exc:
            raise ParseError(f"transcription payload is not valid JSON: {exc}") from None
    if not isinstance(record, dict):
        raise ParseError("transcription payload must be a JSON object")
    language = record.get("language")
    if language not in counts:
        raise ParseError(f"unsupported transcription language: {language!r}")
    slots = record.get("messages")
    if not isinstance(slots, list) or not all(isinstance(s, str) for s in slots):
        raise ParseError("transcription payload needs a list of message strings")
    allowed = counts[language]
    if len(slots) not in allowed:
        raise ParseError(
            f"a {language} transcription task has {' or '.join(map(str, allowed))} "
            f"messages, got {len(slots)}"
        )
    out: list[RawMessage] = []
    for i, slot in enumerate(slots):
        body = slot.removesuffix("\n").removesuffix("\r")
        if not body.strip():
            raise ParseError(f"message slot {i + 1} is empty")
        out.append(RawMessage(body_raw=body))
    return out


# --- phone export ----------------------------------------------------------------


def parse_export(data: bytes | str, format_hint: str | None = None) -> tuple[list[RawMessage], list[str]]:
    """Parse a phone export in the CSV or XML schema.

    Only sent messages are kept; rows with any other direction are dropped
    with a warning.  Timestamps that fail ISO-8601 parsing degrade to
    absent, also with a warning.  Returns (messages, warnings).
    """
    text = _decode(data)
    if format_hint == "csv":
        return _parse_export_csv(text)
    if format_hint == "xml":
        return _parse_export_xml(text)
    stripped = text.lstrip()
    if stripped.startswith("<"):
        return _parse_export_xml(text)
    return _parse_export_csv(text)


def _row_message(direction: str, peer: str, timestamp: str, body: str,
                 position: str, warnings: list[str]) -> RawMessage | None:
    if direction.strip().lower() != "sent":
        warnings.append(f"{position}: dropped non-sent message (direction={direction.strip()!r})")
        return None
    if not body:
        raise ParseError(f"{position}: empty body")
    sent_at = None
    timestamp = timestamp.strip()
    if timestamp and timestamp != "-":
        sent_at = _parse_iso(timestamp)
        if sent_at is None:
            warnings.append(f"{position}: unparseable timestamp {timestamp!r} dropped")
    peer = peer.strip()
    return RawMessage(
        body_raw=body,
        receiver_raw=peer if peer and peer != "-" else None,
        sent_at=sent_at,
    )


def _parse_export_csv(text: str) -> tuple[list[RawMessage], list[str]]:
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("empty export payload") from None
    except csv.Error as exc:
        raise ParseError(f"malformed CSV: {exc}") from None
    if [h.strip().lower() for h in header] != EXPORT_CSV_HEADER:
        raise ParseError(f"unrecognized export schema: header {header!r}")
    warnings: list[str] = []
    out: list[RawMessage] = []
    try:
        for i, row in enumerate(reader, 2):
            if not row:
                continue
            if len(row) != 4:
                raise ParseError(f"row {i}: expected 4 fields, got {len(row)}")
            msg = _row_message(row[0], row[1], row[2], row[3], f"row {i}", warnings)
            if msg is not None:
                out.append(msg)
    except csv.Error as exc:
        raise ParseError(f"malformed CSV: {exc}") from None
    if not out:
        raise ParseError("export contains no sent messages")
    return out, warnings


def _parse_export_xml(text: str) -> tuple[list[RawMessage], list[str]]:
    try:
        root = ET.fromstring(text)
    except ET.ParseError as exc:
        raise ParseError(f"malformed XML: {exc}") from None
    if root.tag != "messages":
        raise ParseError(f"unrecognized export schema: root element <{root.tag}>")
    warnings: list[str] = []
    out: list[RawMessage] = []
    for i, el in enumerate(root, 1):
        if el.tag != "message":
            warnings.append(f"element {i}: skipped unknown element <{el.tag}>")
            continue
        msg = _row_message(
            el.get("direction", ""),
            el.get("peer", ""),
            el.get("time", ""),
            el.text or "",
            f"element {i}",
            warnings,
        )
        if msg is not None:
            out.append(msg)
    if not out:
        raise ParseError("export contains no sent messages")
    return out, warnings


# --- app upload draft -------------------------------------------------------------

_CODE_LINE_RE = re.compile(r"^code: ([0-9a-f]{8})$")
_DEVICE_LINE_RE = re.compile(r"^device: (\S+)$")
_COUNT_LINE_RE = re.compile(r"^count: (\d+)$")
_MSG_DELIM = "--msg--"


def parse_upload_draft(data: bytes | str) -> UploadDraft:
    """Parse the line-oriented draft the phone app uploads.

    The format is rigid because a machine writes it: any structural
    deviation is an error rather than a warning.
    """
    text = _decode(data)
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or lines[0] != DRAFT_HEADER:
        raise ParseError("malformed draft header")
    if len(lines) < 4:
        raise ParseError("draft is truncated")
    code_m = _CODE_LINE_RE.match(lines[1])
    if not code_m:
        raise ParseError("missing or malformed verification code line")
    device_m = _DEVICE_LINE_RE.match(lines[2])
    if not device_m:
        raise ParseError("missing or malformed device line")
    count_m = _COUNT_LINE_RE.match(lines[3])
    if not count_m:
        raise ParseError("missing or malformed count line")
    count = int(count_m.group(1))
    if count == 0:
        raise ParseError("draft contains zero messages")

    blocks: list[list[str]] = []
    current: list[str] | None = None
    for line in lines[4:]:
        if line == _MSG_DELIM:
            current = []
            blocks.append(current)
        elif current is None:
            raise ParseError("unexpected content before the first message block")
        else:
            current.append(line)
    if len(blocks) != count:
        raise ParseError(f"count line says {count} messages, found {len(blocks)}")

    messages: list[RawMessage] = []
    for i, block in enumerate(blocks, 1):
        if len(block) < 3:
            raise ParseError(f"message {i}: block is truncated")
        time_line, peer_line, body_lines = block[0], block[1], block[2:]
        if not time_line.startswith("time: "):
            raise ParseError(f"message {i}: missing time line")
        if not peer_line.startswith("peer: "):
            raise ParseError(f"message {i}: missing peer line")
        time_value = time_line[len("time: "):]
        sent_at = None
        if time_value != "-":
            sent_at = _parse_iso(time_value)
            if sent_at is None:
                raise ParseError(f"message {i}: bad timestamp {time_value!r}")
        peer_value = peer_line[len("peer: "):]
        body = "\n".join(body_lines)
        if not body.strip():
            raise ParseError(f"message {i}: empty body")
        messages.append(
            RawMessage(
                body_raw=body,
                receiver_raw=peer_value if peer_value != "-" else None,
                sent_at=sent_at,
            )
        )
    return UploadDraft(
        verification_code=code_m.group(1),
        device_id_token=device_m.group(1),
        messages=messages,
    )


def upload_code(device_id_token: str, message_count: int, secret: bytes) -> str:
    """The 8-hex verification tag the app puts in a draft."""
    mac = hmac.new(
        secret, f"{device_id_token}\n{message_count}".encode("utf-8"), hashlib.sha256
    )
    return mac.hexdigest()[:8]


def verify_upload(draft: UploadDraft, secret: bytes) -> bool:
    """Check a draft's verification code.  Never raises.

    The tag covers the device token and the message count, so forging a
    submission for another device, or padding the count, invalidates it.
    """
    try:
        expected = upload_code(draft.device_id_token, len(draft.messages), secret)
        return hmac.compare_digest(expected, draft.verification_code)
    except Exception:
        return False


def render_upload_draft(device_id_token: str, messages: list[RawMessage], secret: bytes) -> str:
    """Produce the draft text the phone app would upload (test harnesses,
    documentation examples)."""
    lines = [
        DRAFT_HEADER,
        f"code: {upload_code(device_id_token, len(messages), secret)}",
        f"device: {device_id_token}",
        f"count: {len(messages)}",
    ]
    for m in messages:
        lines.append(_MSG_DELIM)
        lines.append(f"time: {m.sent_at if m.sent_at else '-'}")
        lines.append(f"peer: {m.receiver_raw if m.receiver_raw else '-'}")
        lines.extend(m.body_raw.split("\n"))
    return "\n".join(lines) + "\n"


# --- format sniffing ---------------------------------------------------------------


def detect_format(data: bytes | str) -> PayloadFormat:
    """Best-effort format sniff used when the submitter does not say."""
    try:
        text = _decode(data)
    except ParseError:
        return PayloadFormat.UNKNOWN
    if text.split("\n", 1)[0] == DRAFT_HEADER:
        return PayloadFormat.UPLOAD_DRAFT
    stripped = text.lstrip()
    if stripped.startswith("{"):
        return PayloadFormat.TRANSCRIPTION
    if stripped.startswith("<"):
        if re.match(r"<\?xml[^>]*\?>\s*<messages[\s>]", stripped) or stripped.startswith("<messages"):
            return PayloadFormat.EXPORT_XML
        return PayloadFormat.UNKNOWN
    first_line = text.split("\n", 1)[0]
    if [h.strip().lower() for h in first_line.split(",")] == EXPORT_CSV_HEADER:
        return PayloadFormat.EXPORT_CSV
    return PayloadFormat.UNKNOWN
