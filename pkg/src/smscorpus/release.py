"""Monthly release snapshots: XML and SQL dumps, stats, manifest.

A release freezes the approved corpus under a ``YYYY-MM`` version id.
Artifacts are built from a sorted snapshot and contain nothing derived
from the wall clock, so rebuilding the same store state yields byte for
byte identical files.  Published artifacts are immutable; versions only
move forward and the corpus never shrinks between releases.
"""

from __future__ import annotations

import hashlib
import io
import json
import re
import xml.sax
import xml.sax.handler
from dataclasses import dataclass, field
from xml.sax.saxutils import escape, quoteattr

from . import stats
from .errors import ReleaseError, ReleaseSchemaError, VersionOrderError
from .models import CollectionMethod, CorpusVersion, Language, Message, Source, UserProfile
from .store import CorpusStore, Snapshot

VERSION_RE = re.compile(r"\d{4}-(0[1-9]|1[0-2])")

_ATTR_ENTITIES = {"\n": "&#10;", "\r": "&#13;", "\t": "&#9;"}
_TEXT_ENTITIES = {"\r": "&#13;"}

_MESSAGE_REQUIRED = ("id", "language", "method", "source")
_MESSAGE_OPTIONAL = ("profile", "time", "sender", "receiver")
_PROFILE_FIELDS = (
    "age", "gender", "country", "native", "input",
    "daily", "years", "brand", "model", "smartphone",
)


def artifact_names(version_id: str) -> dict[str, str]:
    return {
        "xml": f"corpus-{version_id}.xml",
        "sql": f"corpus-{version_id}.sql",
        "stats": f"stats-{version_id}.json",
        "manifest": f"MANIFEST-{version_id}",
    }


@dataclass(frozen=True)
class ReleasedMessage:
    """The released view of a message: exactly the fields a dump carries."""

    id: str
    body: str
    language: str
    method: str
    source: str
    profile_id: str | None = None
    sent_at: str | None = None
    sender_token: str | None = None
    receiver_token: str | None = None


def released_view(message: Message) -> ReleasedMessage:
    return ReleasedMessage(
        id=message.id,
        body=message.body,
        language=message.language.value,
        method=message.collection_method.value,
        source=message.source.value,
        profile_id=message.profile_id,
        sent_at=message.sent_at,
        sender_token=message.sender_token,
        receiver_token=message.receiver_token,
    )


# --- builders -------------------------------------------------------------------


def build_xml(snapshot: Snapshot, version_id: str) -> bytes:
    """Render the corpus dump.  The ``date`` attribute repeats the release
    month rather than the build clock so rebuilds stay identical."""
    out = io.StringIO()
    out.write('<?xml version="1.0" encoding="UTF-8"?>\n')
    out.write(f'<smsCorpus version={quoteattr(version_id)} date={quoteattr(version_id)}>\n')
    for m in snapshot.messages:
        attrs = [
            ("id", m.id),
            ("language", m.language.value),
            ("method", m.collection_method.value),
            ("source", m.source.value),
        ]
        for name, value in (
            ("profile", m.profile_id),
            ("time", m.sent_at),
            ("sender", m.sender_token),
            ("receiver", m.receiver_token),
        ):
            if value is not None:
                attrs.append((name, value))
        rendered = " ".join(f"{k}={quoteattr(v, _ATTR_ENTITIES)}" for k, v in attrs)
        out.write(f"  <message {rendered}>{escape(m.body, _TEXT_ENTITIES)}</message>\n")
    for p in snapshot.profiles:
        attrs = [
            ("id", p.id),
            ("age", p.age_bucket),
            ("gender", p.gender),
            ("country", p.country),
            ("native", p.native_speaker),
            ("input", p.input_method),
            ("daily", p.daily_sms_bucket),
            ("years", p.years_sms_bucket),
            ("brand", p.phone_brand),
            ("model", p.phone_model),
            ("smartphone", p.smartphone),
        ]
        rendered = " ".join(f"{k}={quoteattr(v, _ATTR_ENTITIES)}" for k, v in attrs)
        out.write(f"  <profile {rendered} />\n")
    out.write("</smsCorpus>\n")
    return out.getvalue().encode("utf-8")


def _sql_quote(value: str | None) -> str:
    if value is None:
        return "NULL"
    return "'" + value.replace("'", "''") + "'"


def build_sql(snapshot: Snapshot, version_id: str, count_en: int, count_zh: int) -> bytes:
    """Portable SQL dump mirroring the XML content row for row."""
    out = io.StringIO()
    out.write(f"-- sms corpus release {version_id}\n")
    out.write("BEGIN;\n")
    out.write(
        "CREATE TABLE profiles (\n"
        "  id TEXT PRIMARY KEY,\n"
        "  age_bucket TEXT,\n"
        "  gender TEXT,\n"
        "  country TEXT,\n"
        "  native_speaker TEXT,\n"
        "  input_method TEXT,\n"
        "  daily_sms_bucket TEXT,\n"
        "  years_sms_bucket TEXT,\n"
        "  phone_brand TEXT,\n"
        "  phone_model TEXT,\n"
        "  smartphone TEXT\n"
        ");\n"
    )
    out.write(
        "CREATE TABLE messages (\n"
        "  id TEXT PRIMARY KEY,\n"
        "  body TEXT NOT NULL,\n"
        "  language TEXT NOT NULL,\n"
        "  collection_method TEXT NOT NULL,\n"
        "  source TEXT NOT NULL,\n"
        "  profile_id TEXT,\n"
        "  sent_at TEXT,\n"
        "  sender_token TEXT,\n"
        "  receiver_token TEXT\n"
        ");\n"
    )
    out.write(
        "CREATE TABLE versions (\n"
        "  version_id TEXT PRIMARY KEY,\n"
        "  message_count_en INTEGER NOT NULL,\n"
        "  message_count_zh INTEGER NOT NULL\n"
        ");\n"
    )
    for p in snapshot.profiles:
        out.write(
            "INSERT INTO profiles VALUES ("
            + ",".join(
                _sql_quote(v)
                for v in (
                    p.id, p.age_bucket, p.gender, p.country, p.native_speaker,
                    p.input_method, p.daily_sms_bucket, p.years_sms_bucket,
                    p.phone_brand, p.phone_model, p.smartphone,
                )
            )
            + ");\n"
        )
    for m in snapshot.messages:
        out.write(
            "INSERT INTO messages VALUES ("
            + ",".join(
                _sql_quote(v)
                for v in (
                    m.id, m.body, m.language.value, m.collection_method.value,
                    m.source.value, m.profile_id, m.sent_at,
                    m.sender_token, m.receiver_token,
                )
            )
            + ");\n"
        )
    out.write(
        f"INSERT INTO versions VALUES ({_sql_quote(version_id)},{count_en},{count_zh});\n"
    )
    out.write("COMMIT;\n")
    return out.getvalue().encode("utf-8")


def build_release(store: CorpusStore, version_id: str,
                  created_at: str | None = None) -> tuple[CorpusVersion, dict[str, bytes]]:
    """Build and publish all artifacts for ``version_id``.

    Fails before writing anything if the version does not follow the
    published sequence or would shrink the corpus.
    """
    if not VERSION_RE.fullmatch(version_id):
        raise ReleaseError(f"version must look like YYYY-MM: {version_id!r}")
    snapshot = store.approved_snapshot()
    count_en = sum(1 for m in snapshot.messages if m.language == Language.ENGLISH)
    count_zh = sum(1 for m in snapshot.messages if m.language == Language.CHINESE)

    last = store.latest_version()
    if last is not None:
        if version_id <= last.version_id:
            raise VersionOrderError(f"version {version_id} does not follow {last.version_id}")
        if count_en < last.message_count_en or count_zh < last.message_count_zh:
            raise VersionOrderError(f"version {version_id} would shrink the corpus")

    names = artifact_names(version_id)
    artifacts = {
        names["xml"]: build_xml(snapshot, version_id),
        names["sql"]: build_sql(snapshot, version_id, count_en, count_zh),
        names["stats"]: (
            json.dumps(stats.corpus_report(store), sort_keys=True, indent=2) + "\n"
        ).encode("utf-8"),
    }
    manifest_lines = [
        f"{hashlib.sha256(artifacts[name]).hexdigest()}  {name}"
        for name in sorted(artifacts)
    ]
    artifacts[names["manifest"]] = ("\n".join(manifest_lines) + "\n").encode("utf-8")

    checksums = {name: hashlib.sha256(data).hexdigest() for name, data in artifacts.items()}
    for name, data in artifacts.items():
        store.write_artifact(version_id, name, data)
    if created_at is None:
        from datetime import datetime, timezone

        created_at = datetime.now(timezone.utc).isoformat()
    version = CorpusVersion(
        version_id=version_id,
        created_at=created_at,
        message_count_en=count_en,
        message_count_zh=count_zh,
        artifact_checksums=checksums,
    )
    store.record_version(version)
    return version, artifacts


# --- parsing and verification ------------------------------------------------------


@dataclass
class ParsedRelease:
    version_id: str
    date: str
    messages: list[ReleasedMessage] = field(default_factory=list)
    profiles: list[UserProfile] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)


class _ReleaseHandler(xml.sax.handler.ContentHandler):
    def __init__(self):
        super().__init__()
        self.release: ParsedRelease | None = None
        self._locator = None
        self._body: list[str] | None = None
        self._current: dict | None = None
        self._seen_ids: set[str] = set()

    def setDocumentLocator(self, locator):
        self._locator = locator

    def _pos(self) -> tuple[int | None, int | None]:
        if self._locator is None:
            return None, None
        return self._locator.getLineNumber(), self._locator.getColumnNumber()

    def _fail(self, detail: str):
        line, col = self._pos()
        raise ReleaseSchemaError(detail, line, col)

    def startElement(self, name, attrs):
        if name == "smsCorpus":
            if self.release is not None:
                self._fail("nested smsCorpus element")
            version = attrs.get("version")
            if not version:
                self._fail("smsCorpus element is missing the version attribute")
            self.release = ParsedRelease(version_id=version, date=attrs.get("date", ""))
            return
        if self.release is None:
            self._fail(f"unexpected root element <{name}>")
        if name == "message":
            values = {}
            for attr in _MESSAGE_REQUIRED:
                if attr not in attrs:
                    self._fail(f"message is missing the {attr} attribute")
                values[attr] = attrs[attr]
            if values["id"] in self._seen_ids:
                self._fail(f"duplicate message id {values['id']}")
            self._seen_ids.add(values["id"])
            for enum_cls, attr in ((Language, "language"), (CollectionMethod, "method"), (Source, "source")):
                try:
                    enum_cls(values[attr])
                except ValueError:
                    self._fail(f"message {values['id']}: bad {attr} value {values[attr]!r}")
            for attr in _MESSAGE_OPTIONAL:
                values[attr] = attrs.get(attr)
            for attr in attrs.getNames():
                if attr not in _MESSAGE_REQUIRED and attr not in _MESSAGE_OPTIONAL:
                    self.release.warnings.append(
                        f"message {values['id']}: ignored unknown attribute {attr!r}"
                    )
            self._current = values
            self._body = []
        elif name == "profile":
            if "id" not in attrs:
                self._fail("profile is missing the id attribute")
            known = ("id",) + _PROFILE_FIELDS
            for attr in attrs.getNames():
                if attr not in known:
                    self.release.warnings.append(
                        f"profile {attrs['id']}: ignored unknown attribute {attr!r}"
                    )
            self.release.profiles.append(
                UserProfile(
                    id=attrs["id"],
                    age_bucket=attrs.get("age", "unknown"),
                    gender=attrs.get("gender", "unknown"),
                    country=attrs.get("country", "unknown"),
                    native_speaker=attrs.get("native", "unknown"),
                    input_method=attrs.get("input", "unknown"),
                    daily_sms_bucket=attrs.get("daily", "unknown"),
                    years_sms_bucket=attrs.get("years", "unknown"),
                    phone_brand=attrs.get("brand", "unknown"),
                    phone_model=attrs.get("model", "unknown"),
                    smartphone=attrs.get("smartphone", "unknown"),
                )
            )
        else:
            self.release.warnings.append(f"ignored unknown element <{name}>")

    def characters(self, content):
        if self._body is not None:
            self._body.append(content)

    def endElement(self, name):
        if name == "message" and self._current is not None:
            v = self._current
            self.release.messages.append(
                ReleasedMessage(
                    id=v["id"],
                    body="".join(self._body or []),
                    language=v["language"],
                    method=v["method"],
                    source=v["source"],
                    profile_id=v["profile"],
                    sent_at=v["time"],
                    sender_token=v["sender"],
                    receiver_token=v["receiver"],
                )
            )
            self._current = None
            self._body = None


def parse_release_xml(data: bytes) -> ParsedRelease:
    """Parse and schema-check a corpus dump.

    Schema violations raise with the line and column of the offending
    input; unknown attributes and elements are tolerated with warnings so
    newer dumps stay readable.
    """
    handler = _ReleaseHandler()
    parser = xml.sax.make_parser()
    parser.setFeature(xml.sax.handler.feature_external_ges, False)
    parser.setContentHandler(handler)
    parser.setErrorHandler(xml.sax.handler.ErrorHandler())
    source = xml.sax.xmlreader.InputSource()
    source.setByteStream(io.BytesIO(data))
    try:
        parser.parse(source)
    except xml.sax.SAXParseException as exc:
        raise ReleaseSchemaError(
            exc.getMessage(), exc.getLineNumber(), exc.getColumnNumber()
        ) from None
    except ReleaseSchemaError:
        raise
    if handler.release is None:
        raise ReleaseSchemaError("input contains no smsCorpus element")
    return handler.release


@dataclass
class VerificationReport:
    version_id: str
    ok: bool
    problems: list[str] = field(default_factory=list)
    checked: list[str] = field(default_factory=list)


def verify_release(store: CorpusStore, version_id: str) -> VerificationReport:
    """Re-hash artifacts against the manifest and recorded checksums, and
    re-check the XML dump's internal consistency."""
    version = store.get_version(version_id)
    problems: list[str] = []
    checked: list[str] = []
    if version is None:
        return VerificationReport(version_id, False, [f"unknown version {version_id}"])
    names = artifact_names(version_id)
    data: dict[str, bytes] = {}
    for kind, name in names.items():
        try:
            data[kind] = store.read_artifact(version_id, name)
        except Exception as exc:
            problems.append(f"{name}: unreadable ({exc})")
            continue
        digest = hashlib.sha256(data[kind]).hexdigest()
        recorded = version.artifact_checksums.get(name)
        if recorded != digest:
            problems.append(f"{name}: checksum mismatch against the version record")
        else:
            checked.append(name)
    if "manifest" in data:
        manifest_map = {}
        for line in data["manifest"].decode("utf-8").splitlines():
            if line.strip():
                digest, _, name = line.partition("  ")
                manifest_map[name] = digest
        for kind in ("xml", "sql", "stats"):
            name = names[kind]
            if kind not in data:
                continue
            if manifest_map.get(name) != hashlib.sha256(data[kind]).hexdigest():
                problems.append(f"{name}: checksum mismatch against the manifest")
    if "xml" in data:
        try:
            parsed = parse_release_xml(data["xml"])
            en = sum(1 for m in parsed.messages if m.language == Language.ENGLISH.value)
            zh = sum(1 for m in parsed.messages if m.language == Language.CHINESE.value)
            if parsed.version_id != version_id:
                problems.append(f"xml dump carries version {parsed.version_id}")
            if (en, zh) != (version.message_count_en, version.message_count_zh):
                problems.append(
                    f"xml dump counts ({en} en, {zh} zh) disagree with the version record"
                )
        except ReleaseSchemaError as exc:
            problems.append(f"xml dump failed schema checks: {exc.detail}")
    if "sql" in data:
        inserts = data["sql"].decode("utf-8").count("INSERT INTO messages ")
        expected = version.message_count_en + version.message_count_zh
        # mixed/unknown-language rows are released too
        if inserts < expected:
            problems.append(f"sql dump has {inserts} message rows, expected at least {expected}")
    return VerificationReport(version_id, not problems, problems, checked)


@dataclass
class Changelog:
    old_version: str
    new_version: str
    added_message_ids: list[str]
    added_profile_ids: list[str]
    count_delta: dict[str, int]

    def to_dict(self) -> dict:
        return {
            "old_version": self.old_version,
            "new_version": self.new_version,
            "added_messages": len(self.added_message_ids),
            "added_message_ids": self.added_message_ids,
            "added_profile_ids": self.added_profile_ids,
            "count_delta": self.count_delta,
        }


def diff_releases(old: ParsedRelease, new: ParsedRelease) -> Changelog:
    """Changelog between two parsed dumps of the same growing corpus."""
    if new.version_id <= old.version_id:
        raise ReleaseError(
            f"releases are incomparable: {new.version_id} does not follow {old.version_id}"
        )
    old_ids = {m.id for m in old.messages}
    new_ids = {m.id for m in new.messages}
    if not old_ids <= new_ids:
        missing = sorted(old_ids - new_ids)[:5]
        raise ReleaseError(
            f"releases are incomparable: {len(old_ids - new_ids)} messages from "
            f"{old.version_id} are missing in {new.version_id} (e.g. {missing})"
        )
    delta: dict[str, int] = {}
    for lang in ("english", "chinese", "mixed", "unknown"):
        old_n = sum(1 for m in old.messages if m.language == lang)
        new_n = sum(1 for m in new.messages if m.language == lang)
        if old_n or new_n:
            delta[lang] = new_n - old_n
    old_profiles = {p.id for p in old.profiles}
    return Changelog(
        old_version=old.version_id,
        new_version=new.version_id,
        added_message_ids=sorted(new_ids - old_ids),
        added_profile_ids=sorted(p.id for p in new.profiles if p.id not in old_profiles),
        count_delta=delta,
    )
