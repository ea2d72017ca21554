"""Embedded corpus store on sqlite.

One store = one directory: ``corpus.db`` plus a ``releases/`` folder for
published artifacts.  A cross-process file lock serializes writers; reads
see only committed state.  ``CorpusStore(None)`` gives an in-memory store
for tests, with release artifacts kept in a dict.

The store is the anonymization boundary: ``put_batch`` refuses bodies the
scrubber would still change, phone-shaped endpoint values, and characters
that cannot survive an XML release round trip.
"""

from __future__ import annotations

import json
import re
import sqlite3
import threading
from contextlib import contextmanager
from dataclasses import dataclass
from datetime import datetime
from decimal import Decimal
from pathlib import Path
from typing import Iterable, NamedTuple

from filelock import FileLock

from . import anonymize
from .errors import (
    DuplicateBatchError,
    InvalidFilterError,
    NotFoundError,
    ReleaseError,
    StoreError,
    TerminalStateError,
    UnknownProfileError,
    VersionOrderError,
)
from .models import (
    CollectionMethod,
    CorpusVersion,
    Language,
    Message,
    Source,
    Status,
    SubmissionBatch,
    UserProfile,
)

DEFAULT_STORE_PATH = "./corpus-store"
MAX_PAGE_SIZE = 1000

# Characters XML 1.0 cannot carry; such bodies would corrupt a release.
_XML_INVALID_RE = re.compile(r"[\x00-\x08\x0b\x0c\x0e-\x1f￾￿]")

_SCHEMA = """
CREATE TABLE IF NOT EXISTS profiles (
    id TEXT PRIMARY KEY,
    age_bucket TEXT NOT NULL,
    gender TEXT NOT NULL,
    country TEXT NOT NULL,
    native_speaker TEXT NOT NULL,
    input_method TEXT NOT NULL,
    daily_sms_bucket TEXT NOT NULL,
    years_sms_bucket TEXT NOT NULL,
    phone_brand TEXT NOT NULL,
    phone_model TEXT NOT NULL,
    smartphone TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS batches (
    id TEXT PRIMARY KEY,
    contributor_ref TEXT NOT NULL,
    collection_method TEXT NOT NULL,
    source TEXT NOT NULL,
    received_at TEXT NOT NULL,
    status TEXT NOT NULL,
    rejection_reason TEXT,
    reward_amount TEXT,
    reward_currency TEXT
);
CREATE TABLE IF NOT EXISTS messages (
    id TEXT PRIMARY KEY,
    batch_id TEXT NOT NULL REFERENCES batches(id),
    body TEXT NOT NULL,
    language TEXT NOT NULL,
    collection_method TEXT NOT NULL,
    source TEXT NOT NULL,
    profile_id TEXT REFERENCES profiles(id),
    sent_at TEXT,
    sender_token TEXT,
    receiver_token TEXT,
    status TEXT NOT NULL,
    received_at TEXT NOT NULL
);
CREATE INDEX IF NOT EXISTS idx_messages_batch ON messages(batch_id);
CREATE INDEX IF NOT EXISTS idx_messages_order ON messages(received_at, id);
CREATE INDEX IF NOT EXISTS idx_messages_status ON messages(status);
CREATE TABLE IF NOT EXISTS versions (
    version_id TEXT PRIMARY KEY,
    created_at TEXT NOT NULL,
    message_count_en INTEGER NOT NULL,
    message_count_zh INTEGER NOT NULL,
    artifact_checksums TEXT NOT NULL
);
"""


class ApprovedRow(NamedTuple):
    """Flat view of an approved message for the stats aggregations."""

    language: str
    collection_method: str
    source: str
    contributor_ref: str
    profile_id: str | None
    body: str


@dataclass
class Snapshot:
    """Stable view of the approved corpus used to build a release."""

    messages: list[Message]
    profiles: list[UserProfile]


def _check_iso(value: str, label: str) -> str:
    try:
        datetime.fromisoformat(value)
    except ValueError:
        raise StoreError(f"{label} is not an ISO-8601 timestamp: {value!r}") from None
    return value


def _check_text(value: str, label: str) -> str:
    if _XML_INVALID_RE.search(value):
        raise StoreError(f"{label} contains characters that cannot be released")
    return value


class CorpusStore:
    """All reads and writes go through this object; one writer at a time."""

    def __init__(self, path: str | Path | None = DEFAULT_STORE_PATH):
        self._lock = threading.RLock()
        if path is None:
            self.root = None
            self._file_lock = None
            self._conn = sqlite3.connect(":memory:", check_same_thread=False)
            self._mem_releases: dict[str, dict[str, bytes]] = {}
        else:
            self.root = Path(path)
            self.root.mkdir(parents=True, exist_ok=True)
            (self.root / "releases").mkdir(exist_ok=True)
            self._file_lock = FileLock(str(self.root / ".writer.lock"))
            self._conn = sqlite3.connect(str(self.root / "corpus.db"), check_same_thread=False)
            self._conn.execute("PRAGMA journal_mode=WAL")
            self._mem_releases = {}
        self._conn.execute("PRAGMA foreign_keys=ON")
        self._conn.executescript(_SCHEMA)
        self._conn.commit()

    def close(self) -> None:
        with self._lock:
            self._conn.close()

    # -- locking helpers

    @contextmanager
    def _write(self):
        with self._lock:
            if self._file_lock is not None:
                with self._file_lock.acquire(timeout=30):
                    yield
            else:
                yield

    @contextmanager
    def _tx(self):
        with self._write():
            self._conn.execute("BEGIN IMMEDIATE")
            try:
                yield
            except BaseException:
                self._conn.execute("ROLLBACK")
                raise
            self._conn.execute("COMMIT")

    # -- write path

    def put_profile(self, profile: UserProfile) -> None:
        with self._tx():
            self._insert_profile(profile)

    def _insert_profile(self, profile: UserProfile) -> None:
        for label, value in vars(profile).items():
            _check_text(value, f"profile.{label}")
        self._conn.execute(
            "INSERT OR REPLACE INTO profiles VALUES (?,?,?,?,?,?,?,?,?,?,?)",
            (
                profile.id,
                profile.age_bucket,
                profile.gender,
                profile.country,
                profile.native_speaker,
                profile.input_method,
                profile.daily_sms_bucket,
                profile.years_sms_bucket,
                profile.phone_brand,
                profile.phone_model,
                profile.smartphone,
            ),
        )

    def put_batch(
        self,
        batch: SubmissionBatch,
        messages: list[Message],
        profile: UserProfile | None = None,
    ) -> list[str]:
        """Insert a batch, its messages, and optionally a new profile,
        atomically.  Returns the message ids in insertion order."""
        if not messages:
            raise StoreError("a batch must contain at least one message")
        ids = [m.id for m in messages]
        if len(set(ids)) != len(ids):
            raise StoreError("duplicate message id inside the batch")
        if batch.message_ids and batch.message_ids != ids:
            raise StoreError("batch.message_ids does not match the supplied messages")
        for m in messages:
            if m.batch_id != batch.id:
                raise StoreError(f"message {m.id} does not belong to batch {batch.id}")
            _check_text(m.body, f"message {m.id} body")
            if not anonymize.is_scrubbed(m.body):
                raise StoreError(f"message {m.id} body is not anonymized")
            for label, token in (("sender", m.sender_token), ("receiver", m.receiver_token)):
                if token is not None and not anonymize.TOKEN_RE.fullmatch(token):
                    raise StoreError(f"message {m.id} {label} is not a pseudonym token")
            if m.sent_at is not None:
                _check_iso(m.sent_at, f"message {m.id} sent_at")
        _check_iso(batch.received_at, "batch.received_at")

        with self._tx():
            if self._one("SELECT 1 FROM batches WHERE id=?", (batch.id,)):
                raise DuplicateBatchError(f"batch already exists: {batch.id}")
            known = {r[0] for r in self._conn.execute("SELECT id FROM profiles")}
            if profile is not None:
                self._insert_profile(profile)
                known.add(profile.id)
            for m in messages:
                if m.profile_id is not None and m.profile_id not in known:
                    raise UnknownProfileError(f"message {m.id} references unknown profile {m.profile_id}")
            self._conn.execute(
                "INSERT INTO batches VALUES (?,?,?,?,?,?,?,?,?)",
                (
                    batch.id,
                    batch.contributor_ref,
                    batch.collection_method.value,
                    batch.source.value,
                    batch.received_at,
                    batch.status.value,
                    batch.rejection_reason,
                    str(batch.reward_amount) if batch.reward_amount is not None else None,
                    batch.reward_currency,
                ),
            )
            try:
                self._conn.executemany(
                    "INSERT INTO messages VALUES (?,?,?,?,?,?,?,?,?,?,?,?)",
                    [
                        (
                            m.id,
                            m.batch_id,
                            m.body,
                            m.language.value,
                            m.collection_method.value,
                            m.source.value,
                            m.profile_id,
                            m.sent_at,
                            m.sender_token,
                            m.receiver_token,
                            m.status.value,
                            batch.received_at,
                        )
                        for m in messages
                    ],
                )
            except sqlite3.IntegrityError as exc:
                raise StoreError(f"message id already exists: {exc}") from None
        batch.message_ids = ids
        return ids

    def apply_decision(
        self,
        batch_id: str,
        status: Status,
        reason: str | None,
        reward_amount: Decimal | None,
        reward_currency: str | None,
    ) -> SubmissionBatch:
        """Move a pending batch to approved/rejected along with its messages."""
        if status not in (Status.APPROVED, Status.REJECTED):
            raise ValueError("decision status must be approved or rejected")
        with self._tx():
            row = self._one("SELECT status FROM batches WHERE id=?", (batch_id,))
            if row is None:
                raise NotFoundError(f"batch not found: {batch_id}")
            if row[0] != Status.PENDING.value:
                raise TerminalStateError(f"batch {batch_id} already {row[0]}")
            self._conn.execute(
                "UPDATE batches SET status=?, rejection_reason=?, reward_amount=?, reward_currency=? WHERE id=?",
                (
                    status.value,
                    reason,
                    str(reward_amount) if reward_amount is not None else None,
                    reward_currency,
                    batch_id,
                ),
            )
            self._conn.execute(
                "UPDATE messages SET status=? WHERE batch_id=?", (status.value, batch_id)
            )
        batch = self.get_batch(batch_id)
        assert batch is not None
        return batch

    # -- read path

    def _one(self, sql: str, params: tuple = ()):
        return self._conn.execute(sql, params).fetchone()

    def get_batch(self, batch_id: str) -> SubmissionBatch | None:
        with self._lock:
            row = self._one("SELECT * FROM batches WHERE id=?", (batch_id,))
            if row is None:
                return None
            ids = [
                r[0]
                for r in self._conn.execute(
                    "SELECT id FROM messages WHERE batch_id=? ORDER BY id", (batch_id,)
                )
            ]
        return self._batch_from_row(row, ids)

    @staticmethod
    def _batch_from_row(row, ids: list[str]) -> SubmissionBatch:
        return SubmissionBatch(
            id=row[0],
            contributor_ref=row[1],
            collection_method=CollectionMethod(row[2]),
            source=Source(row[3]),
            received_at=row[4],
            status=Status(row[5]),
            rejection_reason=row[6],
            reward_amount=Decimal(row[7]) if row[7] is not None else None,
            reward_currency=row[8],
            message_ids=ids,
        )

    def get_profile(self, profile_id: str) -> UserProfile | None:
        with self._lock:
            row = self._one("SELECT * FROM profiles WHERE id=?", (profile_id,))
        if row is None:
            return None
        return UserProfile(*row)

    @staticmethod
    def _message_from_row(row) -> Message:
        return Message(
            id=row[0],
            batch_id=row[1],
            body=row[2],
            language=Language(row[3]),
            collection_method=CollectionMethod(row[4]),
            source=Source(row[5]),
            profile_id=row[6],
            sent_at=row[7],
            sender_token=row[8],
            receiver_token=row[9],
            status=Status(row[10]),
        )

    def messages_for_batch(self, batch_id: str) -> list[Message]:
        with self._lock:
            rows = self._conn.execute(
                "SELECT id,batch_id,body,language,collection_method,source,profile_id,"
                "sent_at,sender_token,receiver_token,status FROM messages "
                "WHERE batch_id=? ORDER BY id",
                (batch_id,),
            ).fetchall()
        return [self._message_from_row(r) for r in rows]

    def query_messages(
        self,
        *,
        language: Language | None = None,
        source: Source | None = None,
        method: CollectionMethod | None = None,
        status: Status | None = None,
        profile_id: str | None = None,
        offset: int = 0,
        limit: int = 100,
    ) -> tuple[list[Message], int]:
        """Filtered page of messages in (received_at, id) order, plus the
        total match count."""
        if not isinstance(offset, int) or offset < 0:
            raise InvalidFilterError(f"offset must be a non-negative integer: {offset!r}")
        if not isinstance(limit, int) or not 1 <= limit <= MAX_PAGE_SIZE:
            raise InvalidFilterError(f"limit must be between 1 and {MAX_PAGE_SIZE}: {limit!r}")
        clauses: list[str] = []
        params: list = []
        for column, value in (
            ("language", language),
            ("source", source),
            ("collection_method", method),
            ("status", status),
        ):
            if value is not None:
                clauses.append(f"{column}=?")
                params.append(value.value)
        if profile_id is not None:
            clauses.append("profile_id=?")
            params.append(profile_id)
        where = f"WHERE {' AND '.join(clauses)}" if clauses else ""
        with self._lock:
            total = self._one(f"SELECT COUNT(*) FROM messages {where}", tuple(params))[0]
            rows = self._conn.execute(
                "SELECT id,batch_id,body,language,collection_method,source,profile_id,"
                f"sent_at,sender_token,receiver_token,status FROM messages {where} "
                "ORDER BY received_at, id LIMIT ? OFFSET ?",
                (*params, limit, offset),
            ).fetchall()
        return [self._message_from_row(r) for r in rows], total

    def pending_batches(self) -> list[SubmissionBatch]:
        with self._lock:
            rows = self._conn.execute(
                "SELECT * FROM batches WHERE status=? ORDER BY received_at, id",
                (Status.PENDING.value,),
            ).fetchall()
            out = []
            for row in rows:
                ids = [
                    r[0]
                    for r in self._conn.execute(
                        "SELECT id FROM messages WHERE batch_id=? ORDER BY id", (row[0],)
                    )
                ]
                out.append(self._batch_from_row(row, ids))
        return out

    def all_batches(self) -> list[SubmissionBatch]:
        with self._lock:
            rows = self._conn.execute(
                "SELECT * FROM batches ORDER BY received_at, id"
            ).fetchall()
        return [self._batch_from_row(row, []) for row in rows]

    def corpus_bodies(self, status: Status = Status.APPROVED,
                      exclude_batch: str | None = None) -> list[str]:
        sql = "SELECT body FROM messages WHERE status=?"
        params: list = [status.value]
        if exclude_batch is not None:
            sql += " AND batch_id<>?"
            params.append(exclude_batch)
        with self._lock:
            rows = self._conn.execute(sql, tuple(params)).fetchall()
        return [r[0] for r in rows]

    def approved_rows(self) -> list[ApprovedRow]:
        with self._lock:
            rows = self._conn.execute(
                "SELECT m.language, m.collection_method, m.source, b.contributor_ref,"
                " m.profile_id, m.body FROM messages m JOIN batches b ON m.batch_id=b.id"
                " WHERE m.status=?",
                (Status.APPROVED.value,),
            ).fetchall()
        return [ApprovedRow(*r) for r in rows]

    def profiles_map(self) -> dict[str, UserProfile]:
        with self._lock:
            rows = self._conn.execute("SELECT * FROM profiles").fetchall()
        return {r[0]: UserProfile(*r) for r in rows}

    def approved_snapshot(self) -> Snapshot:
        with self._lock:
            rows = self._conn.execute(
                "SELECT id,batch_id,body,language,collection_method,source,profile_id,"
                "sent_at,sender_token,receiver_token,status FROM messages "
                "WHERE status=? ORDER BY id",
                (Status.APPROVED.value,),
            ).fetchall()
            messages = [self._message_from_row(r) for r in rows]
            wanted = {m.profile_id for m in messages if m.profile_id is not None}
            profs = [
                UserProfile(*r)
                for r in self._conn.execute("SELECT * FROM profiles ORDER BY id").fetchall()
                if r[0] in wanted
            ]
        return Snapshot(messages=messages, profiles=profs)

    # -- versions and release artifacts

    def versions(self) -> list[CorpusVersion]:
        with self._lock:
            rows = self._conn.execute(
                "SELECT * FROM versions ORDER BY version_id"
            ).fetchall()
        return [
            CorpusVersion(r[0], r[1], r[2], r[3], json.loads(r[4])) for r in rows
        ]

    def get_version(self, version_id: str) -> CorpusVersion | None:
        with self._lock:
            row = self._one("SELECT * FROM versions WHERE version_id=?", (version_id,))
        if row is None:
            return None
        return CorpusVersion(row[0], row[1], row[2], row[3], json.loads(row[4]))

    def latest_version(self) -> CorpusVersion | None:
        versions = self.versions()
        return versions[-1] if versions else None

    def record_version(self, version: CorpusVersion) -> None:
        """Register a release; versions are append-only and monotone."""
        with self._tx():
            last = self._one(
                "SELECT version_id, message_count_en, message_count_zh FROM versions "
                "ORDER BY version_id DESC LIMIT 1"
            )
            if last is not None:
                if version.version_id <= last[0]:
                    raise VersionOrderError(
                        f"version {version.version_id} does not follow {last[0]}"
                    )
                if version.message_count_en < last[1] or version.message_count_zh < last[2]:
                    raise VersionOrderError(
                        f"version {version.version_id} would shrink the corpus"
                    )
            self._conn.execute(
                "INSERT INTO versions VALUES (?,?,?,?,?)",
                (
                    version.version_id,
                    version.created_at,
                    version.message_count_en,
                    version.message_count_zh,
                    json.dumps(version.artifact_checksums, sort_keys=True),
                ),
            )

    def write_artifact(self, version_id: str, filename: str, data: bytes) -> None:
        """Store a release file.  Published artifacts are immutable: once
        the version is recorded the file may not change."""
        if self.get_version(version_id) is not None:
            raise ReleaseError(f"version {version_id} is published; artifacts are immutable")
        with self._write():
            if self.root is None:
                self._mem_releases.setdefault(version_id, {})[filename] = data
            else:
                (self.root / "releases" / filename).write_bytes(data)

    def read_artifact(self, version_id: str, filename: str) -> bytes:
        if self.root is None:
            try:
                return self._mem_releases[version_id][filename]
            except KeyError:
                raise NotFoundError(f"no artifact {filename} for {version_id}") from None
        path = self.root / "releases" / filename
        if not path.is_file():
            raise NotFoundError(f"no artifact {filename} for {version_id}")
        return path.read_bytes()

    # -- bulk helpers

    def counts_by_language(self, status: Status = Status.APPROVED) -> dict[str, int]:
        with self._lock:
            rows = self._conn.execute(
                "SELECT language, COUNT(*) FROM messages WHERE status=? GROUP BY language",
                (status.value,),
            ).fetchall()
        return {r[0]: r[1] for r in rows}
