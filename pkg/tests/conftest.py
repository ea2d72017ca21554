"""Shared fixtures: deterministic secrets, stores, and corpus builders."""

from __future__ import annotations

import itertools
from decimal import Decimal

import pytest

from smscorpus.anonymize import PseudonymKey
from smscorpus.config import SecretConfig
from smscorpus.models import (
    CollectionMethod,
    Language,
    Message,
    Source,
    Status,
    SubmissionBatch,
    UserProfile,
)
from smscorpus.store import CorpusStore

TEST_KEY = PseudonymKey(bytes(range(32)))
TEST_UPLOAD_SECRET = bytes(range(32, 64))
TEST_ADMIN_TOKEN = "test-admin-token"

EN_BODY = "see u at the usual place later la"
ZH_BODY = "早点睡吧明天再说好吗"

_id_counter = itertools.count()


@pytest.fixture
def secrets() -> SecretConfig:
    return SecretConfig(TEST_KEY, TEST_UPLOAD_SECRET, TEST_ADMIN_TOKEN)


@pytest.fixture
def mem_store() -> CorpusStore:
    store = CorpusStore(None)
    yield store
    store.close()


def make_message(
    batch_id: str,
    *,
    msg_id: str | None = None,
    body: str = EN_BODY,
    language: Language = Language.ENGLISH,
    method: CollectionMethod = CollectionMethod.TRANSCRIPTION,
    source: Source = Source.MTURK,
    profile_id: str | None = None,
    sent_at: str | None = None,
    sender_token: str | None = None,
    receiver_token: str | None = None,
) -> Message:
    if msg_id is None:
        msg_id = f"m{next(_id_counter):08d}"
    return Message(
        id=msg_id,
        body=body,
        language=language,
        collection_method=method,
        source=source,
        batch_id=batch_id,
        profile_id=profile_id,
        sent_at=sent_at,
        sender_token=sender_token,
        receiver_token=receiver_token,
    )


def make_batch(
    *,
    batch_id: str | None = None,
    contributor: str = "alice",
    method: CollectionMethod = CollectionMethod.TRANSCRIPTION,
    source: Source = Source.MTURK,
    received_at: str = "2011-01-15T10:00:00+00:00",
) -> SubmissionBatch:
    if batch_id is None:
        batch_id = f"b{next(_id_counter):08d}"
    return SubmissionBatch(
        id=batch_id,
        contributor_ref=contributor,
        collection_method=method,
        source=source,
        received_at=received_at,
    )


def put_messages(
    store: CorpusStore,
    count: int,
    *,
    contributor: str = "alice",
    body: str = EN_BODY,
    language: Language = Language.ENGLISH,
    method: CollectionMethod = CollectionMethod.TRANSCRIPTION,
    source: Source = Source.MTURK,
    profile: UserProfile | None = None,
    received_at: str = "2011-01-15T10:00:00+00:00",
    approve: bool = False,
) -> SubmissionBatch:
    """Insert one batch of ``count`` identical-shaped messages."""
    batch = make_batch(
        contributor=contributor, method=method, source=source, received_at=received_at
    )
    messages = [
        make_message(
            batch.id,
            body=body,
            language=language,
            method=method,
            source=source,
            profile_id=profile.id if profile else None,
        )
        for _ in range(count)
    ]
    store.put_batch(batch, messages, profile)
    if approve:
        store.apply_decision(batch.id, Status.APPROVED, None, Decimal("0.00"), "USD")
        batch = store.get_batch(batch.id)
    return batch


# ---------------------------------------------------------------------------
# Corpus-scale fixture.  Recreates the published per-language totals exactly:
# message counts per collection method and per source, and distinct
# contributor counts per source.  The method x source joint assignment uses a
# northwest-corner fill of the two marginals, which any consistent pair of
# marginals admits.
# ---------------------------------------------------------------------------

EN_TOTALS = {
    "messages": 28_724,
    "contributors": 116,
    "methods": {"transcription": 480, "export": 11_104, "upload": 17_140},
    "sources": {
        "mturk": (11_275, 75),
        "shorttask": (280, 17),
        "zhubajie": (0, 0),
        "local": (16_701, 20),
        "community": (468, 4),
    },
}
ZH_TOTALS = {
    "messages": 29_100,
    "contributors": 515,
    "methods": {"transcription": 15_753, "export": 12_344, "upload": 1_003},
    "sources": {
        "mturk": (55, 19),
        "shorttask": (0, 0),
        "zhubajie": (23_789, 483),
        "local": (3_544, 10),
        "community": (1_712, 3),
    },
}

_METHOD_ORDER = ("transcription", "export", "upload")


def _northwest_cells(totals: dict) -> list[tuple[str, str, int]]:
    remaining = dict(totals["methods"])
    cells: list[tuple[str, str, int]] = []
    for source, (msgs, _contribs) in totals["sources"].items():
        left = msgs
        for method in _METHOD_ORDER:
            take = min(left, remaining[method])
            if take:
                cells.append((source, method, take))
                remaining[method] -= take
                left -= take
            if not left:
                break
        assert left == 0, f"source {source} could not be placed"
    assert all(v == 0 for v in remaining.values())
    return cells


def _split_even(total: int, parts: int) -> list[int]:
    q, r = divmod(total, parts)
    return [q + 1] * r + [q] * (parts - r)


def build_scaled_corpus(store: CorpusStore, totals: dict, language: Language,
                        body: str, prefix: str) -> None:
    cells = _northwest_cells(totals)
    serial = itertools.count()
    for source, (msgs, contribs) in totals["sources"].items():
        if msgs == 0:
            continue
        quotas = list(
            zip(
                [f"{prefix}-{source}-c{i}" for i in range(contribs)],
                _split_even(msgs, contribs),
            )
        )
        qi = 0
        contributor, quota = quotas[0]
        for cell_source, method, count in cells:
            if cell_source != source:
                continue
            while count:
                if quota == 0:
                    qi += 1
                    contributor, quota = quotas[qi]
                take = min(count, quota)
                _bulk_batch(
                    store,
                    take,
                    contributor=contributor,
                    method=CollectionMethod(method),
                    source=Source(source),
                    language=language,
                    body=body,
                    serial=serial,
                    prefix=prefix,
                )
                count -= take
                quota -= take


def _bulk_batch(store, count, *, contributor, method, source, language, body,
                serial, prefix):
    batch = SubmissionBatch(
        id=f"{prefix}b{next(serial):06d}",
        contributor_ref=contributor,
        collection_method=method,
        source=source,
        received_at="2011-01-15T10:00:00+00:00",
    )
    messages = [
        Message(
            id=f"{prefix}m{next(serial):07d}",
            body=body,
            language=language,
            collection_method=method,
            source=source,
            batch_id=batch.id,
        )
        for _ in range(count)
    ]
    store.put_batch(batch, messages)
    store.apply_decision(batch.id, Status.APPROVED, None, None, None)


@pytest.fixture(scope="session")
def reference_scale_store() -> CorpusStore:
    """A store whose approved corpus matches the published totals."""
    store = CorpusStore(None)
    build_scaled_corpus(store, EN_TOTALS, Language.ENGLISH, EN_BODY, "en")
    build_scaled_corpus(store, ZH_TOTALS, Language.CHINESE, ZH_BODY, "zh")
    yield store
    store.close()
