"""Domain model for the corpus: messages, contributors, batches, versions.

These types are deliberately plain dataclasses.  Persistence lives in
``store`` and all behaviour that needs configuration (scrubbing, rewards,
language detection) lives in its own module, so the model stays importable
from anywhere without cycles.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from decimal import Decimal
from enum import Enum


class Language(str, Enum):
    ENGLISH = "english"
    CHINESE = "chinese"
    MIXED = "mixed"
    UNKNOWN = "unknown"


class CollectionMethod(str, Enum):
    TRANSCRIPTION = "transcription"
    EXPORT = "export"
    UPLOAD = "upload"


class Source(str, Enum):
    MTURK = "mturk"
    SHORTTASK = "shorttask"
    ZHUBAJIE = "zhubajie"
    LOCAL = "local"
    COMMUNITY = "community"


class Status(str, Enum):
    PENDING = "pending"
    APPROVED = "approved"
    REJECTED = "rejected"


# Closed answer sets for the demographic survey.  Anything outside the set
# collapses to "unknown" rather than failing the submission.
AGE_BUCKETS = ("<16", "16-20", "21-25", "26-30", "31-40", "41-50", ">50")
GENDERS = ("female", "male")
DAILY_SMS_BUCKETS = ("<1", "1-10", "11-50", "51-100", ">100")
YEARS_SMS_BUCKETS = ("<1", "1-2", "3-5", "6-10", ">10")
YES_NO = ("yes", "no")

UNKNOWN = "unknown"


def _closed(value: str | None, allowed: tuple[str, ...]) -> str:
    if value is None:
        return UNKNOWN
    value = value.strip()
    return value if value in allowed else UNKNOWN


def _free_text(value: str | None) -> str:
    if value is None:
        return UNKNOWN
    value = " ".join(value.split())
    return value if value else UNKNOWN


@dataclass
class UserProfile:
    """Demographic survey answers for one contributor.

    Every field other than ``id`` is optional at collection time and
    defaults to ``"unknown"``; closed-set fields are normalized so the
    stats module never sees stray spellings.
    """

    id: str
    age_bucket: str = UNKNOWN
    gender: str = UNKNOWN
    country: str = UNKNOWN
    native_speaker: str = UNKNOWN
    input_method: str = UNKNOWN
    daily_sms_bucket: str = UNKNOWN
    years_sms_bucket: str = UNKNOWN
    phone_brand: str = UNKNOWN
    phone_model: str = UNKNOWN
    smartphone: str = UNKNOWN

    @classmethod
    def from_answers(cls, profile_id: str, answers: dict[str, str | None]) -> "UserProfile":
        """Build a profile from raw survey answers, normalizing each field."""
        return cls(
            id=profile_id,
            age_bucket=_closed(answers.get("age_bucket"), AGE_BUCKETS),
            gender=_closed(answers.get("gender"), GENDERS),
            country=_free_text(answers.get("country")),
            native_speaker=_closed(answers.get("native_speaker"), YES_NO),
            input_method=_free_text(answers.get("input_method")),
            daily_sms_bucket=_closed(answers.get("daily_sms_bucket"), DAILY_SMS_BUCKETS),
            years_sms_bucket=_closed(answers.get("years_sms_bucket"), YEARS_SMS_BUCKETS),
            phone_brand=_free_text(answers.get("phone_brand")),
            phone_model=_free_text(answers.get("phone_model")),
            smartphone=_closed(answers.get("smartphone"), YES_NO),
        )


@dataclass
class Message:
    """One anonymized SMS as it lives in the store and in releases.

    ``body`` is always post-scrub text; the raw body never reaches this
    type.  ``sender_token`` / ``receiver_token`` are pseudonym tokens, not
    phone numbers.  ``sent_at`` is an ISO-8601 string when the channel
    supplied a usable timestamp, otherwise None.
    """

    id: str
    body: str
    language: Language
    collection_method: CollectionMethod
    source: Source
    batch_id: str
    sender_token: str | None = None
    receiver_token: str | None = None
    sent_at: str | None = None
    profile_id: str | None = None
    status: Status = Status.PENDING


@dataclass
class SubmissionBatch:
    """A single submission event: the unit of moderation and reward."""

    id: str
    contributor_ref: str
    collection_method: CollectionMethod
    source: Source
    received_at: str
    message_ids: list[str] = field(default_factory=list)
    status: Status = Status.PENDING
    rejection_reason: str | None = None
    reward_amount: Decimal | None = None
    reward_currency: str | None = None


@dataclass
class CorpusVersion:
    """An immutable monthly release snapshot."""

    version_id: str
    created_at: str
    message_count_en: int
    message_count_zh: int
    artifact_checksums: dict[str, str] = field(default_factory=dict)
