"""Descriptive statistics over the approved corpus.

Everything aggregates the store's approved messages only: pending and
rejected material never shows up in public numbers.  All outputs are
plain data with deterministic ordering so they can be frozen into release
artifacts byte for byte.
"""

from __future__ import annotations

import re
from collections import Counter, defaultdict
from dataclasses import dataclass

from . import anonymize
from .models import (
    AGE_BUCKETS,
    DAILY_SMS_BUCKETS,
    GENDERS,
    UNKNOWN,
    YEARS_SMS_BUCKETS,
    YES_NO,
    CollectionMethod,
    Language,
    Source,
    UserProfile,
)
from .store import ApprovedRow, CorpusStore

CONTRIBUTION_BUCKETS = ((1, 30), (31, 100), (101, 300), (301, 1000), (1001, None))

_PROFILE_DIMENSIONS = {
    "age_bucket": AGE_BUCKETS,
    "gender": GENDERS,
    "country": None,
    "native_speaker": YES_NO,
    "input_method": None,
    "daily_sms_bucket": DAILY_SMS_BUCKETS,
    "years_sms_bucket": YEARS_SMS_BUCKETS,
    "phone_brand": None,
    "phone_model": None,
    "smartphone": YES_NO,
}

_PLACEHOLDER_RE = re.compile("|".join(re.escape(p) for p in anonymize.PLACEHOLDERS))
_REPORT_LANGUAGES = (Language.ENGLISH, Language.CHINESE)


def _bucket_label(lo: int, hi: int | None) -> str:
    return f"{lo}-{hi}" if hi is not None else f">{lo - 1}"


@dataclass(frozen=True)
class BucketCount:
    label: str
    count: int
    share: float        # percent of the histogram total, 1 decimal

    def to_dict(self) -> dict:
        return {"label": self.label, "count": self.count, "share": self.share}


@dataclass
class Histogram:
    dimension: str
    weight_basis: str   # "by_message" | "by_contributor"
    total: int
    buckets: list[BucketCount]

    def share_of(self, label: str) -> float:
        for b in self.buckets:
            if b.label == label:
                return b.share
        return 0.0

    def to_dict(self) -> dict:
        return {
            "dimension": self.dimension,
            "weight_basis": self.weight_basis,
            "total": self.total,
            "buckets": [b.to_dict() for b in self.buckets],
        }


def _histogram(dimension: str, basis: str, counts: Counter[str],
               canonical: tuple[str, ...] | None) -> Histogram:
    total = sum(counts.values())

    def share(n: int) -> float:
        return round(100.0 * n / total, 1) if total else 0.0

    buckets: list[BucketCount] = []
    if canonical is not None:
        order = [label for label in canonical]
    else:
        order = sorted(
            (label for label in counts if label != UNKNOWN),
            key=lambda l: (-counts[l], l),
        )
    for label in order:
        buckets.append(BucketCount(label, counts.get(label, 0), share(counts.get(label, 0))))
    buckets.append(BucketCount(UNKNOWN, counts.get(UNKNOWN, 0), share(counts.get(UNKNOWN, 0))))
    return Histogram(dimension=dimension, weight_basis=basis, total=total, buckets=buckets)


def _rows(store: CorpusStore, language: Language | None) -> list[ApprovedRow]:
    rows = store.approved_rows()
    if language is None:
        return rows
    return [r for r in rows if r.language == language.value]


@dataclass
class LanguageSummary:
    messages: int
    contributors: int

    @property
    def mean_messages_per_contributor(self) -> float:
        return self.messages / self.contributors if self.contributors else 0.0


def corpus_summary(store: CorpusStore) -> dict[Language, LanguageSummary]:
    """Message and contributor counts per language over approved messages."""
    messages: Counter[str] = Counter()
    contributors: defaultdict[str, set[str]] = defaultdict(set)
    for row in store.approved_rows():
        messages[row.language] += 1
        contributors[row.language].add(row.contributor_ref)
    out: dict[Language, LanguageSummary] = {}
    for lang in Language:
        if messages[lang.value] or lang in _REPORT_LANGUAGES:
            out[lang] = LanguageSummary(
                messages=messages[lang.value],
                contributors=len(contributors[lang.value]),
            )
    return out


def contributor_distribution(store: CorpusStore, language: Language) -> Histogram:
    """How many contributors fall in each message-count bucket."""
    per_contributor: Counter[str] = Counter()
    for row in _rows(store, language):
        per_contributor[row.contributor_ref] += 1
    counts: Counter[str] = Counter()
    for n in per_contributor.values():
        for lo, hi in CONTRIBUTION_BUCKETS:
            if n >= lo and (hi is None or n <= hi):
                counts[_bucket_label(lo, hi)] += 1
                break
    labels = tuple(_bucket_label(lo, hi) for lo, hi in CONTRIBUTION_BUCKETS)
    total = sum(counts.values())

    def share(n: int) -> float:
        return round(100.0 * n / total, 1) if total else 0.0

    return Histogram(
        dimension="messages_contributed",
        weight_basis="by_contributor",
        total=total,
        buckets=[BucketCount(l, counts.get(l, 0), share(counts.get(l, 0))) for l in labels],
    )


def fraction_under(store: CorpusStore, language: Language, threshold: int = 30) -> float:
    """Share of contributors with fewer than ``threshold`` messages."""
    per_contributor: Counter[str] = Counter()
    for row in _rows(store, language):
        per_contributor[row.contributor_ref] += 1
    if not per_contributor:
        return 0.0
    small = sum(1 for n in per_contributor.values() if n < threshold)
    return small / len(per_contributor)


def breakdown(
    store: CorpusStore,
    dimension: str,
    weight_basis: str = "by_message",
    language: Language | None = None,
) -> Histogram:
    """Distribute messages or contributors over one profile dimension.

    Messages without a profile land in the explicit ``unknown`` bucket,
    which is always present.
    """
    if dimension not in _PROFILE_DIMENSIONS:
        raise ValueError(f"unknown profile dimension: {dimension}")
    if weight_basis not in ("by_message", "by_contributor"):
        raise ValueError(f"weight_basis must be by_message or by_contributor: {weight_basis}")
    rows = _rows(store, language)
    profiles = store.profiles_map()
    counts: Counter[str] = Counter()
    if weight_basis == "by_message":
        for row in rows:
            prof = profiles.get(row.profile_id) if row.profile_id else None
            counts[getattr(prof, dimension) if prof else UNKNOWN] += 1
    else:
        for prof in _contributor_profiles_for(rows, profiles).values():
            counts[getattr(prof, dimension) if prof else UNKNOWN] += 1
    return _histogram(dimension, weight_basis, counts, _PROFILE_DIMENSIONS[dimension])


def _contributor_profiles_for(rows: list[ApprovedRow],
                              profiles: dict[str, UserProfile]) -> dict[str, UserProfile | None]:
    # A contributor's profile is the first one (by profile id) attached to
    # any of their messages; normally there is exactly one.
    by_contributor: dict[str, UserProfile | None] = {}
    for row in sorted(rows, key=lambda r: (r.contributor_ref, r.profile_id or "~")):
        if row.contributor_ref not in by_contributor or by_contributor[row.contributor_ref] is None:
            prof = profiles.get(row.profile_id) if row.profile_id else None
            if row.contributor_ref not in by_contributor or prof is not None:
                by_contributor[row.contributor_ref] = prof
    return by_contributor


def method_counts(store: CorpusStore, language: Language) -> dict[str, int]:
    counts: Counter[str] = Counter()
    for row in _rows(store, language):
        counts[row.collection_method] += 1
    return {m.value: counts.get(m.value, 0) for m in CollectionMethod}


def source_table(store: CorpusStore, language: Language) -> dict[str, dict[str, int]]:
    """Messages and distinct contributors per source, plus a total row."""
    messages: Counter[str] = Counter()
    contributors: defaultdict[str, set[str]] = defaultdict(set)
    all_contributors: set[str] = set()
    for row in _rows(store, language):
        messages[row.source] += 1
        contributors[row.source].add(row.contributor_ref)
        all_contributors.add(row.contributor_ref)
    table = {
        s.value: {"messages": messages.get(s.value, 0), "contributors": len(contributors[s.value])}
        for s in Source
    }
    table["total"] = {"messages": sum(messages.values()), "contributors": len(all_contributors)}
    return table


def count_tokens(body: str, language: Language) -> int:
    """Token count: whitespace tokens for english, CJK characters plus
    placeholders for chinese."""
    if language == Language.CHINESE:
        from .validate import _is_cjk

        cjk = sum(1 for ch in body if _is_cjk(ch))
        return cjk + len(_PLACEHOLDER_RE.findall(body))
    return len(body.split())


def length_stats(store: CorpusStore, language: Language) -> dict[str, float]:
    rows = _rows(store, language)
    if not rows:
        return {"messages": 0, "mean_chars": 0.0, "mean_tokens": 0.0}
    chars = sum(len(r.body) for r in rows)
    tokens = sum(count_tokens(r.body, language) for r in rows)
    n = len(rows)
    return {
        "messages": n,
        "mean_chars": round(chars / n, 1),
        "mean_tokens": round(tokens / n, 1),
    }


_REPORT_BREAKDOWNS = (
    ("age_bucket", "by_message"),
    ("gender", "by_message"),
    ("native_speaker", "by_contributor"),
    ("daily_sms_bucket", "by_contributor"),
    ("years_sms_bucket", "by_contributor"),
    ("phone_brand", "by_contributor"),
    ("smartphone", "by_contributor"),
)


def corpus_report(store: CorpusStore) -> dict:
    """The full JSON-ready statistics report shipped with releases."""
    summary = corpus_summary(store)
    languages = {}
    for lang, s in summary.items():
        languages[lang.value] = {
            "messages": s.messages,
            "contributors": s.contributors,
            "mean_messages_per_contributor": round(s.mean_messages_per_contributor, 1),
        }
    report: dict = {
        "summary": {
            "total_messages": sum(s.messages for s in summary.values()),
            "languages": languages,
        },
        "methods": {},
        "sources": {},
        "contributor_distribution": {},
        "length": {},
        "demographics": {},
    }
    for lang in _REPORT_LANGUAGES:
        key = lang.value
        report["methods"][key] = method_counts(store, lang)
        report["sources"][key] = source_table(store, lang)
        report["contributor_distribution"][key] = [
            b.to_dict() for b in contributor_distribution(store, lang).buckets
        ]
        report["length"][key] = length_stats(store, lang)
    for dimension, basis in _REPORT_BREAKDOWNS:
        entry = {}
        for lang in _REPORT_LANGUAGES:
            hist = breakdown(store, dimension, basis, lang)
            entry[lang.value] = {
                "weight_basis": basis,
                "buckets": [b.to_dict() for b in hist.buckets],
            }
        report["demographics"][dimension] = entry
    return report
