"""Submission validation: language ID, duplicate detection, moderation.

Duplicate detection is deliberately exact and simple: normalized string
equality for exact duplicates and character 3-gram Jaccard for near
duplicates.  At corpus scale (tens of thousands of short texts) the
quadratic near-duplicate scan over one batch is still fast, and exactness
keeps moderation decisions reproducible.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

from .models import Language, Status

CHINESE_RATIO = 0.7
ENGLISH_RATIO = 0.1

# CJK unified ideographs (base + extension A) and compatibility block.
_CJK_RANGES = ((0x4E00, 0x9FFF), (0x3400, 0x4DBF), (0xF900, 0xFAFF))


def _is_cjk(ch: str) -> bool:
    cp = ord(ch)
    return any(lo <= cp <= hi for lo, hi in _CJK_RANGES)


def _is_latin(ch: str) -> bool:
    return ch.isalpha() and not _is_cjk(ch)


def detect_language(text: str) -> Language:
    """Classify by the share of CJK characters among letters.

    r >= 0.7 is chinese, r <= 0.1 is english, anything between is mixed;
    text with no letters at all is unknown.
    """
    cjk = 0
    latin = 0
    for ch in text:
        if _is_cjk(ch):
            cjk += 1
        elif _is_latin(ch):
            latin += 1
    total = cjk + latin
    if total == 0:
        return Language.UNKNOWN
    ratio = cjk / total
    if ratio >= CHINESE_RATIO:
        return Language.CHINESE
    if ratio <= ENGLISH_RATIO:
        return Language.ENGLISH
    return Language.MIXED


# --- duplicate detection ------------------------------------------------------


def normalize_for_dup(text: str) -> str:
    """Casefold and collapse whitespace; the comparison key for dup checks."""
    return " ".join(text.casefold().split())


def shingles(text: str, n: int = 3) -> frozenset[str]:
    """Character n-grams of the normalized text."""
    norm = normalize_for_dup(text)
    if len(norm) < n:
        return frozenset()
    return frozenset(norm[i : i + n] for i in range(len(norm) - n + 1))


def similarity(a: str, b: str, n: int = 3) -> float:
    """Jaccard similarity over character n-grams.

    Texts too short to shingle compare by normalized equality: equal
    pairs score 1.0, otherwise 0.0 (a short text is never "nearly" equal
    to anything).
    """
    sa, sb = shingles(a, n), shingles(b, n)
    if not sa and not sb:
        return 1.0 if normalize_for_dup(a) == normalize_for_dup(b) else 0.0
    if not sa or not sb:
        return 0.0
    inter = len(sa & sb)
    return inter / (len(sa) + len(sb) - inter)


@dataclass(frozen=True)
class ExactDuplicate:
    index: int          # position in the submitted batch
    kind: str           # "blocklist" | "corpus" | "batch"


@dataclass(frozen=True)
class NearDuplicate:
    index: int
    score: float
    kind: str


def find_exact_duplicates(
    bodies: Sequence[str],
    corpus_bodies: Iterable[str],
    blocklist: Iterable[str],
) -> list[ExactDuplicate]:
    """Exact matches of batch bodies against blocklist, corpus, and batch.

    Blocklist membership wins over a corpus hit; a repeat inside the same
    batch is only reported when the body is new to both reference sets.
    """
    block = {normalize_for_dup(b) for b in blocklist}
    corpus = {normalize_for_dup(b) for b in corpus_bodies}
    seen: set[str] = set()
    out: list[ExactDuplicate] = []
    for i, body in enumerate(bodies):
        norm = normalize_for_dup(body)
        if norm in block:
            out.append(ExactDuplicate(i, "blocklist"))
        elif norm in corpus:
            out.append(ExactDuplicate(i, "corpus"))
        elif norm in seen:
            out.append(ExactDuplicate(i, "batch"))
        seen.add(norm)
    return out


def find_near_duplicates(
    bodies: Sequence[str],
    corpus_bodies: Iterable[str],
    blocklist: Iterable[str],
    theta: float,
    n: int = 3,
) -> list[NearDuplicate]:
    """Batch bodies whose best Jaccard score against any reference text
    (blocklist, corpus, or an earlier batch body) reaches ``theta``.

    Exact matches score 1.0 and are reported here too; callers that want
    only the near-but-not-exact set subtract ``find_exact_duplicates``.
    """
    refs: list[tuple[frozenset[str], str, str]] = []
    for body in blocklist:
        refs.append((shingles(body, n), normalize_for_dup(body), "blocklist"))
    for body in corpus_bodies:
        refs.append((shingles(body, n), normalize_for_dup(body), "corpus"))

    out: list[NearDuplicate] = []
    for i, body in enumerate(bodies):
        sh = shingles(body, n)
        norm = normalize_for_dup(body)
        best = 0.0
        best_kind = ""
        for ref_sh, ref_norm, kind in refs:
            if not sh and not ref_sh:
                score = 1.0 if norm == ref_norm else 0.0
            elif not sh or not ref_sh:
                score = 0.0
            else:
                inter = len(sh & ref_sh)
                score = inter / (len(sh) + len(ref_sh) - inter)
            if score > best:
                best, best_kind = score, kind
        if best >= theta:
            out.append(NearDuplicate(i, best, best_kind))
        refs.append((sh, norm, "batch"))
    return out


# --- moderation policy --------------------------------------------------------


@dataclass(frozen=True)
class Policy:
    """Thresholds that drive the moderation recommendation."""

    blocklist_reject_frac: float = 0.3
    neardup_review_frac: float = 0.2
    neardup_theta: float = 0.8
    require_profile: bool = True

    @classmethod
    def from_text(cls, text: str) -> "Policy":
        values: dict[str, str] = {}
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, value = line.partition("=")
            values[key.strip()] = value.strip()
        kwargs = {}
        for name in ("blocklist_reject_frac", "neardup_review_frac", "neardup_theta"):
            if name in values:
                kwargs[name] = float(values[name])
        if "require_profile" in values:
            kwargs["require_profile"] = values["require_profile"].lower() in ("true", "1", "yes")
        return cls(**kwargs)

    @classmethod
    def load(cls, path: str | Path) -> "Policy":
        return cls.from_text(Path(path).read_text("utf-8"))


def default_policy() -> Policy:
    text = resources.files("smscorpus.data").joinpath("policy.txt").read_text("utf-8")
    return Policy.from_text(text)


def default_blocklist() -> list[str]:
    text = resources.files("smscorpus.data").joinpath("blocklist.txt").read_text("utf-8")
    return [line for line in (l.strip() for l in text.splitlines()) if line and not line.startswith("#")]


@dataclass
class QualityReport:
    """Deterministic screening result for one submitted batch."""

    message_count: int
    language_counts: dict[str, int]
    exact_duplicates: list[ExactDuplicate]
    near_duplicates: list[NearDuplicate]
    blocklist_fraction: float
    flagged_fraction: float
    recommendation: str          # "approve" | "review" | "reject"
    reasons: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "message_count": self.message_count,
            "language_counts": dict(self.language_counts),
            "exact_duplicates": [
                {"index": d.index, "kind": d.kind} for d in self.exact_duplicates
            ],
            "near_duplicates": [
                {"index": d.index, "score": round(d.score, 4), "kind": d.kind}
                for d in self.near_duplicates
            ],
            "blocklist_fraction": round(self.blocklist_fraction, 4),
            "flagged_fraction": round(self.flagged_fraction, 4),
            "recommendation": self.recommendation,
            "reasons": list(self.reasons),
        }


def quality_report(
    bodies: Sequence[str],
    languages: Sequence[Language],
    corpus_bodies: Iterable[str],
    blocklist: Iterable[str],
    policy: Policy,
) -> QualityReport:
    """Screen a batch and recommend approve, review, or reject.

    A blocklist hit fraction strictly above ``blocklist_reject_frac``
    rejects outright (templated spam).  Otherwise any flagged fraction
    (exact or near duplicates) at or above ``neardup_review_frac`` sends
    the batch to review.  Same inputs, same report: there is no sampling.
    """
    if not bodies:
        raise ValueError("cannot screen an empty batch")
    blocklist = list(blocklist)
    corpus_bodies = list(corpus_bodies)

    exact = find_exact_duplicates(bodies, corpus_bodies, blocklist)
    near_all = find_near_duplicates(bodies, corpus_bodies, blocklist, policy.neardup_theta)
    exact_idx = {d.index for d in exact}
    near = [d for d in near_all if d.index not in exact_idx]

    n = len(bodies)
    block_hits = sum(1 for d in exact if d.kind == "blocklist")
    flagged = len(exact_idx | {d.index for d in near})
    block_frac = block_hits / n
    flagged_frac = flagged / n

    reasons: list[str] = []
    if block_hits:
        reasons.append(f"{block_hits} blocklist match(es)")
    if exact:
        reasons.append(f"{len(exact)} exact duplicate(s)")
    if near:
        reasons.append(f"{len(near)} near duplicate(s) at theta={policy.neardup_theta}")

    if block_frac > policy.blocklist_reject_frac:
        recommendation = "reject"
        reasons.append(
            f"blocklist fraction {block_frac:.2f} exceeds {policy.blocklist_reject_frac}"
        )
    elif flagged_frac >= policy.neardup_review_frac:
        recommendation = "review"
        reasons.append(
            f"flagged fraction {flagged_frac:.2f} reaches {policy.neardup_review_frac}"
        )
    else:
        recommendation = "approve"

    lang_counts = Counter(l.value for l in languages)
    return QualityReport(
        message_count=n,
        language_counts=dict(lang_counts),
        exact_duplicates=exact,
        near_duplicates=near,
        blocklist_fraction=block_frac,
        flagged_fraction=flagged_frac,
        recommendation=recommendation,
        reasons=reasons,
    )


# --- moderation ----------------------------------------------------------------


def moderate(store, batch_id: str, decision: str, *, reason: str | None = None,
             scheme=None, policy: Policy | None = None):
    """Apply a human decision to a pending batch.

    Approval computes the reward from ``scheme`` (zero reward when no
    scheme applies, e.g. community donations).  The change is atomic over
    the batch and its messages; a second decision on the same batch fails.
    """
    from .errors import MissingProfileError, NotFoundError, TerminalStateError
    from .rewards import compute_reward
    from decimal import Decimal

    if decision not in ("approve", "reject"):
        raise ValueError(f"decision must be approve or reject, not {decision!r}")
    policy = policy or default_policy()

    batch = store.get_batch(batch_id)
    if batch is None:
        raise NotFoundError(f"batch not found: {batch_id}")
    # an already-decided batch is a conflict regardless of what else the
    # new decision would have tripped over
    if batch.status != Status.PENDING:
        raise TerminalStateError(f"batch {batch_id} is already {batch.status.value}")

    if decision == "approve":
        if policy.require_profile:
            messages = store.messages_for_batch(batch_id)
            if any(m.profile_id is None for m in messages):
                raise MissingProfileError(
                    f"batch {batch_id} has messages without a contributor profile"
                )
        if scheme is not None:
            result = compute_reward(scheme, len(batch.message_ids))
            amount, currency = result.amount, result.currency
        else:
            amount, currency = Decimal("0.00"), "USD"
        return store.apply_decision(batch_id, Status.APPROVED, None, amount, currency)
    return store.apply_decision(batch_id, Status.REJECTED, reason or "rejected", None, None)


def approval_rates(batches) -> dict[tuple[str, str], float]:
    """Approval rate per (method, source) over decided batches.

    Cells with no decided batches are absent rather than zero.
    """
    decided: Counter[tuple[str, str]] = Counter()
    approved: Counter[tuple[str, str]] = Counter()
    for b in batches:
        if b.status == Status.PENDING:
            continue
        cell = (b.collection_method.value, b.source.value)
        decided[cell] += 1
        if b.status == Status.APPROVED:
            approved[cell] += 1
    return {cell: approved[cell] / total for cell, total in decided.items()}
