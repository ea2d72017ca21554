"""Language ID, duplicate detection against a brute-force oracle,
screening thresholds, and the moderation lifecycle."""

from __future__ import annotations

import random
from decimal import Decimal

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from smscorpus.errors import (
    MissingProfileError,
    NotFoundError,
    TerminalStateError,
)
from smscorpus.models import (
    CollectionMethod,
    Language,
    Source,
    Status,
    UserProfile,
)
from smscorpus.rewards import load_scheme
from smscorpus.validate import (
    Policy,
    approval_rates,
    default_blocklist,
    default_policy,
    detect_language,
    find_exact_duplicates,
    find_near_duplicates,
    moderate,
    normalize_for_dup,
    quality_report,
    similarity,
)

from . import conftest
from .conftest import make_batch, make_message, put_messages

# --- language detection -----------------------------------------------------


@pytest.mark.parametrize(
    "text,expected",
    [
        ("on my way, see you soon", Language.ENGLISH),
        ("明天早上见好吗", Language.CHINESE),
        ("ok 好的 see you 明天 at noon 再说 okay 好 done 行 sure 可以", Language.MIXED),
        ("3… 2… 1…!", Language.UNKNOWN),
        ("", Language.UNKNOWN),
        ("<#> <#> !!", Language.UNKNOWN),
    ],
)
def test_detect_language(text, expected):
    assert detect_language(text) == expected


def test_detect_language_thresholds():
    # exactly 7 cjk of 10 letters -> chinese; 1 of 10 -> english
    assert detect_language("好好好好好好好abc") == Language.CHINESE
    assert detect_language("好abcdefghi") == Language.ENGLISH
    assert detect_language("好好abcdefgh") == Language.MIXED


# --- similarity against a brute-force oracle ----------------------------------


def oracle_similarity(a: str, b: str) -> float:
    """Plain-loop character 3-gram Jaccard, written from scratch."""

    def norm(t: str) -> str:
        return " ".join(t.casefold().split())

    def grams(t: str) -> set[str]:
        t = norm(t)
        out = set()
        for i in range(len(t)):
            g = t[i : i + 3]
            if len(g) == 3:
                out.add(g)
        return out

    ga, gb = grams(a), grams(b)
    if not ga and not gb:
        return 1.0 if norm(a) == norm(b) else 0.0
    if not ga or not gb:
        return 0.0
    union = set(list(ga) + list(gb))
    inter = [g for g in ga if g in gb]
    return len(inter) / len(union)


WORDS = ["dinner", "later", "tonight", "movie", "okay", "sure", "where", "when", "吃饭", "明天"]


def test_similarity_matches_oracle_random():
    rng = random.Random(77)
    for _ in range(500):
        a = " ".join(rng.choices(WORDS, k=rng.randint(0, 8)))
        b = " ".join(rng.choices(WORDS, k=rng.randint(0, 8)))
        assert similarity(a, b) == pytest.approx(oracle_similarity(a, b), abs=1e-12)


def test_similarity_crafted_pairs():
    pairs = [
        ("dinner tonight?", "dinner tonight!"),
        ("Dinner  Tonight", "dinner tonight"),
        ("short", "short"),
        ("ab", "ab"),
        ("ab", "cd"),
        ("", ""),
        ("completely different words", "nothing shared at all"),
    ]
    for a, b in pairs:
        assert similarity(a, b) == pytest.approx(oracle_similarity(a, b), abs=1e-12)


def test_similarity_casefold_and_whitespace():
    assert similarity("Meet Me AT Noon", "meet  me at noon") == 1.0


@given(st.text(max_size=40), st.text(max_size=40))
@settings(max_examples=300, deadline=None)
def test_similarity_properties(a, b):
    s = similarity(a, b)
    assert 0.0 <= s <= 1.0
    assert similarity(b, a) == s
    assert similarity(a, a) == 1.0


def test_normalize_for_dup():
    assert normalize_for_dup("  Hello   WORLD \n") == "hello world"


# --- exact and near duplicates ---------------------------------------------------


def test_exact_duplicate_kinds():
    corpus = ["already stored message"]
    blocklist = ["forward this to ten friends"]
    batch = [
        "Forward this to ten friends",   # blocklist (case-insensitive)
        "already  stored message",       # corpus (whitespace collapsed)
        "fresh as can be",
        "fresh as can be",               # repeat inside the batch
    ]
    dups = find_exact_duplicates(batch, corpus, blocklist)
    assert [(d.index, d.kind) for d in dups] == [
        (0, "blocklist"),
        (1, "corpus"),
        (3, "batch"),
    ]


def test_near_duplicates_score_and_threshold():
    corpus = ["dinner at the usual place tonight?"]
    batch = ["dinner at the usual place tonight!", "totally unrelated text here"]
    hits = find_near_duplicates(batch, corpus, [], theta=0.8)
    assert len(hits) == 1
    assert hits[0].index == 0
    assert hits[0].kind == "corpus"
    assert hits[0].score == pytest.approx(
        oracle_similarity(batch[0], corpus[0]), abs=1e-12
    )
    assert hits[0].score >= 0.8
    # raising theta above the score hides the hit
    above = hits[0].score + 1e-9
    assert find_near_duplicates(batch, corpus, [], theta=above) == []


def test_near_duplicates_inside_batch():
    batch = ["we are meeting at the corner cafe", "we are meeting at the corner cafe"]
    hits = find_near_duplicates(batch, [], [], theta=0.8)
    assert [(h.index, h.kind, h.score) for h in hits] == [(1, "batch", 1.0)]


# --- quality report ----------------------------------------------------------------


def _langs(n):
    return [Language.ENGLISH] * n


def _distinct_bodies(n, tag=""):
    pool = [
        "running late sorry", "lunch at noon works", "did you watch the game",
        "my bus broke down", "send the notes please", "happy birthday to jon",
        "raining again today", "new phone who dis", "cannot make it tomorrow",
        "the meeting moved rooms",
    ]
    return [f"{pool[i % len(pool)]} {tag}{i}x" for i in range(n)]


def test_report_approve_when_clean():
    policy = default_policy()
    rep = quality_report(_distinct_bodies(10), _langs(10), [], default_blocklist(), policy)
    assert rep.recommendation == "approve"
    assert rep.flagged_fraction == 0.0


def test_report_reject_on_blocklist_fraction():
    blocklist = ["forward this lucky message now"]
    bodies = ["forward this lucky message now"] * 4 + _distinct_bodies(6)
    rep = quality_report(bodies, _langs(10), [], blocklist, default_policy())
    assert rep.blocklist_fraction == pytest.approx(0.4)
    assert rep.recommendation == "reject"


def test_report_blocklist_threshold_is_strict():
    # exactly at the threshold: not a rejection, but still flagged for review
    blocklist = ["forward this lucky message now"]
    bodies = ["forward this lucky message now"] * 3 + _distinct_bodies(7)
    rep = quality_report(bodies, _langs(10), [], blocklist, default_policy())
    assert rep.blocklist_fraction == pytest.approx(0.3)
    assert rep.recommendation == "review"


def test_report_review_on_near_duplicates():
    corpus = ["dinner at the usual place tonight?", "see you at the library corner"]
    bodies = [
        "dinner at the usual place tonight!",
        "see you at the library corner!!",
    ] + _distinct_bodies(8)
    rep = quality_report(bodies, _langs(10), corpus, [], default_policy())
    assert len(rep.near_duplicates) == 2
    assert rep.flagged_fraction == pytest.approx(0.2)
    assert rep.recommendation == "review"


def test_report_below_review_threshold_approves():
    corpus = ["dinner at the usual place tonight?"]
    bodies = ["dinner at the usual place tonight!"] + _distinct_bodies(9)
    rep = quality_report(bodies, _langs(10), corpus, [], default_policy())
    assert rep.flagged_fraction == pytest.approx(0.1)
    assert rep.recommendation == "approve"


def test_report_deterministic():
    corpus = _distinct_bodies(5, "c")
    bodies = _distinct_bodies(8, "b")
    a = quality_report(bodies, _langs(8), corpus, default_blocklist(), default_policy())
    b = quality_report(bodies, _langs(8), corpus, default_blocklist(), default_policy())
    assert a.to_dict() == b.to_dict()


def test_report_empty_batch_rejected():
    with pytest.raises(ValueError):
        quality_report([], [], [], [], default_policy())


def test_policy_parse():
    policy = Policy.from_text(
        "blocklist_reject_frac=0.5\nneardup_review_frac=0.25\n"
        "neardup_theta=0.9\nrequire_profile=false\n# comment\n"
    )
    assert policy.blocklist_reject_frac == 0.5
    assert policy.neardup_review_frac == 0.25
    assert policy.neardup_theta == 0.9
    assert policy.require_profile is False


def test_default_policy_values():
    policy = default_policy()
    assert policy.blocklist_reject_frac == 0.3
    assert policy.neardup_review_frac == 0.2
    assert policy.neardup_theta == 0.8
    assert policy.require_profile is True


# --- moderation lifecycle -------------------------------------------------------------


def test_moderate_approve_with_reward(mem_store):
    profile = UserProfile(id="p1")
    batch = put_messages(mem_store, 500, profile=profile, source=Source.MTURK)
    updated = moderate(mem_store, batch.id, "approve", scheme=load_scheme("mturk"))
    assert updated.status == Status.APPROVED
    assert updated.reward_amount == Decimal("4.50")
    assert updated.reward_currency == "USD"
    assert all(m.status == Status.APPROVED for m in mem_store.messages_for_batch(batch.id))


def test_moderate_reject_keeps_messages_out(mem_store):
    profile = UserProfile(id="p1")
    batch = put_messages(mem_store, 5, profile=profile)
    updated = moderate(mem_store, batch.id, "reject", reason="copied content")
    assert updated.status == Status.REJECTED
    assert updated.rejection_reason == "copied content"
    assert updated.reward_amount is None
    assert mem_store.corpus_bodies() == []
    # rejected material is retained, not deleted
    assert len(mem_store.messages_for_batch(batch.id)) == 5


def test_moderate_is_terminal(mem_store):
    batch = put_messages(mem_store, 3, profile=UserProfile(id="p1"))
    moderate(mem_store, batch.id, "approve", scheme=load_scheme("mturk"))
    with pytest.raises(TerminalStateError):
        moderate(mem_store, batch.id, "reject")
    with pytest.raises(TerminalStateError):
        moderate(mem_store, batch.id, "approve")


def test_moderate_requires_profile(mem_store):
    batch = put_messages(mem_store, 3)  # no profile attached
    with pytest.raises(MissingProfileError):
        moderate(mem_store, batch.id, "approve", scheme=load_scheme("mturk"))
    relaxed = Policy(require_profile=False)
    updated = moderate(mem_store, batch.id, "approve", scheme=load_scheme("mturk"), policy=relaxed)
    assert updated.status == Status.APPROVED


def test_moderate_reject_never_needs_profile(mem_store):
    batch = put_messages(mem_store, 3)
    updated = moderate(mem_store, batch.id, "reject", reason="spam")
    assert updated.status == Status.REJECTED


def test_moderate_approve_without_scheme_zero_reward(mem_store):
    batch = put_messages(mem_store, 4, profile=UserProfile(id="p1"))
    updated = moderate(mem_store, batch.id, "approve")
    assert updated.status == Status.APPROVED
    assert updated.reward_amount == Decimal("0.00")


def test_moderate_unknown_batch(mem_store):
    with pytest.raises(NotFoundError):
        moderate(mem_store, "nope", "approve")


def test_moderate_bad_decision(mem_store):
    batch = put_messages(mem_store, 3, profile=UserProfile(id="p1"))
    with pytest.raises(ValueError):
        moderate(mem_store, batch.id, "maybe")


# --- approval rates --------------------------------------------------------------------


def test_approval_rates_transcription_cell(mem_store):
    profile = UserProfile(id="p1")
    ids = []
    for i in range(8):
        b = put_messages(
            mem_store, 2, contributor=f"w{i}", profile=profile if i == 0 else None,
            method=CollectionMethod.TRANSCRIPTION, source=Source.MTURK,
        )
        ids.append(b.id)
    relaxed = Policy(require_profile=False)
    for bid in ids[:5]:
        moderate(mem_store, bid, "approve", policy=relaxed)
    for bid in ids[5:]:
        moderate(mem_store, bid, "reject", reason="dup")
    rates = approval_rates(mem_store.all_batches())
    assert rates[("transcription", "mturk")] == pytest.approx(0.625)
    assert round(100 * rates[("transcription", "mturk")], 2) == 62.50


def test_approval_rates_absent_cells(mem_store):
    b = put_messages(mem_store, 2, method=CollectionMethod.UPLOAD, source=Source.ZHUBAJIE)
    rates = approval_rates(mem_store.all_batches())
    assert rates == {}  # pending only: no decided cells at all
    moderate(mem_store, b.id, "reject", reason="test")
    rates = approval_rates(mem_store.all_batches())
    assert rates == {("upload", "zhubajie"): 0.0}
    assert ("transcription", "mturk") not in rates
