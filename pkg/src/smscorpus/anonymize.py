"""Anonymization: identifier scrubbing, phone pseudonyms, emoticon cleanup.

The scrubber replaces sensitive spans with fixed placeholder codes.  Rules
run in a fixed precedence order (most specific first) and each rule
rewrites every non-overlapping, maximal match before the next rule runs.
Placeholders themselves contain no digits, so a second pass over scrubbed
text is a no-op; the store relies on that to reject un-scrubbed bodies.

Personal names are left alone by design: they cannot be told apart from
ordinary words reliably, and the contact-level identifiers (numbers,
addresses) are what actually link a message to a person.
"""

from __future__ import annotations

import hmac
import hashlib
import re
from dataclasses import dataclass
from importlib import resources
from typing import Callable, Iterable

from .errors import ConfigError

EMAIL_PLACEHOLDER = "<EMAIL>"
URL_PLACEHOLDER = "<URL>"
IP_PLACEHOLDER = "<IP>"
TIME_PLACEHOLDER = "<TIME>"
DATE_PLACEHOLDER = "<DATE>"
DECIMAL_PLACEHOLDER = "<DECIMAL>"
NUMBER_PLACEHOLDER = "<#>"

PLACEHOLDERS = (
    EMAIL_PLACEHOLDER,
    URL_PLACEHOLDER,
    IP_PLACEHOLDER,
    TIME_PLACEHOLDER,
    DATE_PLACEHOLDER,
    DECIMAL_PLACEHOLDER,
    NUMBER_PLACEHOLDER,
)

# Half-width forms of the full-width digit block; other full-width
# punctuation is left untouched.
_FULLWIDTH_DIGITS = {ord(c): ord(d) for c, d in zip("０１２３４５６７８９", "0123456789")}


@dataclass(frozen=True)
class ScrubRule:
    name: str
    pattern: re.Pattern[str]
    replacement: str | Callable[[re.Match[str]], str]

    def apply(self, text: str) -> str:
        return self.pattern.sub(self.replacement, text)


def _scrub_alnum_token(match: re.Match[str]) -> str:
    # Inside a mixed letter/digit token, each digit run of length >= 2 is
    # masked individually; single digits stay (model names like "N8").
    return re.sub(r"\d{2,}", NUMBER_PLACEHOLDER, match.group(0))


SCRUB_RULES: tuple[ScrubRule, ...] = (
    ScrubRule(
        "email",
        re.compile(r"[A-Za-z0-9._%+-]+@[A-Za-z0-9-]+(?:\.[A-Za-z0-9-]+)*\.[A-Za-z]{2,}"),
        EMAIL_PLACEHOLDER,
    ),
    ScrubRule(
        "url",
        # Ends on a non-punctuation char so a sentence period is not eaten.
        re.compile(r"(?:https?://|www\.)[^\s<>\"']*[^\s<>\"'.,;:!?)]", re.IGNORECASE),
        URL_PLACEHOLDER,
    ),
    ScrubRule(
        "ip",
        re.compile(r"(?<!\d)(?:\d{1,3}\.){3}\d{1,3}(?!\d)"),
        IP_PLACEHOLDER,
    ),
    ScrubRule(
        "date",
        re.compile(r"(?<!\d)(?:\d{1,2}/\d{1,2}/\d{2,4}|\d{4}-\d{2}-\d{2})(?!\d)"),
        DATE_PLACEHOLDER,
    ),
    ScrubRule(
        "time",
        re.compile(r"(?<!\d)\d{1,2}:\d{2}(?:\s?[ap]m)?(?!\d)", re.IGNORECASE),
        TIME_PLACEHOLDER,
    ),
    ScrubRule(
        "decimal",
        re.compile(r"(?<!\d)\d+\.\d+(?!\d)"),
        DECIMAL_PLACEHOLDER,
    ),
    ScrubRule(
        "hyphenated_number",
        re.compile(r"(?<![\d-])\d+(?:-\d+)+(?![\d-])"),
        NUMBER_PLACEHOLDER,
    ),
    ScrubRule(
        "alnum_token",
        # A run of letters and digits containing at least one letter and at
        # least one digit run of length >= 2, e.g. serials and usernames.
        re.compile(r"(?<![A-Za-z0-9])(?=[A-Za-z0-9]*\d{2})(?=\d*[A-Za-z])[A-Za-z0-9]+(?![A-Za-z0-9])"),
        _scrub_alnum_token,
    ),
    ScrubRule(
        "integer",
        re.compile(r"(?<!\d)\d{2,}(?!\d)"),
        NUMBER_PLACEHOLDER,
    ),
)


def scrub_body(text: str) -> str:
    """Replace sensitive spans in ``text`` with placeholder codes.

    Full-width digits are folded to ASCII first so phone numbers typed
    with a CJK input method do not slip through.  Applying the function
    twice gives the same result as applying it once.
    """
    text = text.translate(_FULLWIDTH_DIGITS)
    for rule in SCRUB_RULES:
        text = rule.apply(text)
    return text


def is_scrubbed(text: str) -> bool:
    """True when ``text`` is a fixed point of the scrubber."""
    return scrub_body(text) == text


# --- phone number pseudonyms ------------------------------------------------

KEY_LENGTH = 32
TOKEN_RE = re.compile(r"P[0-9a-f]{16}")
_PHONE_CHARS_RE = re.compile(r"[\s\-().]")


@dataclass(frozen=True)
class PseudonymKey:
    """Secret key for the keyed pseudonym function.

    The same key must be used for the life of a corpus; rotating it breaks
    the cross-release stability of contact tokens.
    """

    key_bytes: bytes

    def __post_init__(self):
        if len(self.key_bytes) != KEY_LENGTH:
            raise ConfigError(f"pseudonym key must be {KEY_LENGTH} bytes, got {len(self.key_bytes)}")

    @classmethod
    def from_hex(cls, hex_text: str) -> "PseudonymKey":
        try:
            raw = bytes.fromhex(hex_text.strip())
        except ValueError as exc:
            raise ConfigError(f"pseudonym key is not valid hex: {exc}") from None
        return cls(raw)


def normalize_phone(number: str) -> str:
    """Canonical form used as pseudonym input: digits plus leading '+'."""
    text = _PHONE_CHARS_RE.sub("", number.strip())
    if text.startswith("+"):
        return "+" + text[1:].replace("+", "")
    return text


def pseudonymize_number(number: str, key: PseudonymKey) -> str:
    """Map a phone number to a stable opaque token ``P<16 hex>``.

    Formatting variants of the same number (spaces, dashes, parens) map to
    the same token.  Inverting the mapping requires the key.
    """
    norm = normalize_phone(number)
    if not norm:
        raise ValueError("cannot pseudonymize an empty phone number")
    digest = hmac.new(key.key_bytes, norm.encode("utf-8"), hashlib.sha256).hexdigest()
    return "P" + digest[:16]


def endpoint_token(value: str | None, key: PseudonymKey) -> str | None:
    """Pseudonymize a raw endpoint, passing through values already tokenized."""
    if value is None:
        return None
    value = value.strip()
    if not value:
        return None
    if TOKEN_RE.fullmatch(value):
        return value
    return pseudonymize_number(value, key)


# --- emoticon normalization --------------------------------------------------


def _load_default_emoticons() -> dict[str, str]:
    table: dict[str, str] = {}
    data = resources.files("smscorpus.data").joinpath("emoticons.txt").read_text("utf-8")
    for line in data.splitlines():
        line = line.rstrip("\n")
        if not line or line.startswith("#"):
            continue
        variant, _, canonical = line.partition("\t")
        if not canonical:
            raise ConfigError(f"bad emoticon table line: {line!r}")
        table[variant] = canonical
    return table


_DEFAULT_EMOTICONS: dict[str, str] | None = None
_DEFAULT_EMOTICON_RE: re.Pattern[str] | None = None


def default_emoticon_table() -> dict[str, str]:
    global _DEFAULT_EMOTICONS
    if _DEFAULT_EMOTICONS is None:
        _DEFAULT_EMOTICONS = _load_default_emoticons()
    return dict(_DEFAULT_EMOTICONS)


def _compile_emoticon_re(table: dict[str, str]) -> re.Pattern[str]:
    variants = sorted(table, key=len, reverse=True)
    return re.compile("|".join(re.escape(v) for v in variants))


def normalize_emoticons(text: str, table: dict[str, str] | None = None) -> str:
    """Collapse emoticon spelling variants to one canonical form each.

    Single pass, longest variant wins, unlisted emoticons are untouched.
    Canonical forms never appear as variants, so the rewrite is stable.
    """
    global _DEFAULT_EMOTICON_RE
    if table is None:
        table = default_emoticon_table()
        if _DEFAULT_EMOTICON_RE is None:
            _DEFAULT_EMOTICON_RE = _compile_emoticon_re(table)
        pattern = _DEFAULT_EMOTICON_RE
    else:
        if not table:
            return text
        pattern = _compile_emoticon_re(table)
    return pattern.sub(lambda m: table[m.group(0)], text)


# --- message-level entry point ----------------------------------------------


def anonymize_body(body_raw: str, emoticons: dict[str, str] | None = None) -> str:
    """Emoticon cleanup followed by the identifier scrub."""
    return scrub_body(normalize_emoticons(body_raw, emoticons))


def find_unscrubbed(texts: Iterable[str]) -> list[int]:
    """Indexes of texts that the scrubber would still change."""
    return [i for i, t in enumerate(texts) if not is_scrubbed(t)]
