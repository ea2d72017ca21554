"""Bracketed reward schemes and cost accounting.

A scheme is a short table of message-count brackets.  Within a bracket the
payout is a base amount plus a linear bonus: one currency unit for every
``bonus_divisor`` messages past the bracket's anchor point.  The anchor of
the first bracket is its own lower bound; every later bracket is anchored
at the previous bracket's upper bound, which makes the payout curve
continuous across boundaries.  Scheme files are validated for exactly that
continuity at load time, so a typo in a table cannot silently create a
payout cliff.

All money is Decimal.  Rounding to cents happens once, at the end.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from decimal import Decimal, ROUND_HALF_UP
from importlib import resources
from pathlib import Path

from .errors import SchemeError

_CENT = Decimal("0.01")
_CONTINUITY_TOL = Decimal("0.005")

BUILTIN_SCHEMES = ("mturk", "zhubajie1", "zhubajie2", "local")


@dataclass(frozen=True)
class Bracket:
    lower: int
    upper: int | None            # None = open-ended top bracket
    base: Decimal
    bonus_divisor: int | None    # messages per extra currency unit; None = flat

    def contains(self, count: int) -> bool:
        return count >= self.lower and (self.upper is None or count <= self.upper)


@dataclass(frozen=True)
class RewardScheme:
    name: str
    currency: str
    brackets: tuple[Bracket, ...]
    cap: Decimal

    def anchor(self, index: int) -> int:
        """Message count at which bracket ``index`` starts paying its base."""
        if index == 0:
            return self.brackets[0].lower
        prev_upper = self.brackets[index - 1].upper
        assert prev_upper is not None
        return prev_upper

    @property
    def minimum_count(self) -> int:
        return self.brackets[0].lower


@dataclass(frozen=True)
class RewardResult:
    amount: Decimal
    currency: str
    below_minimum: bool = False


def _exact_pay(scheme: RewardScheme, index: int, count: int) -> Decimal:
    bracket = scheme.brackets[index]
    pay = bracket.base
    if bracket.bonus_divisor is not None:
        pay += (Decimal(count) - Decimal(scheme.anchor(index))) / Decimal(bracket.bonus_divisor)
    return min(pay, scheme.cap)


def validate_scheme(scheme: RewardScheme) -> None:
    """Reject gapped, overlapping (beyond shared endpoints), or
    discontinuous bracket tables."""
    brackets = scheme.brackets
    if not brackets:
        raise SchemeError(f"{scheme.name}: no brackets")
    if scheme.cap <= 0:
        raise SchemeError(f"{scheme.name}: cap must be positive")
    for i, b in enumerate(brackets):
        if b.lower < 0 or (b.upper is not None and b.upper < b.lower):
            raise SchemeError(f"{scheme.name}: bracket {i} bounds are inverted")
        if b.bonus_divisor is not None and b.bonus_divisor <= 0:
            raise SchemeError(f"{scheme.name}: bracket {i} divisor must be positive")
        if b.base < 0:
            raise SchemeError(f"{scheme.name}: bracket {i} base is negative")
    for i in range(len(brackets) - 1):
        upper = brackets[i].upper
        if upper is None:
            raise SchemeError(f"{scheme.name}: only the last bracket may be open-ended")
        gap = brackets[i + 1].lower - upper
        if gap not in (0, 1):
            raise SchemeError(
                f"{scheme.name}: brackets {i} and {i + 1} leave a gap or overlap"
            )
        # Continuity: paying the boundary count from either side must agree.
        left = _exact_pay(scheme, i, upper)
        right = _exact_pay(scheme, i + 1, upper)
        if abs(left - right) >= _CONTINUITY_TOL:
            raise SchemeError(
                f"{scheme.name}: payout jumps at {upper} messages "
                f"({left} vs {right})"
            )
    last = brackets[-1]
    if last.upper is None and last.bonus_divisor is None and last.base > scheme.cap:
        raise SchemeError(f"{scheme.name}: top bracket base exceeds the cap")


def compute_reward(scheme: RewardScheme, count: int) -> RewardResult:
    """Payout for ``count`` accepted messages under ``scheme``.

    Counts below the scheme minimum earn nothing and are flagged so the
    caller can tell "too few" from "worth zero".  The amount is capped,
    then rounded half-up to cents.
    """
    if count < scheme.minimum_count:
        return RewardResult(Decimal("0.00"), scheme.currency, below_minimum=True)
    for i, bracket in enumerate(scheme.brackets):
        if bracket.contains(count):
            exact = _exact_pay(scheme, i, count)
            amount = exact.quantize(_CENT, rounding=ROUND_HALF_UP)
            return RewardResult(amount, scheme.currency)
    raise SchemeError(f"{scheme.name}: no bracket covers count {count}")


# --- scheme file parsing -------------------------------------------------------

_CAP_RE = re.compile(r"^cap\s+(\S+)\s+([A-Z]{3})$")


def parse_scheme(text: str, name: str) -> RewardScheme:
    """Parse the line format: ``lower upper base divisor`` rows then a
    ``cap <amount> <currency>`` line.  ``-`` marks an open upper bound or
    a flat bracket."""
    brackets: list[Bracket] = []
    cap: Decimal | None = None
    currency: str | None = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        cap_match = _CAP_RE.match(line)
        if cap_match:
            if cap is not None:
                raise SchemeError(f"{name}: duplicate cap line at line {lineno}")
            cap = Decimal(cap_match.group(1))
            currency = cap_match.group(2)
            continue
        parts = line.split()
        if len(parts) != 4:
            raise SchemeError(f"{name}: line {lineno}: expected 4 fields, got {len(parts)}")
        try:
            lower = int(parts[0])
            upper = None if parts[1] == "-" else int(parts[1])
            base = Decimal(parts[2])
            divisor = None if parts[3] == "-" else int(parts[3])
        except (ValueError, ArithmeticError) as exc:
            raise SchemeError(f"{name}: line {lineno}: {exc}") from None
        brackets.append(Bracket(lower, upper, base, divisor))
    if cap is None or currency is None:
        raise SchemeError(f"{name}: missing cap line")
    scheme = RewardScheme(name=name, currency=currency, brackets=tuple(brackets), cap=cap)
    validate_scheme(scheme)
    return scheme


def load_scheme(name_or_path: str | Path) -> RewardScheme:
    """Load a built-in scheme by name or any scheme file by path."""
    name = str(name_or_path)
    if name in BUILTIN_SCHEMES:
        text = resources.files("smscorpus.data").joinpath(f"{name}.scheme").read_text("utf-8")
        return parse_scheme(text, name)
    path = Path(name_or_path)
    if not path.is_file():
        raise SchemeError(f"unknown scheme: {name}")
    return parse_scheme(path.read_text("utf-8"), path.stem)


def builtin_schemes() -> dict[str, RewardScheme]:
    return {name: load_scheme(name) for name in BUILTIN_SCHEMES}


# --- cost accounting -----------------------------------------------------------


@dataclass(frozen=True)
class FxTable:
    """Spot rates to USD used for cross-market cost comparison."""

    rates: dict[str, Decimal]

    def __post_init__(self):
        for currency, rate in self.rates.items():
            if rate <= 0:
                raise ValueError(f"non-positive fx rate for {currency}")

    def to_usd(self, amount: Decimal, currency: str) -> Decimal:
        if currency not in self.rates:
            raise KeyError(f"no fx rate for {currency}")
        return amount * self.rates[currency]


DEFAULT_FX = FxTable({"USD": Decimal("1"), "SGD": Decimal("0.7848"), "CNY": Decimal("0.1567")})


@dataclass(frozen=True)
class CostSummary:
    currency: str
    total: Decimal
    message_count: int
    per_message: Decimal         # native currency, full precision
    per_message_usd: Decimal     # full precision

    def rounded(self, places: int) -> tuple[Decimal, Decimal]:
        q = Decimal(1).scaleb(-places)
        return (
            self.per_message.quantize(q, rounding=ROUND_HALF_UP),
            self.per_message_usd.quantize(q, rounding=ROUND_HALF_UP),
        )


def cost_per_message(total: Decimal, currency: str, count: int,
                     fx: FxTable = DEFAULT_FX) -> CostSummary:
    if count <= 0:
        raise ValueError("message count must be positive")
    per = total / Decimal(count)
    return CostSummary(
        currency=currency,
        total=total,
        message_count=count,
        per_message=per,
        per_message_usd=fx.to_usd(per, currency),
    )
