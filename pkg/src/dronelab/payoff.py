"""Euro payoffs and the 20-row price-list instrument.

A participant earns the mission value converted at the configured exchange
rate. Every ``mpl_payout_modulus``-th participant additionally has one price
list row drawn at random and played out for real money.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal

from .config import MissionConfig
from .errors import DomainError

MPL_ROWS = 20
MPL_LOTTERY_HIGH = 30  # euro, probability 1/2; otherwise 0
MPL_LOTTERY_WIN_PROB = 0.5


def mpl_safe_amount(row: int) -> int:
    """Safe payment of a 1-based price list row: 0 euro in row 1 up to 19 in row 20."""
    if not 1 <= row <= MPL_ROWS:
        raise DomainError(f"row must be in 1..{MPL_ROWS}, got {row}")
    return row - 1


def mpl_rows() -> list[dict]:
    """The full sheet as rendered to participants."""
    return [
        {
            "row": row,
            "safe_eur": mpl_safe_amount(row),
            "lottery_high_eur": MPL_LOTTERY_HIGH,
            "lottery_win_prob": MPL_LOTTERY_WIN_PROB,
        }
        for row in range(1, MPL_ROWS + 1)
    ]


@dataclass(frozen=True)
class MplOutcome:
    """Realized payout of one drawn price list row."""

    row: int
    chose_lottery: bool
    lottery_won: bool | None
    amount_eur: int


def play_mpl_row(choices: list[bool], row: int, rng: random.Random) -> MplOutcome:
    """Play out one row of a completed sheet. ``choices[i]`` is True when the
    participant picked the lottery in row i+1."""
    if len(choices) != MPL_ROWS:
        raise DomainError(f"expected {MPL_ROWS} choices, got {len(choices)}")
    if not 1 <= row <= MPL_ROWS:
        raise DomainError(f"row must be in 1..{MPL_ROWS}, got {row}")
    chose_lottery = bool(choices[row - 1])
    if chose_lottery:
        won = rng.random() < MPL_LOTTERY_WIN_PROB
        return MplOutcome(row, True, won, MPL_LOTTERY_HIGH if won else 0)
    return MplOutcome(row, False, None, mpl_safe_amount(row))


def draw_mpl_row(rng: random.Random) -> int:
    return rng.randrange(1, MPL_ROWS + 1)


def mpl_payout_applies(participant_index: int, cfg: MissionConfig) -> bool:
    """Whether the price list is paid out for this (1-based) participant."""
    if participant_index < 1:
        raise DomainError("participant_index is 1-based")
    return participant_index % cfg.mpl_payout_modulus == 0


def payoff_euro(
    total_value: int,
    mpl_outcome_eur: float | None,
    participant_index: int,
    cfg: MissionConfig,
) -> Decimal:
    """Euro payoff: mission value at the exchange rate, plus the price list
    payout for every ``mpl_payout_modulus``-th participant. Rounded half-up
    to whole cents."""
    if total_value < 0:
        raise DomainError("total_value must be non-negative")
    if mpl_outcome_eur is not None and mpl_outcome_eur < 0:
        raise DomainError("mpl outcome must be non-negative")
    amount = Decimal(total_value) / Decimal(cfg.taler_per_euro)
    if mpl_payout_applies(participant_index, cfg) and mpl_outcome_eur is not None:
        amount += Decimal(str(mpl_outcome_eur))
    return amount.quantize(Decimal("0.01"), rounding=ROUND_HALF_UP)
