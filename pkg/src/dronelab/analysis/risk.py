"""Risk attitude classification from the 20-row price list.

Each row offers a safe amount (row minus one, in euro) against the constant
fifty-fifty lottery over 30 or 0 euro. The final switch from the lottery to
the safe amount identifies the attitude: switching exactly where the safe
amount first exceeds the lottery's expected value is risk neutral, earlier is
risk averse, later is risk seeking. Sheets that alternate three times or more
identify nothing.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from ..errors import DomainError
from ..payoff import MPL_LOTTERY_HIGH, MPL_LOTTERY_WIN_PROB, MPL_ROWS, mpl_safe_amount

RISK_AVERSE = "risk_averse"
RISK_NEUTRAL = "risk_neutral"
RISK_SEEKING = "risk_seeking"
NOT_IDENTIFIABLE = "not_identifiable"

ATTITUDES = (RISK_AVERSE, RISK_NEUTRAL, RISK_SEEKING, NOT_IDENTIFIABLE)

MAX_SWITCHES = 2  # three or more switches leave the attitude unidentified


def neutral_switch_row() -> int:
    """First row whose safe amount strictly beats the lottery's expected value.

    A risk-neutral subject keeps the lottery through the indifference row and
    takes the safe amount from here on.
    """
    expected = MPL_LOTTERY_HIGH * MPL_LOTTERY_WIN_PROB
    for row in range(1, MPL_ROWS + 1):
        if mpl_safe_amount(row) > expected:
            return row
    return MPL_ROWS + 1


@dataclass(frozen=True)
class RiskAttitude:
    attitude: str
    switch_row: int | None
    n_switches: int
    weakly_identified: bool = False


def classify_risk(choices: Sequence[bool]) -> RiskAttitude:
    """Classify one completed sheet; ``choices[i]`` is True when the lottery
    was taken in row i+1."""
    if len(choices) != MPL_ROWS:
        raise DomainError(f"expected {MPL_ROWS} choices, got {len(choices)}")
    picks = [bool(c) for c in choices]
    n_switches = sum(1 for prev, cur in zip(picks, picks[1:]) if prev != cur)
    if n_switches > MAX_SWITCHES:
        return RiskAttitude(NOT_IDENTIFIABLE, None, n_switches)

    if not any(picks):
        # Safe everywhere, even for nothing: averse across the whole sheet.
        return RiskAttitude(RISK_AVERSE, 1, n_switches)
    if picks[-1]:
        # Still on the lottery at the highest safe amount; there is no final
        # switch to anchor on, but the terminal preference is for gambling.
        weak = not all(picks)
        return RiskAttitude(RISK_SEEKING, None, n_switches, weakly_identified=weak)

    last_lottery = max(idx for idx, pick in enumerate(picks) if pick)
    switch_row = last_lottery + 2  # 1-based row of the first safe choice after it
    neutral_row = neutral_switch_row()
    if switch_row == neutral_row:
        attitude = RISK_NEUTRAL
    elif switch_row < neutral_row:
        attitude = RISK_AVERSE
    else:
        attitude = RISK_SEEKING
    return RiskAttitude(attitude, switch_row, n_switches, weakly_identified=n_switches > 1)
