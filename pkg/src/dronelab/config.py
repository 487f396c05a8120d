"""Mission parameters: the information-value ladder and the experiment configuration."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from .errors import ConfigError, DomainError

# Increment earned by the next successful picture, keyed by the value already
# gathered at the junction. The first picture lifts 0 to 25 with certainty;
# the top of the ladder (100) has no increment left.
DEFAULT_RHO_STEPS: dict[int, int] = {0: 25, 25: 25, 50: 20, 70: 10, 80: 5, 85: 5, 90: 5, 95: 5}

DEFAULT_DRONE_VALUE = 400
DEFAULT_INCREASE_PROB = 0.5
DEFAULT_CRASH_PROB = 0.02
DEFAULT_NUM_JUNCTIONS = 10
DEFAULT_MAX_ROUNDS = 8
DEFAULT_TALER_PER_EURO = 120
DEFAULT_MPL_PAYOUT_MODULUS = 15


@dataclass(frozen=True)
class RhoLadder:
    """Decreasing-increment ladder of attainable per-junction information values.

    ``steps`` maps each non-terminal attainable value to the gain of the next
    successful picture. The induced ladder must be closed (every value plus its
    increment is the next attainable value) and concave (increments never grow
    along the ladder).
    """

    steps: Mapping[int, int]
    ladder: tuple[int, ...] = field(init=False)

    def __post_init__(self) -> None:
        if not self.steps:
            raise ConfigError("ladder needs at least one step")
        values = sorted(self.steps)
        attainable = sorted(set(values) | {v + self.steps[v] for v in values})
        object.__setattr__(self, "steps", dict(self.steps))
        object.__setattr__(self, "ladder", tuple(attainable))
        for v in values:
            inc = self.steps[v]
            if inc <= 0:
                raise ConfigError(f"increment at {v} must be positive, got {inc}")
            nxt = attainable[attainable.index(v) + 1]
            if v + inc != nxt:
                raise ConfigError(
                    f"ladder is not closed at {v}: {v}+{inc} != next attainable value {nxt}"
                )
        top = attainable[-1]
        if top in self.steps:
            raise ConfigError(f"top ladder value {top} must not carry an increment")
        increments = [self.steps[v] for v in attainable[:-1]]
        for lo, hi in zip(increments[1:], increments[:-1]):
            if lo > hi:
                raise ConfigError("increments must be non-increasing along the ladder")

    @classmethod
    def default(cls) -> "RhoLadder":
        return cls(DEFAULT_RHO_STEPS)

    @property
    def top(self) -> int:
        """Largest attainable value; no further picture adds anything."""
        return self.ladder[-1]

    def increment(self, sigma: int) -> int:
        """Gain of the next successful picture when ``sigma`` is already gathered."""
        try:
            return self.steps[sigma]
        except KeyError:
            if sigma == self.top:
                raise DomainError(f"no increment is defined at the ladder top {sigma}") from None
            raise DomainError(f"{sigma} is not on the ladder") from None

    def next_value(self, sigma: int) -> int:
        """Value after one successful picture starting from ``sigma``."""
        return sigma + self.increment(sigma)

    def index(self, sigma: int) -> int:
        """Position of ``sigma`` on the ladder, i.e. the number of successful pictures."""
        try:
            return self.ladder.index(sigma)
        except ValueError:
            raise DomainError(f"{sigma} is not on the ladder") from None

    def scaled(self, factor) -> "RhoLadder":
        """Ladder with every value and increment multiplied by ``factor`` (> 0)."""
        if factor <= 0:
            raise ConfigError("scale factor must be positive")
        return RhoLadder({v * factor: inc * factor for v, inc in self.steps.items()})

    def to_dict(self) -> dict[str, int]:
        return {str(v): inc for v, inc in sorted(self.steps.items())}

    @classmethod
    def from_dict(cls, data: Mapping[str, int]) -> "RhoLadder":
        return cls({int(k): v for k, v in data.items()})


_CONFIG_KEYS = (
    "drone_value",
    "increase_prob",
    "crash_prob",
    "num_junctions",
    "max_rounds",
    "taler_per_euro",
    "mpl_payout_modulus",
    "rho",
)


@dataclass(frozen=True)
class MissionConfig:
    """All mission and payoff parameters for one experiment setup."""

    drone_value: int = DEFAULT_DRONE_VALUE
    increase_prob: float = DEFAULT_INCREASE_PROB
    crash_prob: float = DEFAULT_CRASH_PROB
    num_junctions: int = DEFAULT_NUM_JUNCTIONS
    max_rounds: int = DEFAULT_MAX_ROUNDS
    taler_per_euro: int = DEFAULT_TALER_PER_EURO
    mpl_payout_modulus: int = DEFAULT_MPL_PAYOUT_MODULUS
    rho: RhoLadder = field(default_factory=RhoLadder.default)

    def __post_init__(self) -> None:
        if not 0.0 <= self.increase_prob <= 1.0:
            raise ConfigError(f"increase_prob must be in [0, 1], got {self.increase_prob}")
        if not 0.0 <= self.crash_prob < 1.0:
            raise ConfigError(f"crash_prob must be in [0, 1), got {self.crash_prob}")
        if self.num_junctions < 1:
            raise ConfigError("num_junctions must be at least 1")
        if self.max_rounds < 1:
            raise ConfigError("max_rounds must be at least 1")
        if self.drone_value < 0:
            raise ConfigError("drone_value must be non-negative")
        if self.taler_per_euro <= 0:
            raise ConfigError("taler_per_euro must be positive")
        if self.mpl_payout_modulus < 1:
            raise ConfigError("mpl_payout_modulus must be at least 1")

    @property
    def increase_prob_exact(self) -> Fraction:
        """Increase probability as an exact rational (of the stored float)."""
        return Fraction(self.increase_prob)

    @property
    def crash_prob_exact(self) -> Fraction:
        return Fraction(self.crash_prob)

    def to_dict(self) -> dict:
        return {
            "drone_value": self.drone_value,
            "increase_prob": self.increase_prob,
            "crash_prob": self.crash_prob,
            "num_junctions": self.num_junctions,
            "max_rounds": self.max_rounds,
            "taler_per_euro": self.taler_per_euro,
            "mpl_payout_modulus": self.mpl_payout_modulus,
            "rho": self.rho.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "MissionConfig":
        unknown = set(data) - set(_CONFIG_KEYS)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        kwargs = dict(data)
        if "rho" in kwargs:
            kwargs["rho"] = RhoLadder.from_dict(kwargs["rho"])
        return cls(**kwargs)
