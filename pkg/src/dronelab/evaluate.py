"""Exact and Monte Carlo policy evaluation.

Exact expectations are computed junction by junction: within a junction every
increase path is enumerated (at most 2^(max_rounds-1) of them) with the crash
branch folded in at every flight, and junctions are chained through the
survival probability. This is mathematically identical to enumerating whole
mission trees at a tiny fraction of the cost, and it is exact because the
per-junction process restarts identically whenever the drone arrives intact.

Monte Carlo simulation takes a vectorized path for policies that are pure
functions of (junction, rounds flown, junction value) and falls back to
mission-by-mission simulation for stateful or randomized policies.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .config import MissionConfig
from .errors import DomainError, UnsupportedPolicyError
from .policies import run_policy_mission
from .rng import derive_seed, make_stream


@dataclass(frozen=True)
class JunctionProfile:
    """Exact per-junction quantities, conditional on arriving intact."""

    expected_info: Fraction
    survival: Fraction
    expected_flights: Fraction
    info_distribution: dict


@dataclass(frozen=True)
class ExactEvaluation:
    expected_value: Fraction
    survival_probability: Fraction
    expected_flights: Fraction
    expected_junctions_started: Fraction
    per_junction: tuple[JunctionProfile, ...]

    @property
    def expected_rounds_per_junction(self) -> Fraction:
        return self.expected_flights / self.expected_junctions_started


@dataclass(frozen=True)
class PolicyStats:
    """Summary of simulated missions."""

    n_missions: int
    mean_value: float
    std_value: float
    crash_rate: float
    mean_rounds_per_junction: float
    info_distribution: dict[int, int]

    @property
    def std_error(self) -> float:
        return self.std_value / self.n_missions**0.5


def _decision_fn(policy, cfg: MissionConfig):
    fn_factory = getattr(policy, "decision_fn", None)
    if fn_factory is None:
        raise UnsupportedPolicyError(
            f"{policy!r} is not a pure context policy; exact evaluation is unsupported"
        )
    try:
        return fn_factory(cfg)
    except NotImplementedError as exc:
        raise UnsupportedPolicyError(
            f"{policy!r} is history-dependent or randomized; exact evaluation is unsupported"
        ) from exc


def _enumerate_junction(fn, junction: int, cfg: MissionConfig) -> JunctionProfile:
    p = cfg.increase_prob_exact
    r = cfg.crash_prob_exact
    top = cfg.rho.top

    info_dist: dict = {}
    survival = Fraction(0)
    expected_flights = Fraction(0)
    stack = [(0, cfg.rho.ladder[0], Fraction(1))]
    while stack:
        i, sigma, prob = stack.pop()
        can_fly = i < cfg.max_rounds and sigma != top
        if not can_fly or not fn(junction, i, sigma):
            survival += prob
            info_dist[sigma] = info_dist.get(sigma, Fraction(0)) + prob
            expected_flights += i * prob
            continue
        if i == 0:
            branches = [(cfg.rho.next_value(sigma), Fraction(1))]
        else:
            branches = [(cfg.rho.next_value(sigma), p), (sigma, 1 - p)]
        for sigma_next, q in branches:
            if q == 0:
                continue
            taken = prob * q
            if r > 0:
                crash_mass = taken * r
                info_dist[sigma_next] = info_dist.get(sigma_next, Fraction(0)) + crash_mass
                expected_flights += (i + 1) * crash_mass
            alive = taken * (1 - r)
            if alive > 0:
                stack.append((i + 1, sigma_next, alive))
    expected_info = sum((v * q for v, q in info_dist.items()), Fraction(0))
    return JunctionProfile(
        expected_info=expected_info,
        survival=survival,
        expected_flights=expected_flights,
        info_distribution=info_dist,
    )


def evaluate_policy_exact(policy, cfg: MissionConfig) -> ExactEvaluation:
    """Exact expected mission value of a deterministic context-only policy."""
    fn = _decision_fn(policy, cfg)
    reach = Fraction(1)
    expected_value = Fraction(0)
    expected_flights = Fraction(0)
    expected_started = Fraction(0)
    profiles = []
    for j in range(1, cfg.num_junctions + 1):
        profile = _enumerate_junction(fn, j, cfg)
        profiles.append(profile)
        expected_value += reach * profile.expected_info
        expected_flights += reach * profile.expected_flights
        expected_started += reach
        reach *= profile.survival
    expected_value += Fraction(cfg.drone_value) * reach
    return ExactEvaluation(
        expected_value=expected_value,
        survival_probability=reach,
        expected_flights=expected_flights,
        expected_junctions_started=expected_started,
        per_junction=tuple(profiles),
    )


def _action_table(fn, cfg: MissionConfig) -> np.ndarray:
    ladder = cfg.rho.ladder
    table = np.zeros((cfg.num_junctions, cfg.max_rounds, len(ladder)), dtype=bool)
    for j in range(cfg.num_junctions):
        for i in range(cfg.max_rounds):
            for k, sigma in enumerate(ladder):
                if sigma == cfg.rho.top:
                    continue
                table[j, i, k] = bool(fn(j + 1, i, sigma))
    return table


def _simulate_vectorized(fn, cfg: MissionConfig, seed: int, n: int) -> PolicyStats:
    table = _action_table(fn, cfg)
    ladder = np.array(cfg.rho.ladder, dtype=np.int64)
    rng = np.random.default_rng(seed)

    sigma_idx = np.zeros(n, dtype=np.int16)
    alive = np.ones(n, dtype=bool)
    banked = np.zeros(n, dtype=np.int64)
    flights = np.zeros(n, dtype=np.int32)
    junctions_started = np.zeros(n, dtype=np.int32)
    info_counts = np.zeros(len(ladder), dtype=np.int64)

    for j in range(cfg.num_junctions):
        sigma_idx[:] = 0
        started = alive.copy()
        junctions_started += started
        for i in range(cfg.max_rounds):
            act = alive & table[j, i, sigma_idx]
            if not act.any():
                break
            u_inc = rng.random(n)
            u_crash = rng.random(n)
            if i == 0:
                inc = act
            else:
                inc = act & (u_inc < cfg.increase_prob)
            sigma_idx[inc] += 1
            crash = act & (u_crash < cfg.crash_prob)
            alive &= ~crash
            flights += act
        np.add.at(info_counts, sigma_idx[started], 1)
        banked += np.where(started, ladder[sigma_idx], 0)

    values = banked + np.where(alive, cfg.drone_value, 0)
    std = float(values.std(ddof=1)) if n > 1 else 0.0
    info_distribution = {
        int(ladder[k]): int(info_counts[k]) for k in range(len(ladder)) if info_counts[k]
    }
    return PolicyStats(
        n_missions=n,
        mean_value=float(values.mean()),
        std_value=std,
        crash_rate=float(1.0 - alive.mean()),
        mean_rounds_per_junction=float(flights.sum() / junctions_started.sum()),
        info_distribution=info_distribution,
    )


def _simulate_scalar(policy, cfg: MissionConfig, seed: int, n: int) -> PolicyStats:
    values = np.empty(n, dtype=np.int64)
    crashes = 0
    total_flights = 0
    total_junctions = 0
    info_counts: dict[int, int] = {}
    for idx in range(n):
        rng = make_stream(derive_seed(seed, "mission", idx))
        if hasattr(policy, "bind_rng"):
            policy.bind_rng(rng)
        log = run_policy_mission(policy, cfg, rng)
        values[idx] = log.total_value
        crashes += 0 if log.intact else 1
        total_junctions += len(log.junctions)
        for rec in log.junctions:
            total_flights += rec.rounds_flown
            info_counts[rec.info] = info_counts.get(rec.info, 0) + 1
    std = float(values.std(ddof=1)) if n > 1 else 0.0
    return PolicyStats(
        n_missions=n,
        mean_value=float(values.mean()),
        std_value=std,
        crash_rate=crashes / n,
        mean_rounds_per_junction=total_flights / total_junctions,
        info_distribution=dict(sorted(info_counts.items())),
    )


def simulate_missions(policy, cfg: MissionConfig, seed: int, n_missions: int) -> PolicyStats:
    """Simulate ``n_missions`` independent missions, deterministically in ``seed``.

    Context-only policies run on the vectorized engine; stateful or randomized
    policies run mission by mission on derived seeds (much slower).
    """
    if n_missions < 1:
        raise DomainError("n_missions must be at least 1")
    try:
        fn = _decision_fn(policy, cfg)
    except UnsupportedPolicyError:
        return _simulate_scalar(policy, cfg, seed, n_missions)
    return _simulate_vectorized(fn, cfg, seed, n_missions)
