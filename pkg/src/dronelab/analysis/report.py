"""Session-set summary: mission statistics, confidence degrees, behavior
categories, the hot-hand contingency table, and the risk distribution.

Earnings are recomputed uniformly as the mission value at the exchange rate
(price-list payouts are luck of the modulus draw and stay out of the mission
statistics). Standard deviations are sample standard deviations.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path

from ..config import MissionConfig
from ..errors import DegenerateTableError, DomainError
from ..payoff import payoff_euro
from ..policies import CLOSED, OPEN, TREATMENTS
from .labeling import (
    CATEGORIES,
    CATEGORY_EXCLUDED,
    OVERCONFIDENT,
    categorize,
    confidence_degrees,
    hot_hand_scan,
    label_session,
)
from .risk import ATTITUDES, classify_risk
from .stats import TestResult, chi2_2x2, mann_whitney


def _mean(values: list[float]) -> float:
    return sum(values) / len(values) if values else math.nan


def _sd(values: list[float]) -> float:
    if len(values) < 2:
        return 0.0
    mu = _mean(values)
    return math.sqrt(sum((v - mu) ** 2 for v in values) / (len(values) - 1))


@dataclass(frozen=True)
class MissionStats:
    n_sessions: int
    mean_rounds: float
    sd_rounds: float
    mean_value: float
    sd_value: float
    mean_earnings: float
    sd_earnings: float
    crash_rate: float


@dataclass(frozen=True)
class DegreeStats:
    n_included: int
    n_excluded: int
    mean_overconfident: float
    sd_overconfident: float
    mean_underconfident: float
    sd_underconfident: float
    mean_optimal: float
    sd_optimal: float


@dataclass(frozen=True)
class HotHandTable:
    """Counts of started junctions by (hot-hand situation, overconfident label)."""

    no_hh_not_oc: int
    no_hh_oc: int
    hh_not_oc: int
    hh_oc: int
    chi2: TestResult | None

    @property
    def n(self) -> int:
        return self.no_hh_not_oc + self.no_hh_oc + self.hh_not_oc + self.hh_oc

    @property
    def fallacy_share(self) -> float:
        situations = self.hh_not_oc + self.hh_oc
        return self.hh_oc / situations if situations else math.nan


@dataclass(frozen=True)
class SummaryReport:
    config: MissionConfig
    mission: dict[str, MissionStats]
    degrees: dict[str, DegreeStats]
    categories: dict[str, dict[str, int]]
    hot_hand: HotHandTable | None
    risk: dict[str, dict[str, int]]
    count_all_plans: bool = False


def summarize(
    sessions: list[dict],
    cfg: MissionConfig | None = None,
    count_all_plans: bool = False,
    streak_len: int = 3,
) -> SummaryReport:
    """Aggregate a session set into the standard report tables."""
    if not sessions:
        raise DomainError("need at least one session")
    cfg = cfg or MissionConfig.from_dict(sessions[0]["config"])

    mission: dict[str, MissionStats] = {}
    degrees: dict[str, DegreeStats] = {}
    categories: dict[str, dict[str, int]] = {}
    risk: dict[str, dict[str, int]] = {}

    by_treatment = {t: [s for s in sessions if s["treatment"] == t] for t in TREATMENTS}
    for treatment, group in by_treatment.items():
        if not group:
            continue
        rounds = []
        values = []
        earnings = []
        crashes = 0
        for session in group:
            junctions = session["junctions"]
            flights = sum(len(rec["flights"]) for rec in junctions)
            rounds.append(flights / len(junctions))
            values.append(session["total_value"])
            earnings.append(float(payoff_euro(session["total_value"], None, 1, cfg)))
            crashes += 0 if session["intact"] else 1
        mission[treatment] = MissionStats(
            n_sessions=len(group),
            mean_rounds=_mean(rounds),
            sd_rounds=_sd(rounds),
            mean_value=_mean(values),
            sd_value=_sd(values),
            mean_earnings=_mean(earnings),
            sd_earnings=_sd(earnings),
            crash_rate=crashes / len(group),
        )

        session_degrees = [confidence_degrees(s, cfg, count_all_plans) for s in group]
        included = [d for d in session_degrees if not d.excluded]
        degrees[treatment] = DegreeStats(
            n_included=len(included),
            n_excluded=len(session_degrees) - len(included),
            mean_overconfident=_mean([float(d.overconfident) for d in included]),
            sd_overconfident=_sd([float(d.overconfident) for d in included]),
            mean_underconfident=_mean([float(d.underconfident) for d in included]),
            sd_underconfident=_sd([float(d.underconfident) for d in included]),
            mean_optimal=_mean([float(d.optimal) for d in included]),
            sd_optimal=_sd([float(d.optimal) for d in included]),
        )

        counter = {category: 0 for category in CATEGORIES}
        for session_degree in session_degrees:
            counter[categorize(session_degree)] += 1
        categories[treatment] = counter

        attitudes = {attitude: 0 for attitude in ATTITUDES}
        for session in group:
            choices = session.get("mpl_choices")
            if choices is None:
                continue
            attitudes[classify_risk(choices).attitude] += 1
        risk[treatment] = attitudes

    hot_hand = _hot_hand_table(by_treatment[CLOSED], cfg, streak_len)
    return SummaryReport(
        config=cfg,
        mission=mission,
        degrees=degrees,
        categories=categories,
        hot_hand=hot_hand,
        risk=risk,
        count_all_plans=count_all_plans,
    )


def overflight_rounds(
    sessions: list[dict],
    mode: str = "junctions",
    count_all_plans: bool = False,
) -> dict[str, list[float]]:
    """Rounds flown beyond the optimum, among overconfident junctions only.

    ``mode="junctions"`` pools junction-level counts (the default);
    ``mode="subject_means"`` reduces each session to its mean first. Whether
    a between-treatment comparison should pool or average per subject is a
    judgment call, so both are available.
    """
    if mode not in ("junctions", "subject_means"):
        raise DomainError(f"unknown mode {mode!r}")
    out: dict[str, list[float]] = {t: [] for t in TREATMENTS}
    for session in sessions:
        labels = label_session(session, count_all_plans=count_all_plans)
        extras = [
            float(label.rounds_beyond_optimum)
            for label in labels
            if label.label == OVERCONFIDENT
        ]
        if not extras:
            continue
        if mode == "junctions":
            out[session["treatment"]].extend(extras)
        else:
            out[session["treatment"]].append(sum(extras) / len(extras))
    return out


def overflight_comparison(
    sessions: list[dict], mode: str = "junctions", count_all_plans: bool = False
) -> TestResult:
    """Rank test of over-flight magnitude between the two treatments."""
    rounds = overflight_rounds(sessions, mode=mode, count_all_plans=count_all_plans)
    closed, open_ = rounds[CLOSED], rounds[OPEN]
    if not closed or not open_:
        raise DomainError("both treatments need at least one overconfident junction")
    return mann_whitney(closed, open_)


def _hot_hand_table(
    closed_sessions: list[dict], cfg: MissionConfig, streak_len: int
) -> HotHandTable | None:
    if not closed_sessions:
        return None
    cells = {(False, False): 0, (False, True): 0, (True, False): 0, (True, True): 0}
    for session in closed_sessions:
        session_degrees = confidence_degrees(session, cfg)
        if categorize(session_degrees) == CATEGORY_EXCLUDED:
            continue
        labels = label_session(session, cfg)
        records = hot_hand_scan(session, cfg, streak_len)
        started = [
            (rec, labels[rec.junction - 1].label == OVERCONFIDENT) for rec in records
        ]
        for rec, oc in started:
            cells[(rec.hot_hand_situation, oc)] += 1
    table = HotHandTable(
        no_hh_not_oc=cells[(False, False)],
        no_hh_oc=cells[(False, True)],
        hh_not_oc=cells[(True, False)],
        hh_oc=cells[(True, True)],
        chi2=None,
    )
    try:
        chi2 = chi2_2x2(table.no_hh_not_oc, table.no_hh_oc, table.hh_not_oc, table.hh_oc)
    except DegenerateTableError:
        chi2 = None
    return HotHandTable(
        no_hh_not_oc=table.no_hh_not_oc,
        no_hh_oc=table.no_hh_oc,
        hh_not_oc=table.hh_not_oc,
        hh_oc=table.hh_oc,
        chi2=chi2,
    )


def _fmt(value: float, digits: int = 4) -> str:
    if value != value:  # nan
        return "-"
    return f"{value:.{digits}f}"


def render_text(report: SummaryReport) -> str:
    out = io.StringIO()
    present = [t for t in TREATMENTS if t in report.mission]

    out.write("Mission statistics\n")
    out.write("------------------\n")
    for treatment in present:
        stats = report.mission[treatment]
        out.write(
            f"{treatment:>6}: n={stats.n_sessions}"
            f"  rounds/junction={_fmt(stats.mean_rounds, 2)} ({_fmt(stats.sd_rounds, 2)})"
            f"  value={_fmt(stats.mean_value, 2)} ({_fmt(stats.sd_value, 2)})"
            f"  earnings EUR={_fmt(stats.mean_earnings, 2)} ({_fmt(stats.sd_earnings, 2)})"
            f"  crash rate={_fmt(stats.crash_rate, 4)}\n"
        )

    out.write("\nConfidence degrees (means over included sessions, SD in parens)\n")
    out.write("----------------------------------------------------------------\n")
    for treatment in present:
        d = report.degrees[treatment]
        out.write(
            f"{treatment:>6}: n={d.n_included} (excluded {d.n_excluded})"
            f"  overconfidence={_fmt(d.mean_overconfident)} ({_fmt(d.sd_overconfident)})"
            f"  underconfidence={_fmt(d.mean_underconfident)} ({_fmt(d.sd_underconfident)})"
            f"  optimizing={_fmt(d.mean_optimal)} ({_fmt(d.sd_optimal)})\n"
        )

    out.write("\nBehavior categories\n")
    out.write("-------------------\n")
    for treatment in present:
        counts = report.categories[treatment]
        total = sum(counts.values())
        out.write(f"{treatment}:\n")
        for category in CATEGORIES:
            count = counts[category]
            share = count / total if total else 0.0
            out.write(f"  {category:<26}{count:>5}  ({share:7.2%})\n")

    if report.hot_hand is not None:
        t = report.hot_hand
        out.write("\nHot-hand table (started junctions, closed loop)\n")
        out.write("-----------------------------------------------\n")
        out.write("             not-overconfident  overconfident  total\n")
        out.write(
            f"no hot hand  {t.no_hh_not_oc:>17}  {t.no_hh_oc:>13}  {t.no_hh_not_oc + t.no_hh_oc:>5}\n"
        )
        out.write(
            f"hot hand     {t.hh_not_oc:>17}  {t.hh_oc:>13}  {t.hh_not_oc + t.hh_oc:>5}\n"
        )
        if t.chi2 is not None:
            out.write(
                f"chi2(df=1) = {t.chi2.statistic:.2f}, p = {t.chi2.p_value:.3g}, n = {t.n}\n"
            )
        share = t.fallacy_share
        if share == share:
            out.write(f"fallacy share among situations: {share:.2%}\n")

    out.write("\nRisk attitudes\n")
    out.write("--------------\n")
    for treatment in present:
        counts = report.risk[treatment]
        total = sum(counts.values())
        out.write(f"{treatment}: ")
        if total == 0:
            out.write("no price-list sheets\n")
            continue
        parts = [
            f"{attitude}={counts[attitude]} ({counts[attitude] / total:.2%})"
            for attitude in ATTITUDES
        ]
        out.write(", ".join(parts) + "\n")
    return out.getvalue()


def write_tabular(report: SummaryReport, directory: str | Path) -> list[Path]:
    """Write the report as deterministic CSV files; returns the paths."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []

    def _write(name: str, header: list[str], rows: list[list]) -> None:
        path = directory / name
        with path.open("w", encoding="utf-8", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(header)
            writer.writerows(rows)
        written.append(path)

    present = [t for t in TREATMENTS if t in report.mission]
    _write(
        "mission_stats.csv",
        [
            "treatment", "n_sessions", "mean_rounds", "sd_rounds", "mean_value",
            "sd_value", "mean_earnings", "sd_earnings", "crash_rate",
        ],
        [
            [
                t,
                report.mission[t].n_sessions,
                _fmt(report.mission[t].mean_rounds, 6),
                _fmt(report.mission[t].sd_rounds, 6),
                _fmt(report.mission[t].mean_value, 6),
                _fmt(report.mission[t].sd_value, 6),
                _fmt(report.mission[t].mean_earnings, 6),
                _fmt(report.mission[t].sd_earnings, 6),
                _fmt(report.mission[t].crash_rate, 6),
            ]
            for t in present
        ],
    )
    _write(
        "degrees.csv",
        [
            "treatment", "n_included", "n_excluded",
            "mean_overconfident", "sd_overconfident",
            "mean_underconfident", "sd_underconfident",
            "mean_optimal", "sd_optimal",
        ],
        [
            [
                t,
                report.degrees[t].n_included,
                report.degrees[t].n_excluded,
                _fmt(report.degrees[t].mean_overconfident, 6),
                _fmt(report.degrees[t].sd_overconfident, 6),
                _fmt(report.degrees[t].mean_underconfident, 6),
                _fmt(report.degrees[t].sd_underconfident, 6),
                _fmt(report.degrees[t].mean_optimal, 6),
                _fmt(report.degrees[t].sd_optimal, 6),
            ]
            for t in present
        ],
    )
    _write(
        "categories.csv",
        ["treatment", "category", "count", "share"],
        [
            [t, category, report.categories[t][category],
             _fmt(report.categories[t][category] / max(sum(report.categories[t].values()), 1), 6)]
            for t in present
            for category in CATEGORIES
        ],
    )
    if report.hot_hand is not None:
        t = report.hot_hand
        chi2 = t.chi2
        _write(
            "hot_hand.csv",
            ["row", "not_overconfident", "overconfident", "chi2", "p_value"],
            [
                ["no_hot_hand", t.no_hh_not_oc, t.no_hh_oc,
                 _fmt(chi2.statistic, 6) if chi2 else "-", _fmt(chi2.p_value, 9) if chi2 else "-"],
                ["hot_hand", t.hh_not_oc, t.hh_oc, "", ""],
            ],
        )
    _write(
        "risk.csv",
        ["treatment", "attitude", "count"],
        [
            [t, attitude, report.risk[t][attitude]]
            for t in present
            for attitude in ATTITUDES
        ],
    )
    return written
