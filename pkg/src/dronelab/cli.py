"""Operator command line: solve, evaluate, simulate, synth, analyze, serve.

Every subcommand is deterministic given its configuration and seed. Exit
codes: 0 success, 2 configuration or usage problems, 1 internal failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .agents import BiasProfile, PopulationSpec, make_policy
from .config import MissionConfig
from .dp import DpPolicy, disagreements_with_heuristic, export_table, solve_dp
from .errors import DroneLabError
from .evaluate import evaluate_policy_exact, simulate_missions
from .policies import (
    ClosedLoopHeuristicPolicy,
    always_fly_policy,
    open_loop_heuristic_policy,
)
from .sessionlog import read_sessions, write_sessions
from .service.core import ExperimentService
from .service.http import serve_forever
from .analysis.report import render_text, summarize, write_tabular

POLICY_CHOICES = "closed-heuristic, open-heuristic, dp, always-max, agent:<kind>"


def _load_config(path: str | None) -> MissionConfig:
    if path is None:
        return MissionConfig()
    with open(path, "r", encoding="utf-8") as handle:
        return MissionConfig.from_dict(json.load(handle))


def _resolve_policy(name: str, cfg: MissionConfig, treatment: str | None = None):
    if name == "closed-heuristic":
        return ClosedLoopHeuristicPolicy(cfg)
    if name == "open-heuristic":
        return open_loop_heuristic_policy(cfg)
    if name == "dp":
        return DpPolicy.solve(cfg)
    if name == "always-max":
        return always_fly_policy(cfg)
    if name.startswith("agent:"):
        spec = name.split(":", 1)[1]
        if "@" in spec:
            kind, treatment = spec.split("@", 1)
        else:
            kind = spec
        return make_policy(BiasProfile(kind=kind), treatment or "closed", cfg)
    raise DroneLabError(f"unknown policy {name!r}; choose from {POLICY_CHOICES}")


def _cmd_solve(args: argparse.Namespace) -> int:
    cfg = _load_config(args.config)
    table = solve_dp(cfg)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "dp_table.tsv").write_text(export_table(table), encoding="utf-8")
    rows = disagreements_with_heuristic(table)
    lines = ["junction\tround\tsigma\tdp_action\theuristic_action"]
    lines += [
        f"{r['junction']}\t{r['rounds_flown']}\t{r['sigma']}\t{r['dp_action']}\t{r['heuristic_action']}"
        for r in rows
    ]
    (out_dir / "disagreements.tsv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"expected mission value under the exact rule: {float(table.expected_mission_value):.4f}")
    print(f"states where the exact rule departs from the feedback threshold rule: {len(rows)}")
    print(f"wrote {out_dir / 'dp_table.tsv'} and {out_dir / 'disagreements.tsv'}")
    return 0


def _cmd_evaluate(args: argparse.Namespace) -> int:
    cfg = _load_config(args.config)
    policy = _resolve_policy(args.policy, cfg, args.treatment)
    result = evaluate_policy_exact(policy, cfg)
    print(f"policy: {args.policy}")
    print(f"exact expected value: {float(result.expected_value):.6f} Taler")
    print(f"survival probability: {float(result.survival_probability):.6f}")
    print(f"expected rounds per started junction: {float(result.expected_rounds_per_junction):.6f}")
    if args.verbose:
        for idx, profile in enumerate(result.per_junction, start=1):
            print(
                f"  junction {idx}: E[info]={float(profile.expected_info):.4f}"
                f" survive={float(profile.survival):.6f}"
                f" E[flights]={float(profile.expected_flights):.4f}"
            )
    return 0


def _cmd_simulate(args: argparse.Namespace) -> int:
    cfg = _load_config(args.config)
    policy = _resolve_policy(args.policy, cfg, args.treatment)
    stats = simulate_missions(policy, cfg, seed=args.seed, n_missions=args.n)
    print(f"policy: {args.policy}  missions: {stats.n_missions}  seed: {args.seed}")
    print(f"mean value: {stats.mean_value:.4f}  (sd {stats.std_value:.4f}, se {stats.std_error:.4f})")
    print(f"crash rate: {stats.crash_rate:.6f}")
    print(f"mean rounds per junction: {stats.mean_rounds_per_junction:.4f}")
    if args.format == "tabular":
        dist = ",".join(f"{k}:{v}" for k, v in sorted(stats.info_distribution.items()))
        print(f"info distribution: {dist}")
    return 0


def _cmd_synth(args: argparse.Namespace) -> int:
    spec = PopulationSpec.load(args.spec)
    if args.seed is not None:
        spec = PopulationSpec(groups=spec.groups, master_seed=args.seed, config=spec.config)
    from .agents import generate_sessions

    sessions = generate_sessions(spec)
    write_sessions(args.out, sessions)
    print(f"wrote {len(sessions)} sessions to {args.out}")
    return 0


def _cmd_analyze(args: argparse.Namespace) -> int:
    sessions = read_sessions(args.infile)
    report = summarize(sessions, count_all_plans=args.count_all_plans)
    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "report.txt").write_text(render_text(report), encoding="utf-8")
        paths = write_tabular(report, out_dir)
        print(f"wrote {out_dir / 'report.txt'} and {len(paths)} tabular files")
    if args.format == "text" or not args.out:
        print(render_text(report))
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    cfg = _load_config(args.config)
    service = ExperimentService(
        cfg=cfg, data_dir=Path(args.data_dir), service_seed=args.seed
    )
    ui_dir = Path(args.ui_dir) if args.ui_dir else None
    serve_forever(service, host=args.host, port=args.port, ui_dir=ui_dir)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dronelab",
        description="Drone-surveillance stopping game: solve, evaluate, simulate, synthesize, analyze, serve.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="solve the exact stopping rule and export the tables")
    solve.add_argument("--config", help="mission config JSON file")
    solve.add_argument("--out", default="dp_out", help="output directory")
    solve.set_defaults(func=_cmd_solve)

    evaluate = sub.add_parser("evaluate", help="exact expected value of a policy")
    evaluate.add_argument("--policy", required=True, help=f"one of: {POLICY_CHOICES}")
    evaluate.add_argument("--config", help="mission config JSON file")
    evaluate.add_argument("--treatment", choices=("closed", "open"), help="treatment for agent policies")
    evaluate.add_argument("--verbose", action="store_true", help="per-junction detail")
    evaluate.set_defaults(func=_cmd_evaluate)

    simulate = sub.add_parser("simulate", help="Monte Carlo simulation of a policy")
    simulate.add_argument("--policy", required=True, help=f"one of: {POLICY_CHOICES}")
    simulate.add_argument("--config", help="mission config JSON file")
    simulate.add_argument("--treatment", choices=("closed", "open"), help="treatment for agent policies")
    simulate.add_argument("--seed", type=int, default=0)
    simulate.add_argument("--n", type=int, default=100_000, help="number of missions")
    simulate.add_argument("--format", choices=("text", "tabular"), default="text")
    simulate.set_defaults(func=_cmd_simulate)

    synth = sub.add_parser("synth", help="generate synthetic sessions from a population spec")
    synth.add_argument("--spec", required=True, help="population spec JSON file")
    synth.add_argument("--out", required=True, help="output sessions JSONL path")
    synth.add_argument("--seed", type=int, help="override the spec's master seed")
    synth.set_defaults(func=_cmd_synth)

    analyze = sub.add_parser("analyze", help="analyze session logs into the report tables")
    analyze.add_argument("--in", dest="infile", required=True, help="sessions JSONL path")
    analyze.add_argument("--out", help="output directory for report files")
    analyze.add_argument("--format", choices=("text", "tabular"), default="text")
    analyze.add_argument(
        "--count-all-plans",
        action="store_true",
        help="open loop: count all planned junctions instead of the played ones",
    )
    analyze.set_defaults(func=_cmd_analyze)

    serve = sub.add_parser("serve", help="run the experiment service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8321)
    serve.add_argument("--data-dir", default="experiment_data")
    serve.add_argument("--seed", type=int, help="service seed (sessions derive from it)")
    serve.add_argument("--config", help="mission config JSON file")
    serve.add_argument("--ui-dir", help="static directory with the participant UI")
    serve.set_defaults(func=_cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DroneLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
