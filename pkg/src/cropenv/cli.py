"""Command-line interface.

Subcommands:
  serve      run the environment service on a socket endpoint
  run        evaluate a policy (built-in or remote) over a batch of episodes
  weather    export a generated weather series as CSV
  calibrate  derive stage thresholds for the configured weather profile
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import evaluate, server
from .calibrate import run_stage_calibration
from .config import default_weather_params, load_config, weather_params_from_dict
from .errors import CropEnvError
from .policies import get_policy
from .weather import generate_series, write_weather_csv


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cropenv",
        description="Crop-management RL environment: server, evaluation, tools.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_serve = sub.add_parser("serve", help="serve environments over a socket")
    p_serve.add_argument("--endpoint", default=None,
                         help="host:port or unix:/path (default "
                              f"${server.ENDPOINT_ENV_VAR} or {server.DEFAULT_ENDPOINT})")
    p_serve.add_argument("--config", default=None, help="environment config file")
    p_serve.add_argument("--task", default=None,
                         choices=("fertilization", "irrigation", "mixed"))
    p_serve.add_argument("--log", default=None, help="JSON-lines session log file")

    p_run = sub.add_parser("run", help="run a policy evaluation batch")
    p_run.add_argument("--task", required=True,
                       choices=("fertilization", "irrigation", "mixed"))
    p_run.add_argument("--policy", required=True, choices=("null", "expert", "remote"))
    p_run.add_argument("--episodes", type=int, default=100)
    p_run.add_argument("--seed", type=int, default=0)
    p_run.add_argument("--out", required=True, help="output directory for the CSVs")
    p_run.add_argument("--config", default=None, help="environment config file")
    p_run.add_argument("--endpoint", default=None,
                       help="bind address for --policy remote")
    p_run.add_argument("--wue-factor", type=float, default=10.0,
                       help="water-use-efficiency factor (10 conventional, 1 plain ratio)")

    p_weather = sub.add_parser("weather", help="export a generated weather series")
    p_weather.add_argument("--days", type=int, required=True)
    p_weather.add_argument("--seed", type=int, required=True)
    p_weather.add_argument("--out", required=True, help="output CSV file")
    p_weather.add_argument("--params", default=None, help="weather parameter file")

    p_cal = sub.add_parser("calibrate", help="calibrate stage thresholds")
    p_cal.add_argument("--episodes", type=int, default=500)
    p_cal.add_argument("--seed", type=int, default=777)
    p_cal.add_argument("--config", default=None, help="environment config file")
    p_cal.add_argument("--out", default=None, help="write the thresholds as YAML")

    return parser


def _cmd_serve(args) -> int:
    server.serve(endpoint=args.endpoint, config_path=args.config,
                 log_path=args.log, task=args.task)
    return 0


def _cmd_run(args) -> int:
    config = load_config(args.config, task=args.task)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    if args.policy == "remote":
        endpoint = args.endpoint or os.environ.get(
            server.ENDPOINT_ENV_VAR, server.DEFAULT_ENDPOINT)
        print(f"waiting for a remote agent on {endpoint} "
              f"({args.episodes} episodes)...")
        logs = evaluate.run_remote_episodes(config, args.episodes, args.seed, endpoint)
    else:
        policy = get_policy(args.policy, args.task)
        logs = evaluate.run_episodes(config, policy, args.episodes, args.seed)

    if args.policy == "null":
        null_logs = logs
    else:
        null_logs = evaluate.run_episodes(
            config, get_policy("null", args.task), args.episodes, args.seed)

    efficiencies = []
    if config.allows_fertilization:
        efficiencies.append(evaluate.compute_ane(logs, null_logs))
    if config.allows_irrigation:
        efficiencies.append(evaluate.compute_wue(logs, null_logs, factor=args.wue_factor))

    summary = evaluate.summarize(logs)
    evaluate.write_trajectories_csv(logs, str(out_dir / "trajectories.csv"))
    evaluate.write_summary_csv(summary, str(out_dir / "summary.csv"), efficiencies)
    evaluate.write_applications_csv(logs, str(out_dir / "applications.csv"))

    print(f"{len(logs)} episodes -> {out_dir}")
    for name, (mean, std) in summary.indicators.items():
        print(f"  {name}: {mean:.3f} ({std:.3f})")
    for eff in efficiencies:
        shown = "n.a." if eff.mean is None else f"{eff.mean:.3f} ({eff.std:.3f})"
        print(f"  {eff.name}: {shown}")
    return 0


def _cmd_weather(args) -> int:
    if args.params:
        import yaml

        raw = yaml.safe_load(Path(args.params).read_text(encoding="utf-8"))
        params = weather_params_from_dict(raw)
    else:
        params = default_weather_params()
    days = generate_series(params, seed=args.seed, n_days=args.days)
    write_weather_csv(days, args.out)
    print(f"{args.days} days -> {args.out}")
    return 0


def _cmd_calibrate(args) -> int:
    config = load_config(args.config) if args.config else None
    result = run_stage_calibration(config, episodes=args.episodes, seed=args.seed)
    print(f"calibrated over {result.episodes} episodes "
          f"(mean planting day {result.mean_planting_day:.1f})")
    for stage, (mean, std) in result.per_stage.items():
        print(f"  stage {stage}: cumulative GDD {mean:.1f} (std {std:.1f})")
    print(result.as_yaml_lines(), end="")
    if args.out:
        Path(args.out).write_text(result.as_yaml_lines(), encoding="utf-8")
        print(f"thresholds written to {args.out}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "serve": _cmd_serve,
        "run": _cmd_run,
        "weather": _cmd_weather,
        "calibrate": _cmd_calibrate,
    }
    try:
        return handlers[args.command](args)
    except CropEnvError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, TimeoutError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
