"""Policy evaluation: batch episode runner, agronomic metrics, CSV emitters.

A batch runs n episodes with per-episode seeds derived from one batch seed, so
identical (config, policy, n, seed) calls reproduce identical logs, and two
policies evaluated with the same batch seed see the same weather and initial
conditions episode for episode. That pairing is what the efficiency metrics
lean on: nitrogen use efficiency and water use efficiency divide the yield
gain over the never-apply control by the amount applied.

Everything emitted is deterministic: CSV bytes depend only on the logs.
"""

from __future__ import annotations

import csv
import statistics
import threading
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

from .config import TaskConfig
from .seeding import derive_seed
from .server import EnvServer
from .tasks import CropEnv, Reward, StepResult

FLUX_KEYS = ("trnu", "delta_topwt", "ep", "es", "runoff_day", "drainage",
             "mineralization", "leach")
CUMULATIVE_KEYS = ("cumsumfert", "totir", "cleach", "runoff")

# Indicator sets reported per task, in output order.
FERT_INDICATORS = ("grnwt", "pcngrn", "cumsumfert", "fert_applications", "cleach")
IRR_INDICATORS = ("grnwt", "totir", "irr_applications", "runoff", "cleach")
MIXED_INDICATORS = ("grnwt", "pcngrn", "cumsumfert", "fert_applications",
                    "totir", "irr_applications", "runoff", "cleach")
TASK_INDICATORS = {
    "fertilization": FERT_INDICATORS,
    "irrigation": IRR_INDICATORS,
    "mixed": MIXED_INDICATORS,
}


@dataclass
class DayRecord:
    """One logged day: applied amounts, agent action, reward, state snapshot."""

    day: int
    dap: int
    anfer: float            # applied, including background schedules
    amir: float
    agent_anfer: float      # the agent's own (penalized) components
    agent_amir: float
    reward: Reward
    observation: dict
    fluxes: dict


@dataclass
class EpisodeLog:
    episode: int
    seed: int | None
    task: str
    days: list[DayRecord] = field(default_factory=list)
    terminal_cause: str = ""
    final: dict[str, float] = field(default_factory=dict)

    @property
    def length(self) -> int:
        return len(self.days)

    def rewards(self) -> list[Reward]:
        return [d.reward for d in self.days]


def objective_total(log: EpisodeLog) -> Reward:
    """Undiscounted sum of the episode's rewards (componentwise for mixed)."""
    rewards = log.rewards()
    if not rewards:
        return 0.0
    if isinstance(rewards[0], (tuple, list)):
        fert = sum(r[0] for r in rewards)
        irr = sum(r[1] for r in rewards)
        return (fert, irr)
    return sum(rewards)


def _record_from_step(result: StepResult) -> DayRecord:
    info = result.info
    return DayRecord(
        day=int(info["day"]),
        dap=int(info["dap"]),
        anfer=float(info["anfer"]),
        amir=float(info["amir"]),
        agent_anfer=float(info["agent_anfer"]),
        agent_amir=float(info["agent_amir"]),
        reward=result.reward,
        observation=dict(result.observation),
        fluxes={key: float(info[key]) for key in FLUX_KEYS + CUMULATIVE_KEYS},
    )


def _finalize(log: EpisodeLog, last: StepResult) -> None:
    info = last.info
    log.terminal_cause = str(info.get("terminal_cause", ""))
    log.final = {
        "grnwt": float(info["grnwt"]),
        "topwt": float(info["topwt"]),
        "pcngrn": float(info["pcngrn"]),
        "cumsumfert": float(info["cumsumfert"]),
        "totir": float(info["totir"]),
        "cleach": float(info["cleach"]),
        "runoff": float(info["runoff"]),
        "fert_applications": float(sum(1 for d in log.days if d.anfer > 0.0)),
        "irr_applications": float(sum(1 for d in log.days if d.amir > 0.0)),
        "length": float(info["day"]),
    }


def run_episodes(config: TaskConfig, policy: Callable[[Mapping], dict],
                 n: int, seed: int) -> list[EpisodeLog]:
    """Run ``n`` seeded episodes of ``policy`` and return complete logs."""
    if n < 1:
        raise ValueError("episode count must be >= 1")
    env = CropEnv(config)
    logs: list[EpisodeLog] = []
    for i in range(n):
        episode_seed = derive_seed(seed, i)
        observation = env.reset(seed=episode_seed)
        log = EpisodeLog(episode=i, seed=episode_seed, task=config.task)
        while True:
            result = env.step(policy(observation))
            observation = result.observation
            log.days.append(_record_from_step(result))
            if result.done:
                _finalize(log, result)
                break
        logs.append(log)
    return logs


class _EpisodeCollector:
    """Observer that rebuilds EpisodeLogs from server-side session events."""

    def __init__(self, task: str, target: int):
        self.task = task
        self.target = target
        self.logs: list[EpisodeLog] = []
        self._current: EpisodeLog | None = None
        self.complete = threading.Event()

    def __call__(self, event: str, data) -> None:
        if event == "reset":
            self._current = EpisodeLog(episode=len(self.logs), seed=None, task=self.task)
        elif event == "step" and self._current is not None:
            self._current.days.append(_record_from_step(data))
            if data.done:
                _finalize(self._current, data)
                self.logs.append(self._current)
                self._current = None
                if len(self.logs) >= self.target:
                    self.complete.set()


def run_remote_episodes(config: TaskConfig, n: int, seed: int, endpoint: str,
                        timeout: float = 600.0) -> list[EpisodeLog]:
    """Serve ``n`` episodes to one external agent and log them server-side.

    The agent connects to ``endpoint`` with the wire protocol and drives
    reset/step as usual; reset seeds are forced server-side to the same
    per-episode derivation :func:`run_episodes` uses, so a remote policy is
    evaluated under exactly the batch conditions of the built-ins.
    """
    collector = _EpisodeCollector(config.task, n)
    server = EnvServer(
        endpoint,
        config,
        fixed_config=True,
        seed_provider=lambda i: derive_seed(seed, i),
        observer=collector,
        episode_budget=n,
    ).start()
    try:
        if not collector.complete.wait(timeout):
            raise TimeoutError(
                f"remote agent completed {len(collector.logs)}/{n} episodes "
                f"within {timeout:.0f}s"
            )
        # Let the agent observe the exhausted budget and close on its own
        # before tearing the transport down.
        server.wait_for_sessions(timeout=5.0)
    finally:
        server.stop()
    return collector.logs


@dataclass(frozen=True)
class MetricsSummary:
    """Per-indicator mean and population standard deviation over a batch."""

    task: str
    episodes: int
    indicators: dict[str, tuple[float, float]]

    def mean(self, name: str) -> float:
        return self.indicators[name][0]

    def std(self, name: str) -> float:
        return self.indicators[name][1]


def summarize(logs: Sequence[EpisodeLog]) -> MetricsSummary:
    """Aggregate the task's performance indicators over episode logs."""
    if not logs:
        raise ValueError("cannot summarize an empty batch")
    task = logs[0].task
    indicators: dict[str, tuple[float, float]] = {}
    for name in TASK_INDICATORS[task]:
        values = [log.final[name] for log in logs]
        indicators[name] = (statistics.mean(values), statistics.pstdev(values))
    lengths = [log.final["length"] for log in logs]
    indicators["length"] = (statistics.mean(lengths), statistics.pstdev(lengths))
    return MetricsSummary(task=task, episodes=len(logs), indicators=indicators)


@dataclass(frozen=True)
class EfficiencyResult:
    """Yield-gain-per-unit-input metric against the null-policy reference.

    ``per_episode`` divides each episode's yield gain over the mean null yield
    by that episode's applied amount; ``paired`` pairs episodes index-by-index
    with the null batch instead of using the mean (both are reported).
    Entries are None where the policy applied nothing.
    """

    name: str
    reference_yield: float
    per_episode: tuple[float | None, ...]
    paired: tuple[float | None, ...]
    mean: float | None
    std: float | None
    ratio_of_means: float | None


def _efficiency(name: str, logs_pi: Sequence[EpisodeLog],
                logs_null: Sequence[EpisodeLog], amount_key: str,
                factor: float) -> EfficiencyResult:
    if not logs_pi:
        raise ValueError("efficiency metrics need a non-empty policy batch")
    if not logs_null:
        raise ValueError("efficiency metrics need a non-empty null reference batch")
    reference = statistics.mean(log.final["grnwt"] for log in logs_null)

    per_episode: list[float | None] = []
    paired: list[float | None] = []
    for i, log in enumerate(logs_pi):
        amount = log.final[amount_key]
        if amount > 0.0:
            per_episode.append(factor * (log.final["grnwt"] - reference) / amount)
            if i < len(logs_null):
                paired.append(factor * (log.final["grnwt"] - logs_null[i].final["grnwt"])
                              / amount)
            else:
                paired.append(None)
        else:
            per_episode.append(None)
            paired.append(None)

    valid = [v for v in per_episode if v is not None]
    mean = statistics.mean(valid) if valid else None
    std = statistics.pstdev(valid) if valid else None
    mean_amount = statistics.mean(log.final[amount_key] for log in logs_pi)
    ratio = None
    if mean_amount > 0.0:
        mean_yield = statistics.mean(log.final["grnwt"] for log in logs_pi)
        ratio = factor * (mean_yield - reference) / mean_amount
    return EfficiencyResult(
        name=name,
        reference_yield=reference,
        per_episode=tuple(per_episode),
        paired=tuple(paired),
        mean=mean,
        std=std,
        ratio_of_means=ratio,
    )


def ane_value(grnwt_pi: float, grnwt_null: float, cumsumfert: float) -> float:
    """Nitrogen use efficiency from batch means: yield gain per kg fertilizer."""
    return (grnwt_pi - grnwt_null) / cumsumfert


def wue_value(grnwt_pi: float, grnwt_null: float, totir: float,
              factor: float = 10.0) -> float:
    """Water use efficiency from batch means: yield gain per unit irrigation.

    The conventional definition carries a factor of 10 (kg/ha per mm into
    kg/m3); factor 1 matches reports that omit it. Both are supported.
    """
    return factor * (grnwt_pi - grnwt_null) / totir


def compute_ane(logs_pi: Sequence[EpisodeLog],
                logs_null: Sequence[EpisodeLog]) -> EfficiencyResult:
    """Nitrogen use efficiency of a batch against its null reference."""
    return _efficiency("ane", logs_pi, logs_null, "cumsumfert", 1.0)


def compute_wue(logs_pi: Sequence[EpisodeLog], logs_null: Sequence[EpisodeLog],
                factor: float = 10.0) -> EfficiencyResult:
    """Water use efficiency of a batch against its null reference."""
    return _efficiency("wue", logs_pi, logs_null, "totir", factor)


# -- CSV output --------------------------------------------------------------


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _observation_columns(logs: Sequence[EpisodeLog]) -> list[str]:
    first = logs[0].days[0].observation if logs and logs[0].days else {}
    columns = []
    for key, value in first.items():
        if isinstance(value, list):
            columns.extend(f"{key}_{i + 1}" for i in range(len(value)))
        else:
            columns.append(key)
    return columns


def _observation_values(observation: dict) -> list:
    values = []
    for value in observation.values():
        if isinstance(value, list):
            values.extend(value)
        else:
            values.append(value)
    return values


def write_trajectories_csv(logs: Sequence[EpisodeLog], path: str) -> None:
    """One row per simulated day across the batch."""
    mixed = bool(logs) and logs[0].task == "mixed"
    reward_cols = ["reward_fertilization", "reward_irrigation"] if mixed else ["reward"]
    header = (["episode", "day", "dap", "anfer", "amir", "agent_anfer", "agent_amir"]
              + reward_cols + list(FLUX_KEYS + CUMULATIVE_KEYS)
              + _observation_columns(logs))
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for log in logs:
            for day in log.days:
                reward = list(day.reward) if mixed else [day.reward]
                row = ([log.episode, day.day, day.dap, day.anfer, day.amir,
                        day.agent_anfer, day.agent_amir]
                       + reward
                       + [day.fluxes[k] for k in FLUX_KEYS + CUMULATIVE_KEYS]
                       + _observation_values(day.observation))
                writer.writerow([_fmt(v) for v in row])


def write_summary_csv(summary: MetricsSummary, path: str,
                      efficiencies: Sequence[EfficiencyResult] = ()) -> None:
    """One row per indicator: name, mean, std; n.a. marks undefined metrics."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["indicator", "mean", "std"])
        writer.writerow(["episodes", summary.episodes, 0])
        for name, (mean, std) in summary.indicators.items():
            writer.writerow([name, _fmt(mean), _fmt(std)])
        for eff in efficiencies:
            if eff.mean is None:
                writer.writerow([eff.name, "n.a.", "n.a."])
            else:
                writer.writerow([eff.name, _fmt(eff.mean), _fmt(eff.std)])
            if eff.ratio_of_means is not None:
                writer.writerow([f"{eff.name}_ratio_of_means", _fmt(eff.ratio_of_means), ""])


def write_applications_csv(logs: Sequence[EpisodeLog], path: str, *,
                           day_bin: float = 5.0, amount_bin: float = 5.0) -> None:
    """2D histogram of applications: day-of-simulation bin x amount bin x count."""
    resources = {
        "fertilization": ("anfer",),
        "irrigation": ("amir",),
        "mixed": ("anfer", "amir"),
    }[logs[0].task] if logs else ()
    counts: dict[tuple[str, int, int], int] = {}
    for log in logs:
        for day in log.days:
            for resource in resources:
                amount = getattr(day, resource)
                if amount > 0.0:
                    key = (resource, int(day.day // day_bin), int(amount // amount_bin))
                    counts[key] = counts.get(key, 0) + 1
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["resource", "day_bin_start", "amount_bin_start", "count"])
        for (resource, day_idx, amount_idx), count in sorted(counts.items()):
            writer.writerow([resource, _fmt(day_idx * day_bin),
                             _fmt(amount_idx * amount_bin), count])
