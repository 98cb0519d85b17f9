"""Stage-threshold calibration.

Thermal-time accumulation after planting depends only on weather and the
planting day, not on the thresholds themselves. That makes the calibration a
direct inversion: simulate many seasons, record mean cumulative growing degree
days at each target day-of-simulation, and adopt those means as the stage
thresholds. With the resulting thresholds, the mean day each stage is reached
lands on its target by construction.

Targets are the default-scenario stage timings (fertilization problem):
germination near day 22 through maturity near day 155.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass, replace

from .config import TaskConfig, default_config
from .tasks import CropEnv

# stage code -> target mean day-of-simulation at which the stage is reached
STAGE_DAY_TARGETS: dict[int, int] = {
    8: 22,
    9: 23,
    1: 34,
    2: 60,
    3: 65,
    4: 107,
    5: 117,
    6: 155,
}


@dataclass(frozen=True)
class CalibrationResult:
    thresholds: tuple[float, ...]            # stage_gdd order: 8, 9, 1, 2, 3, 4, 5, 6
    per_stage: dict[int, tuple[float, float]]  # stage -> (mean, std) cumulative GDD
    mean_planting_day: float
    episodes: int

    def as_yaml_lines(self) -> str:
        values = ", ".join(f"{t:.1f}" for t in self.thresholds)
        return f"stage_gdd: [{values}]\n"


def run_stage_calibration(config: TaskConfig | None = None, *, episodes: int = 500,
                          seed: int = 777, horizon: int = 190) -> CalibrationResult:
    """Derive stage thresholds from the configured weather and planting rule.

    Episodes run with no actions and with termination disabled (huge
    thresholds, failure rules off) so every season is observed to the horizon.
    """
    if config is None:
        config = default_config("fertilization")
    base = max(STAGE_DAY_TARGETS.values()) * 50.0
    neutral_model = replace(
        config.model,
        stage_gdd=tuple(base + 100.0 * i for i in range(8)),
        failure_stress_days=10 ** 9,
        emergence_deadline=10 ** 9,
    )
    run_config = replace(config, model=neutral_model, max_episode_days=horizon)

    env = CropEnv(run_config)
    gdd_at_day: dict[int, list[float]] = {d: [] for d in STAGE_DAY_TARGETS.values()}
    planting_days: list[float] = []
    for i in range(episodes):
        env.reset(seed=seed + i)
        planted_on = None
        while True:
            result = env.step({})
            if planted_on is None and env.crop.planted:
                planted_on = env.day - 1
            if env.day in gdd_at_day:
                gdd_at_day[env.day].append(env.crop.cumgdd)
            if result.done:
                break
        planting_days.append(float(planted_on if planted_on is not None else -1))

    per_stage: dict[int, tuple[float, float]] = {}
    thresholds: list[float] = []
    for stage, day in STAGE_DAY_TARGETS.items():
        samples = gdd_at_day[day]
        mean = statistics.mean(samples)
        std = statistics.pstdev(samples)
        per_stage[stage] = (mean, std)
        thresholds.append(mean)
    return CalibrationResult(
        thresholds=tuple(thresholds),
        per_stage=per_stage,
        mean_planting_day=statistics.mean(planting_days),
        episodes=episodes,
    )
