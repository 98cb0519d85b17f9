"""The decision-problem layer: episode lifecycle, actions, observations, rewards.

A :class:`CropEnv` wraps one field simulation behind the usual interaction
loop: ``reset`` starts an episode about a month before planting, each ``step``
consumes the day's action, simulates exactly one day and returns the filtered
observation, the reward, the done flag and an info map with diagnostics that
are deliberately kept out of the observation (the agent sees a projection of
the state, not the state).

Reward conventions follow the task definitions: the fertilization return is
the day's plant nitrogen uptake minus a penalty times the fertilizer applied
by the agent; the irrigation return is the day's above-ground biomass change
minus a penalty times the irrigated water; the mixed task returns both as a
two-component vector, unscalarized. Background schedules (the fixed
fertilizations of the irrigation task, the single pre-planting irrigation of
the fertilization task) are merged into the simulated amounts but never
penalize the agent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .config import CATALOGUE, TaskConfig
from .errors import ActionError, ProtocolError
from .seeding import derive_seed, make_rng
from .soilcrop import (
    CropState,
    DailyFluxes,
    SoilState,
    advance_day,
    auto_plant_check,
    check_terminal,
    init_field,
    plant,
)
from .weather import WeatherDay, generate_day, init_weather

MAX_DAYS = "max_days"

Observation = dict[str, object]
Reward = float | tuple[float, float]


def reward_fertilization(trnu_day: float, anfer: float, penalty: float = 0.5) -> float:
    """Day's plant nitrogen uptake minus the penalized fertilizer amount."""
    return trnu_day - penalty * anfer


def reward_irrigation(delta_topwt: float, amir: float, penalty: float = 15.0) -> float:
    """Day's above-ground biomass change minus the penalized irrigation amount."""
    return delta_topwt - penalty * amir


def reward_mixed(fluxes: DailyFluxes, action: "Action",
                 config: TaskConfig) -> tuple[float, float]:
    """Two-component reward: (fertilization component, irrigation component)."""
    return (
        reward_fertilization(fluxes.trnu, action.anfer, config.fert_penalty),
        reward_irrigation(fluxes.delta_topwt, action.amir, config.irr_penalty),
    )


@dataclass(frozen=True)
class Action:
    """Validated daily action; absent components are zero (do nothing)."""

    anfer: float = 0.0   # kg N/ha
    amir: float = 0.0    # L/m2


@dataclass(frozen=True)
class StepResult:
    observation: Observation
    reward: Reward
    done: bool
    info: dict[str, object]


def validate_action(config: TaskConfig, raw: dict[str, object] | None) -> Action:
    """Check a raw action map against the task; reject rather than clamp.

    Missing components default to 0 (the always-available do-nothing action).
    Unknown keys, components the task does not allow, non-finite values and
    out-of-range values are all rejected.
    """
    raw = raw or {}
    allowed = {}
    if config.allows_fertilization:
        allowed["anfer"] = (0.0, config.anfer_max)
    if config.allows_irrigation:
        allowed["amir"] = (0.0, config.amir_max)

    values = {"anfer": 0.0, "amir": 0.0}
    for key, value in raw.items():
        if key not in ("anfer", "amir"):
            raise ActionError(f"unknown action component {key!r}", name=key)
        if key not in allowed:
            raise ActionError(
                f"action component {key!r} is not part of the {config.task} task",
                name=key,
            )
        try:
            x = float(value)  # type: ignore[arg-type]
        except (TypeError, ValueError):
            raise ActionError(f"action component {key!r} must be a number", name=key) from None
        if not math.isfinite(x):
            raise ActionError(f"action component {key!r} must be finite", name=key)
        low, high = allowed[key]
        if not low <= x <= high:
            raise ActionError(
                f"action component {key!r}={x} outside [{low}, {high}]",
                name=key, low=low, high=high,
            )
        values[key] = x
    return Action(anfer=values["anfer"], amir=values["amir"])


def action_space(config: TaskConfig) -> dict[str, dict[str, float]]:
    """Bounded-scalar descriptors of the task's action components."""
    space: dict[str, dict[str, float]] = {}
    if config.allows_fertilization:
        space["anfer"] = {"low": 0.0, "high": config.anfer_max}
    if config.allows_irrigation:
        space["amir"] = {"low": 0.0, "high": config.amir_max}
    return space


def observation_space(config: TaskConfig) -> list[dict[str, object]]:
    """Name/kind/shape/range descriptors of the configured observation list."""
    n_layers = len(config.model.layer_dz)
    space = []
    for name in config.observations:
        spec = CATALOGUE[name]
        space.append({
            "name": name,
            "kind": spec.kind,
            "shape": [n_layers] if spec.per_layer else [],
            "low": spec.low,
            "high": spec.high,
        })
    return space


class CropEnv:
    """One field, one decision problem, driven through reset/step."""

    def __init__(self, config: TaskConfig):
        config.validate()
        self.config = config
        self.action_space = action_space(config)
        self.observation_space = observation_space(config)
        self._background_fert = dict(config.background_fert)
        self._background_irr = dict(config.background_irr)
        self._episode_index = 0
        self._episode_open = False
        self._has_reset = False
        self.soil: SoilState | None = None
        self.crop: CropState | None = None

    def seed_base(self, seed: int) -> None:
        """Rebase both stochastic streams on one seed (protocol init path)."""
        self.config = replace(self.config, weather_seed=int(seed), soil_seed=int(seed))

    def reset(self, seed: int | None = None) -> Observation:
        """Start a new episode at simulation day 0 and return its observation.

        With ``seed`` the episode is fully pinned by it; without, the episode
        draws the next seeds from the configured base seeds, advancing a
        deterministic per-instance stream.
        """
        if seed is None:
            wseed = derive_seed(self.config.weather_seed, self._episode_index, 0)
            sseed = derive_seed(self.config.soil_seed, self._episode_index, 1)
            nseed = derive_seed(self.config.soil_seed, self._episode_index, 2)
        else:
            wseed = derive_seed(seed, 0)
            sseed = derive_seed(seed, 1)
            nseed = derive_seed(seed, 2)
        self._episode_index += 1

        self._weather_state = init_weather(self.config.weather, wseed)
        self.soil, self.crop = init_field(self.config.model, make_rng(sseed))
        self._noise_rng = make_rng(nseed) if self.config.obs_noise else None
        self.day = 0
        self.cumsumfert = 0.0
        self.totir = 0.0
        self._recent_weather: list[WeatherDay] = []
        self._last_weather: WeatherDay | None = None
        self._last_fluxes = DailyFluxes()
        self._episode_open = True
        self._has_reset = True
        return self.observe()

    def step(self, raw_action: dict[str, object] | None = None) -> StepResult:
        """Simulate one day under the given action map."""
        if not self._has_reset:
            raise ProtocolError("step before reset")
        if not self._episode_open:
            raise ProtocolError("step after episode end; reset first")
        config = self.config
        action = validate_action(config, raw_action)

        # Background schedules merge with the agent's action but are the
        # task's fixed management, not the agent's cost.
        anfer = action.anfer
        amir = action.amir
        if self.crop.planted:
            anfer += self._background_fert.get(self.crop.dap, 0.0)
        amir += self._background_irr.get(self.day, 0.0)

        if not self.crop.planted:
            if config.plant_mode == "auto":
                if auto_plant_check(self.soil, self._recent_weather, self.day, config.model):
                    plant(self.crop, config.model)
            elif self.day == config.plant_day:
                plant(self.crop, config.model)

        weather = generate_day(config.weather, self._weather_state)
        self._recent_weather.append(weather)
        if len(self._recent_weather) > 5:
            self._recent_weather.pop(0)
        self._last_weather = weather

        fluxes = advance_day(self.soil, self.crop, weather, anfer, amir, config.model)
        self._last_fluxes = fluxes
        self.cumsumfert += anfer
        self.totir += amir
        self.day += 1

        cause = check_terminal(self.crop, self.soil, self.day, config.model)
        if cause is None and self.day >= config.max_episode_days:
            cause = MAX_DAYS
        done = cause is not None

        reward: Reward
        if config.task == "fertilization":
            reward = reward_fertilization(fluxes.trnu, action.anfer, config.fert_penalty)
        elif config.task == "irrigation":
            reward = reward_irrigation(fluxes.delta_topwt, action.amir, config.irr_penalty)
        else:
            reward = reward_mixed(fluxes, action, config)

        info: dict[str, object] = {
            "day": self.day,
            "dap": self.crop.dap,
            "anfer": anfer,
            "amir": amir,
            "agent_anfer": action.anfer,
            "agent_amir": action.amir,
            "rain": weather.rain,
            "trnu": fluxes.trnu,
            "delta_topwt": fluxes.delta_topwt,
            "ep": fluxes.ep,
            "es": fluxes.es,
            "runoff_day": fluxes.runoff,
            "drainage": fluxes.drainage,
            "mineralization": fluxes.mineralization,
            "leach": fluxes.leach,
            "cleach": self.soil.cleach,
            "runoff": self.soil.runoff_total,
            "cumsumfert": self.cumsumfert,
            "totir": self.totir,
            "topwt": self.crop.topwt,
            "grnwt": self.crop.grnwt,
            "pcngrn": self.crop.pcngrn,
        }
        if done:
            info["terminal_cause"] = cause
            self._episode_open = False

        return StepResult(self.observe(), reward, done, info)

    def observe(self) -> Observation:
        """Project the field state onto the configured observation list."""
        if not self._has_reset:
            raise ProtocolError("observe before reset")
        weather = self._last_weather
        fluxes = self._last_fluxes
        crop = self.crop
        values: dict[str, object] = {
            "istage": crop.istage,
            "vstage": crop.vstage,
            "topwt": crop.topwt,
            "grnwt": crop.grnwt,
            "swfac": crop.swfac,
            "nstres": crop.nstres,
            "xlai": crop.xlai,
            "dtt": crop.dtt,
            "dap": crop.dap,
            "cumsumfert": self.cumsumfert,
            "rain": weather.rain if weather else 0.0,
            "ep": fluxes.ep,
            "es": fluxes.es,
            "tmax": weather.tmax if weather else 0.0,
            "tmin": weather.tmin if weather else 0.0,
            "srad": weather.srad if weather else 0.0,
            "sw": list(self.soil.sw),
            "wtdep": self.soil.wtdep,
            "rtdep": crop.rtdep,
            "totir": self.totir,
            "pcngrn": crop.pcngrn,
        }
        obs: Observation = {name: values[name] for name in self.config.observations}
        if self._noise_rng is not None:
            for name, sigma in self.config.obs_noise:
                if name not in obs or sigma == 0.0:
                    continue
                if isinstance(obs[name], list):
                    obs[name] = [v + sigma * float(self._noise_rng.standard_normal())
                                 for v in obs[name]]
                else:
                    obs[name] = float(obs[name]) + sigma * float(self._noise_rng.standard_normal())
        return obs

    @property
    def episode_open(self) -> bool:
        return self._episode_open


def make_env(config: TaskConfig) -> CropEnv:
    """Construct an environment (not yet reset) for a validated config."""
    return CropEnv(config)
