"""Configuration surface: observation catalogue, task config, YAML loading.

The environment is configured by a YAML file with nested sections (task,
observations, rewards, actions, planting, background schedules, seeds) plus
references to a weather-parameter file and a model-parameter file. Anything
omitted falls back to the packaged defaults for the chosen task.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Mapping

import yaml

from .errors import ConfigError
from .policies import EXPERT_FERT_TABLE
from .soilcrop import ModelParams
from .weather import SeasonalCycle, WeatherParams

TASKS = ("fertilization", "irrigation", "mixed")


@dataclass(frozen=True)
class VarSpec:
    """Metadata for one observable state variable."""

    kind: str                     # "int" or "float"
    low: float | None = None
    high: float | None = None
    per_layer: bool = False      # True for per-soil-layer vectors


# Every state variable the observation layer can expose. Default observation
# lists are strict subsets; diagnostics like cleach stay internal on purpose.
CATALOGUE: dict[str, VarSpec] = {
    "istage": VarSpec("int", 0, 9),
    "vstage": VarSpec("float", 0.0, None),
    "topwt": VarSpec("float", 0.0, None),
    "grnwt": VarSpec("float", 0.0, None),
    "swfac": VarSpec("float", 0.0, 1.0),
    "nstres": VarSpec("float", 0.0, 1.0),
    "xlai": VarSpec("float", 0.0, None),
    "dtt": VarSpec("float", 0.0, None),
    "dap": VarSpec("int", 0, None),
    "cumsumfert": VarSpec("float", 0.0, None),
    "rain": VarSpec("float", 0.0, None),
    "ep": VarSpec("float", 0.0, None),
    "es": VarSpec("float", 0.0, None),
    "tmax": VarSpec("float", None, None),
    "tmin": VarSpec("float", None, None),
    "srad": VarSpec("float", 0.0, None),
    "sw": VarSpec("float", 0.0, 1.0, per_layer=True),
    "wtdep": VarSpec("float", 0.0, None),
    "rtdep": VarSpec("float", 0.0, None),
    "totir": VarSpec("float", 0.0, None),
    "pcngrn": VarSpec("float", 0.0, 1.0),
}

FERTILIZATION_OBS = (
    "istage", "vstage", "topwt", "grnwt", "swfac", "nstres",
    "xlai", "dtt", "dap", "cumsumfert", "rain", "ep",
)

IRRIGATION_OBS = (
    "istage", "vstage", "grnwt", "topwt", "xlai", "tmax", "srad",
    "dtt", "dap", "sw", "ep", "wtdep", "rtdep", "totir",
)

# Union of the two single-task spaces, fertilization order first.
MIXED_OBS = FERTILIZATION_OBS + tuple(
    name for name in IRRIGATION_OBS if name not in FERTILIZATION_OBS
)

DEFAULT_OBS = {
    "fertilization": FERTILIZATION_OBS,
    "irrigation": IRRIGATION_OBS,
    "mixed": MIXED_OBS,
}


@dataclass(frozen=True)
class TaskConfig:
    """Complete, validated description of one decision problem."""

    task: str
    observations: tuple[str, ...]
    fert_penalty: float = 0.5
    irr_penalty: float = 15.0
    anfer_max: float = 200.0
    amir_max: float = 50.0
    plant_mode: str = "auto"                  # "auto" or "fixed"
    plant_day: int = 30                       # simulation day, fixed mode only
    # Deterministic schedules applied regardless of agent actions.
    background_fert: tuple[tuple[int, float], ...] = ()   # keyed on dap
    background_irr: tuple[tuple[int, float], ...] = ()    # keyed on simulation day
    weather_seed: int = 20070
    soil_seed: int = 10021
    max_episode_days: int = 365
    obs_noise: tuple[tuple[str, float], ...] = ()          # (variable, sigma)
    weather: WeatherParams = field(default_factory=lambda: default_weather_params())
    model: ModelParams = field(default_factory=ModelParams)

    @property
    def allows_fertilization(self) -> bool:
        return self.task in ("fertilization", "mixed")

    @property
    def allows_irrigation(self) -> bool:
        return self.task in ("irrigation", "mixed")

    def validate(self) -> None:
        if self.task not in TASKS:
            raise ConfigError(f"task={self.task!r} not one of {TASKS}")
        for name in self.observations:
            if name not in CATALOGUE:
                raise ConfigError(
                    f"unknown observation variable {name!r}; valid names: "
                    f"{', '.join(sorted(CATALOGUE))}"
                )
        if self.fert_penalty < 0 or self.irr_penalty < 0:
            raise ConfigError("reward penalty factors must be >= 0")
        if self.anfer_max < 0 or self.amir_max < 0:
            raise ConfigError("action bounds must be >= 0")
        if self.plant_mode not in ("auto", "fixed"):
            raise ConfigError(f"plant_mode={self.plant_mode!r} must be 'auto' or 'fixed'")
        if self.max_episode_days < 1:
            raise ConfigError("max_episode_days must be >= 1")
        for name, sigma in self.obs_noise:
            if name not in CATALOGUE:
                raise ConfigError(f"observation_noise names unknown variable {name!r}")
            if sigma < 0:
                raise ConfigError(f"observation_noise sigma for {name!r} must be >= 0")
        self.weather.validate()
        self.model.validate()


def default_weather_params() -> WeatherParams:
    """Weather parameters from the packaged default file."""
    return weather_params_from_dict(_load_packaged("weather_default.yml"))


def default_model_params() -> ModelParams:
    """Model parameters from the packaged default file."""
    return model_params_from_dict(_load_packaged("model_default.yml"))


def weather_params_from_dict(raw: Mapping[str, Any]) -> WeatherParams:
    """Build and validate WeatherParams from a parsed mapping."""
    try:
        params = WeatherParams(
            p_ww=tuple(float(x) for x in raw["p_ww"]),
            p_wd=tuple(float(x) for x in raw["p_wd"]),
            rain_mean=tuple(float(x) for x in raw["rain_mean"]),
            tmax=_cycle(raw["tmax"]),
            diurnal_range=_cycle(raw["diurnal_range"]),
            srad=_cycle(raw["srad"]),
            wet_tmax_drop=float(raw["wet_tmax_drop"]),
            wet_srad_drop=float(raw["wet_srad_drop"]),
            residual_rho=float(raw["residual_rho"]),
            tmax_sigma=float(raw["tmax_sigma"]),
            srad_sigma=float(raw["srad_sigma"]),
            start_doy=int(raw.get("start_doy", 1)),
        )
    except KeyError as exc:
        raise ConfigError(f"weather parameters missing field {exc.args[0]!r}") from None
    params.validate()
    return params


def model_params_from_dict(raw: Mapping[str, Any]) -> ModelParams:
    """Build and validate ModelParams from a parsed mapping."""
    kwargs: dict[str, Any] = {}
    valid = set(ModelParams.__dataclass_fields__)
    for key, value in raw.items():
        if key not in valid:
            raise ConfigError(f"unknown model parameter {key!r}")
        if key == "init_n":
            value = tuple((float(a), float(b)) for a, b in value)
        elif key == "init_sw_frac":
            value = (float(value[0]), float(value[1]))
        elif isinstance(value, list):
            value = tuple(float(x) for x in value)
        kwargs[key] = value
    params = ModelParams(**kwargs)
    params.validate()
    return params


def _cycle(raw: Mapping[str, Any]) -> SeasonalCycle:
    return SeasonalCycle(
        mean=float(raw["mean"]),
        amplitude=float(raw["amplitude"]),
        peak_doy=float(raw["peak_doy"]),
    )


def _load_packaged(name: str) -> dict:
    text = resources.files("cropenv").joinpath("configs", name).read_text(encoding="utf-8")
    return yaml.safe_load(text)


def _deep_merge(base: dict, override: Mapping[str, Any]) -> dict:
    merged = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, Mapping) and isinstance(merged.get(key), dict):
            merged[key] = _deep_merge(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def _resolve_params(section: Any, base_dir: Path | None, default_name: str) -> dict:
    """A params section is either an inline mapping or a file reference."""
    if section is None:
        return _load_packaged(default_name)
    if isinstance(section, str):
        path = Path(section)
        if not path.is_absolute() and base_dir is not None:
            path = base_dir / path
        if not path.exists():
            return _load_packaged(section)
        return yaml.safe_load(path.read_text(encoding="utf-8"))
    if isinstance(section, Mapping):
        return dict(section)
    raise ConfigError("parameter reference must be a mapping or a file path")


def load_config(path: str | Path | None = None, *, task: str | None = None,
                overrides: Mapping[str, Any] | None = None) -> TaskConfig:
    """Load a TaskConfig from a YAML file, the packaged defaults, or both.

    ``task`` switches the decision problem (and its per-task defaults for
    observations, planting and background schedules); ``overrides`` is a
    nested mapping merged over the file content, as used by the wire
    protocol's init message.
    """
    base_dir: Path | None = None
    if path is None:
        raw = _load_packaged("env_default.yml")
    else:
        path = Path(path)
        raw = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
        base_dir = path.parent
    if overrides:
        raw = _deep_merge(raw, overrides)
    if task is not None:
        raw["task"] = task
    return build_task_config(raw, base_dir=base_dir)


def default_config(task: str = "fertilization") -> TaskConfig:
    """Packaged default configuration for one of the three tasks."""
    return load_config(None, task=task)


def build_task_config(raw: Mapping[str, Any], *, base_dir: Path | None = None) -> TaskConfig:
    """Assemble and validate a TaskConfig from a parsed config mapping."""
    task = str(raw.get("task", "fertilization"))
    if task not in TASKS:
        raise ConfigError(f"task={task!r} not one of {TASKS}")

    observations = raw.get("observations")
    if observations is None:
        observations = DEFAULT_OBS[task]
    observations = tuple(str(x) for x in observations)

    rewards = raw.get("rewards") or {}
    actions = raw.get("actions") or {}
    seeds = raw.get("seeds") or {}

    planting = raw.get("planting") or {}
    plant_mode = planting.get("mode", "auto" if task == "fertilization" else "fixed")
    plant_day = int(planting.get("fixed_day", 30))

    background = raw.get("background") or {}
    if "fertilization" in background:
        background_fert = tuple(
            (int(d), float(a)) for d, a in (background["fertilization"] or ())
        )
    else:
        background_fert = EXPERT_FERT_TABLE if task == "irrigation" else ()
    if "irrigation" in background:
        background_irr = tuple(
            (int(d), float(a)) for d, a in (background["irrigation"] or ())
        )
    else:
        background_irr = ((5, 20.0),) if task == "fertilization" else ()

    noise = raw.get("observation_noise") or {}
    obs_noise = tuple((str(k), float(v)) for k, v in noise.items())

    weather = weather_params_from_dict(
        _resolve_params(raw.get("weather_params"), base_dir, "weather_default.yml"))
    model = model_params_from_dict(
        _resolve_params(raw.get("model_params"), base_dir, "model_default.yml"))

    config = TaskConfig(
        task=task,
        observations=observations,
        fert_penalty=float(rewards.get("fertilization_penalty", 0.5)),
        irr_penalty=float(rewards.get("irrigation_penalty", 15.0)),
        anfer_max=float(actions.get("fertilization_max", 200.0)),
        amir_max=float(actions.get("irrigation_max", 50.0)),
        plant_mode=str(plant_mode),
        plant_day=plant_day,
        background_fert=background_fert,
        background_irr=background_irr,
        weather_seed=int(seeds.get("weather", 20070)),
        soil_seed=int(seeds.get("soil", 10021)),
        max_episode_days=int(raw.get("max_episode_days", 365)),
        obs_noise=obs_noise,
        weather=weather,
        model=model,
    )
    config.validate()
    return config

