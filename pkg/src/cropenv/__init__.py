"""Crop-management reinforcement-learning environment.

A daily-step maize surrogate with stochastic weather, three built-in decision
problems (fertilization, irrigation, mixed), a newline-delimited JSON wire
protocol for out-of-process agents, and an evaluation harness with baseline
policies and agronomic metrics.
"""

from .config import (
    CATALOGUE,
    FERTILIZATION_OBS,
    IRRIGATION_OBS,
    MIXED_OBS,
    TaskConfig,
    default_config,
    load_config,
)
from .errors import ActionError, ConfigError, CropEnvError, ProtocolError
from .policies import (
    EXPERT_FERT_TABLE,
    EXPERT_IRR_TABLE,
    expert_fert_policy,
    expert_irr_policy,
    get_policy,
    null_policy,
)
from .soilcrop import (
    CropState,
    DailyFluxes,
    ModelParams,
    SoilState,
    advance_day,
    check_terminal,
    compute_gdd,
    init_field,
)
from .tasks import (
    Action,
    CropEnv,
    StepResult,
    make_env,
    reward_fertilization,
    reward_irrigation,
    reward_mixed,
    validate_action,
)
from .weather import (
    SeasonalCycle,
    WeatherDay,
    WeatherParams,
    generate_day,
    generate_series,
    init_weather,
)

__version__ = "0.1.0"

__all__ = [
    "Action",
    "ActionError",
    "CATALOGUE",
    "ConfigError",
    "CropEnv",
    "CropEnvError",
    "CropState",
    "DailyFluxes",
    "EXPERT_FERT_TABLE",
    "EXPERT_IRR_TABLE",
    "FERTILIZATION_OBS",
    "IRRIGATION_OBS",
    "MIXED_OBS",
    "ModelParams",
    "ProtocolError",
    "SeasonalCycle",
    "SoilState",
    "StepResult",
    "TaskConfig",
    "WeatherDay",
    "WeatherParams",
    "advance_day",
    "check_terminal",
    "compute_gdd",
    "default_config",
    "expert_fert_policy",
    "expert_irr_policy",
    "generate_day",
    "generate_series",
    "get_policy",
    "init_field",
    "init_weather",
    "load_config",
    "make_env",
    "null_policy",
    "reward_fertilization",
    "reward_irrigation",
    "reward_mixed",
    "validate_action",
]
