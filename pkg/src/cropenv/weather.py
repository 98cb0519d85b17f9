"""Stochastic daily weather generation.

Wet/dry occurrence follows a first-order two-state Markov chain with monthly
transition probabilities. Rain amounts on wet days are exponential with a
monthly mean. Maximum temperature and solar radiation are seasonal sinusoids
plus a wet-day depression and an AR(1) standardized residual; minimum
temperature is tmax minus a seasonal diurnal range.

Randomness comes from a numpy PCG64 generator seeded explicitly. Exactly four
variates are drawn per day, in a fixed order (occurrence uniform, rain amount,
tmax residual, srad residual), so a (params, seed) pair fully pins the series.
The calendar is a fixed 365-day year with no leap days.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

DAYS_PER_YEAR = 365

# Cumulative day-of-year at the end of each month (28-day February).
_MONTH_ENDS = (31, 59, 90, 120, 151, 181, 212, 243, 273, 304, 334, 365)


def month_of_doy(doy: int) -> int:
    """Month (1..12) containing day-of-year ``doy`` (1..365)."""
    doy = (doy - 1) % DAYS_PER_YEAR + 1
    for month, end in enumerate(_MONTH_ENDS, start=1):
        if doy <= end:
            return month
    raise AssertionError("unreachable")


@dataclass(frozen=True)
class SeasonalCycle:
    """Annual sinusoid: mean + amplitude * cos(2*pi*(doy - peak_doy)/365)."""

    mean: float
    amplitude: float
    peak_doy: float

    def value(self, doy: int) -> float:
        angle = 2.0 * math.pi * (doy - self.peak_doy) / DAYS_PER_YEAR
        return self.mean + self.amplitude * math.cos(angle)


@dataclass(frozen=True)
class WeatherParams:
    """Parameter set for the daily weather generator.

    Monthly vectors have 12 entries (January first). Temperatures in deg C,
    rain in mm/day, radiation in MJ/m2/day.
    """

    p_ww: tuple[float, ...]          # P(wet | previous day wet), per month
    p_wd: tuple[float, ...]          # P(wet | previous day dry), per month
    rain_mean: tuple[float, ...]     # mean rain amount on wet days, per month
    tmax: SeasonalCycle
    diurnal_range: SeasonalCycle     # tmax - tmin cycle; must stay >= 0
    srad: SeasonalCycle
    wet_tmax_drop: float             # tmax depression on wet days
    wet_srad_drop: float             # srad depression on wet days
    residual_rho: float              # AR(1) coefficient of the residuals
    tmax_sigma: float                # residual std-dev of tmax
    srad_sigma: float                # residual std-dev of srad
    start_doy: int = 1               # day-of-year assigned to simulation day 0

    def validate(self) -> None:
        for name, vec in (("p_ww", self.p_ww), ("p_wd", self.p_wd)):
            if len(vec) != 12:
                raise ConfigError(f"{name} must have 12 monthly entries, got {len(vec)}")
            for i, p in enumerate(vec):
                if not 0.0 <= p <= 1.0:
                    raise ConfigError(f"{name}[{i}]={p} outside [0, 1]")
        if len(self.rain_mean) != 12:
            raise ConfigError(f"rain_mean must have 12 monthly entries, got {len(self.rain_mean)}")
        for i, m in enumerate(self.rain_mean):
            if m <= 0.0:
                raise ConfigError(f"rain_mean[{i}]={m} must be > 0")
        if not 0.0 <= self.residual_rho < 1.0:
            raise ConfigError(f"residual_rho={self.residual_rho} outside [0, 1)")
        if self.tmax_sigma < 0.0:
            raise ConfigError(f"tmax_sigma={self.tmax_sigma} must be >= 0")
        if self.srad_sigma < 0.0:
            raise ConfigError(f"srad_sigma={self.srad_sigma} must be >= 0")
        if self.diurnal_range.mean < abs(self.diurnal_range.amplitude):
            raise ConfigError(
                "diurnal_range mean must be >= |amplitude| so tmax >= tmin on every day"
            )
        if not 1 <= self.start_doy <= DAYS_PER_YEAR:
            raise ConfigError(f"start_doy={self.start_doy} outside [1, 365]")


@dataclass(frozen=True)
class WeatherDay:
    """One day of exogenous forcing."""

    rain: float   # mm/day, equivalently L/m2/day
    tmax: float   # deg C
    tmin: float   # deg C
    srad: float   # MJ/m2/day


class WeatherState:
    """One-step memory of the generator: rng, wet flag, residuals, day-of-year.

    Single-owner: mutate only through :func:`generate_day`. Independent states
    may be driven concurrently.
    """

    __slots__ = ("rng", "prev_wet", "e_tmax", "e_srad", "doy")

    def __init__(self, rng: np.random.Generator, start_doy: int):
        self.rng = rng
        self.prev_wet = False
        self.e_tmax = 0.0
        self.e_srad = 0.0
        self.doy = start_doy


def init_weather(params: WeatherParams, seed: int) -> WeatherState:
    """Validate params and return a fresh generator state for ``seed``."""
    params.validate()
    rng = np.random.Generator(np.random.PCG64(seed))
    return WeatherState(rng, params.start_doy)


def sample_rain_amount(params: WeatherParams, month: int, rng: np.random.Generator) -> float:
    """Draw a wet-day rain amount (mm) for ``month`` (1..12)."""
    return float(rng.exponential(params.rain_mean[month - 1]))


def generate_day(params: WeatherParams, state: WeatherState) -> WeatherDay:
    """Advance the state by one day and return that day's weather."""
    month = month_of_doy(state.doy)
    p_wet = params.p_ww[month - 1] if state.prev_wet else params.p_wd[month - 1]

    u = float(state.rng.random())
    amount = sample_rain_amount(params, month, state.rng)
    z_tmax = float(state.rng.standard_normal())
    z_srad = float(state.rng.standard_normal())

    wet = u < p_wet
    rain = amount if wet else 0.0

    rho = params.residual_rho
    shock = math.sqrt(1.0 - rho * rho)
    state.e_tmax = rho * state.e_tmax + shock * z_tmax
    state.e_srad = rho * state.e_srad + shock * z_srad

    tmax = params.tmax.value(state.doy) + params.tmax_sigma * state.e_tmax
    srad = params.srad.value(state.doy) + params.srad_sigma * state.e_srad
    if wet:
        tmax -= params.wet_tmax_drop
        srad -= params.wet_srad_drop
    srad = max(0.0, srad)
    tmin = tmax - max(0.0, params.diurnal_range.value(state.doy))

    state.prev_wet = wet
    state.doy = state.doy % DAYS_PER_YEAR + 1
    return WeatherDay(rain=rain, tmax=tmax, tmin=tmin, srad=srad)


def generate_series(params: WeatherParams, seed: int, n_days: int) -> list[WeatherDay]:
    """Generate ``n_days`` of weather from a fresh state."""
    state = init_weather(params, seed)
    return [generate_day(params, state) for _ in range(n_days)]


def write_weather_csv(days: list[WeatherDay], path: str) -> None:
    """Write a generated series as CSV with columns day,rain,tmax,tmin,srad."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["day", "rain", "tmax", "tmin", "srad"])
        for i, d in enumerate(days):
            writer.writerow([i, repr(d.rain), repr(d.tmax), repr(d.tmin), repr(d.srad)])
