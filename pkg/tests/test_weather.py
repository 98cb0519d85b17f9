"""Weather generator: determinism, distributional recovery, invariants."""

import math

import numpy as np
import pytest

from cropenv.config import default_weather_params
from cropenv.errors import ConfigError
from cropenv.weather import (
    SeasonalCycle,
    WeatherParams,
    generate_day,
    generate_series,
    init_weather,
    month_of_doy,
    sample_rain_amount,
)


def flat_params(**kwargs):
    """Uniform-month parameter set, easy to reason about in closed form."""
    defaults = dict(
        p_ww=(0.5,) * 12,
        p_wd=(0.3,) * 12,
        rain_mean=(10.0,) * 12,
        tmax=SeasonalCycle(mean=25.0, amplitude=8.0, peak_doy=200),
        diurnal_range=SeasonalCycle(mean=11.0, amplitude=1.0, peak_doy=110),
        srad=SeasonalCycle(mean=16.0, amplitude=6.0, peak_doy=172),
        wet_tmax_drop=2.0,
        wet_srad_drop=3.0,
        residual_rho=0.6,
        tmax_sigma=2.0,
        srad_sigma=2.5,
        start_doy=1,
    )
    defaults.update(kwargs)
    return WeatherParams(**defaults)


class TestValidation:
    def test_probability_out_of_range_names_field(self):
        params = flat_params(p_ww=(1.2,) + (0.5,) * 11)
        with pytest.raises(ConfigError, match="p_ww"):
            init_weather(params, seed=1)

    def test_nonpositive_rain_mean_rejected(self):
        params = flat_params(rain_mean=(0.0,) + (10.0,) * 11)
        with pytest.raises(ConfigError, match="rain_mean"):
            init_weather(params, seed=1)

    def test_rho_bounds(self):
        with pytest.raises(ConfigError, match="residual_rho"):
            init_weather(flat_params(residual_rho=1.0), seed=1)

    def test_diurnal_range_must_keep_tmax_above_tmin(self):
        bad = SeasonalCycle(mean=1.0, amplitude=2.0, peak_doy=100)
        with pytest.raises(ConfigError, match="diurnal_range"):
            init_weather(flat_params(diurnal_range=bad), seed=1)


class TestDeterminism:
    def test_same_seed_identical_sequences(self):
        params = flat_params()
        a = generate_series(params, seed=42, n_days=1000)
        b = generate_series(params, seed=42, n_days=1000)
        assert a == b

    def test_different_seeds_diverge_quickly(self):
        params = flat_params()
        a = generate_series(params, seed=42, n_days=30)
        b = generate_series(params, seed=43, n_days=30)
        assert a != b

    def test_stream_is_stationary_across_call_boundaries(self):
        params = flat_params()
        state = init_weather(params, seed=9)
        split = [generate_day(params, state) for _ in range(100)]
        split += [generate_day(params, state) for _ in range(200)]
        assert split == generate_series(params, seed=9, n_days=300)


class TestDayProperties:
    def test_invariants_over_long_run(self):
        days = generate_series(default_weather_params(), seed=5, n_days=100_000)
        assert all(d.rain >= 0.0 for d in days)
        assert all(d.tmax >= d.tmin for d in days)
        assert all(d.srad >= 0.0 for d in days)

    def test_dry_regime_never_rains(self):
        params = flat_params(p_ww=(0.0,) * 12, p_wd=(0.0,) * 12)
        days = generate_series(params, seed=3, n_days=365)
        assert all(d.rain == 0.0 for d in days)

    def test_always_wet_recovers_rain_mean(self):
        params = flat_params(p_ww=(1.0,) * 12, p_wd=(1.0,) * 12, rain_mean=(8.0,) * 12)
        days = generate_series(params, seed=11, n_days=100_000)
        assert all(d.rain > 0.0 for d in days)
        mean = sum(d.rain for d in days) / len(days)
        se = 8.0 / math.sqrt(len(days))  # exponential: std equals the mean
        assert abs(mean - 8.0) <= 3 * se

    def test_zero_noise_gives_exact_sinusoid(self):
        params = flat_params(tmax_sigma=0.0, srad_sigma=0.0,
                             wet_tmax_drop=0.0, wet_srad_drop=0.0)
        days = generate_series(params, seed=2, n_days=365)
        for i, day in enumerate(days):
            doy = i % 365 + 1
            assert day.tmax == params.tmax.value(doy)
            assert day.tmin == day.tmax - max(0.0, params.diurnal_range.value(doy))


class TestRainAmount:
    def test_sample_is_positive(self):
        rng = np.random.Generator(np.random.PCG64(0))
        params = flat_params()
        assert sample_rain_amount(params, 1, rng) > 0.0

    def test_monte_carlo_mean(self):
        rng = np.random.Generator(np.random.PCG64(123))
        params = flat_params(rain_mean=(10.0,) * 12)
        n = 100_000
        samples = [sample_rain_amount(params, 6, rng) for _ in range(n)]
        se = 10.0 / math.sqrt(n)
        assert abs(sum(samples) / n - 10.0) <= 3 * se

    def test_monte_carlo_variance_matches_exponential_law(self):
        rng = np.random.Generator(np.random.PCG64(321))
        params = flat_params(rain_mean=(10.0,) * 12)
        n = 100_000
        samples = np.array([sample_rain_amount(params, 6, rng) for _ in range(n)])
        assert abs(samples.var() - 100.0) / 100.0 <= 0.05


class TestMarkovRecovery:
    def test_transition_probabilities_recovered(self):
        params = default_weather_params()
        state = init_weather(params, seed=99)
        prev_wet = state.prev_wet
        doy = state.doy
        # (opportunities, wet outcomes) per month, split by the previous flag
        ww = np.zeros((12, 2))
        wd = np.zeros((12, 2))
        for _ in range(100_000):
            month = month_of_doy(doy)
            day = generate_day(params, state)
            wet = day.rain > 0.0
            bucket = ww if prev_wet else wd
            bucket[month - 1, 0] += 1
            bucket[month - 1, 1] += wet
            prev_wet = wet
            doy = doy % 365 + 1

        for bucket, probs in ((ww, params.p_ww), (wd, params.p_wd)):
            n = bucket[:, 0]
            p = np.array(probs)
            expected = float(np.sum(n * p) / np.sum(n))
            observed = float(np.sum(bucket[:, 1]) / np.sum(n))
            se = math.sqrt(float(np.sum(n * p * (1 - p)))) / float(np.sum(n))
            assert abs(observed - expected) <= 3 * se


def test_month_of_doy_covers_calendar():
    assert month_of_doy(1) == 1
    assert month_of_doy(31) == 1
    assert month_of_doy(32) == 2
    assert month_of_doy(59) == 2
    assert month_of_doy(60) == 3
    assert month_of_doy(365) == 12
