"""Daily-step surrogate of the maize-soil system.

State is split between :class:`SoilState` (multi-layer water and mineral
nitrogen) and :class:`CropState` (phenology, biomass, grain, stress). One call
to :func:`advance_day` consumes one day of weather plus the day's fertilizer
and irrigation amounts and runs the sub-models in a fixed order:

    thermal time -> water balance -> nitrogen balance -> biomass growth
    -> phenology

The ordering is load-bearing: the conservation checks below assume water moves
before nitrogen (leaching uses the day's percolation) and growth reads the
day's stress indices.

Both balances close exactly. Per day,

    sum of layer-water changes (mm)   = rain + amir - runoff - drainage - ep - es
    sum of layer-nitrogen changes     = anfer + mineralization - trnu - leach

with residuals at float rounding level, far below the 1e-9 tolerance the
tests enforce.

Units: kg/ha for masses, mm (== L/m2) for water, cm for depths, deg C day for
thermal time. Everything here is deterministic; randomness enters only through
:func:`init_field` (which takes an rng) and the weather generator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError
from .weather import WeatherDay

# DSSAT-style maize stage codes, in traversal order. 7 = sowing to
# germination, 8 = germination, 9 = emergence, 1..5 = juvenile through end of
# grain fill, 6 = maturity. 0 encodes "not planted".
STAGE_ORDER = (7, 8, 9, 1, 2, 3, 4, 5, 6)
UNPLANTED = 0
VEGETATIVE_STAGES = (9, 1, 2)
GRAIN_STAGES = (4, 5)
GROWING_STAGES = (9, 1, 2, 3, 4, 5)
ROOT_GROWTH_STAGES = (8, 9, 1, 2, 3)

MM_PER_CM = 10.0
KG_PER_HA_PER_G_M2 = 10.0
ET_MM_PER_MJ = 0.408  # latent-heat conversion, mm of water per MJ/m2

MATURITY = "maturity"
FAILURE = "failure"


@dataclass(frozen=True)
class ModelParams:
    """Calibration constants of the surrogate field model."""

    # Thermal time (deg C)
    tbase: float = 8.0
    topt: float = 34.0
    phyllochron: float = 45.0                  # deg C day per leaf
    # Cumulative GDD after planting at which stages 8, 9, 1, 2, 3, 4, 5, 6
    # are reached. Shipped values come from the calibration run
    # (`cropenv calibrate`); must be strictly increasing.
    stage_gdd: tuple[float, ...] = (6.6, 10.6, 66.9, 250.4, 293.6, 781.3, 929.4, 1582.9)

    # Canopy and biomass
    rue: float = 1.7                           # g biomass per MJ solar
    k_canopy: float = 0.65                     # light extinction coefficient
    lai_max: float = 5.0
    lai_per_leaf: float = 0.28                 # LAI added per new leaf
    lai_senescence: float = 0.08               # LAI lost per day in stage 5
    emergence_lai: float = 0.01
    grain_partition: float = 0.55              # share of new biomass to grain
    grain_translocation: float = 30.0          # kg/ha/day stover-to-grain flow

    # Nitrogen
    n_dilution_pct: float = 4.0                # target plant N %% at low biomass
    n_dilution_exp: float = 0.45
    n_dilution_ref: float = 1000.0             # kg/ha pivot of the dilution curve
    mineralization_rate: float = 0.5           # kg/ha/day at reference T and moisture
    n_mobility: float = 0.35                   # mobile share of dissolved N (retardation)
    n_uptake_frac: float = 0.08                # per-day fraction of layer N reachable
    grain_n_uptake_frac: float = 0.6           # share of daily uptake routed to grain
    grain_n_transloc_frac: float = 0.015       # per-day vegetative-to-grain N transfer

    # Water
    runoff_retention: float = 120.0            # S in the runoff retention formula, mm
    et_coefficient: float = 0.7
    water_extract_frac: float = 0.10           # per-day fraction of plant-available water

    # Roots
    rtdep_init: float = 5.0                    # cm at planting
    rtdep_max: float = 100.0
    rtdep_per_gdd: float = 0.12                # cm per deg C day

    # Water table (exposed, not simulated)
    wtdep: float = 200.0

    # Failure rule
    failure_stress_level: float = 0.02
    failure_stress_days: int = 10
    emergence_deadline: int = 60               # day of simulation

    # Auto-planting window (days of simulation) and favorability thresholds
    plant_window_open: int = 20
    plant_window_close: int = 42
    plant_sw_frac_dul: float = 0.35
    plant_temp_mean: float = 10.0              # 5-day mean air temperature, deg C

    # Soil profile template and initial-condition ranges
    layer_dz: tuple[float, ...] = (15.0, 30.0, 60.0)          # cm
    layer_ll: tuple[float, ...] = (0.05, 0.05, 0.05)          # cm3/cm3
    layer_dul: tuple[float, ...] = (0.15, 0.15, 0.15)
    layer_sat: tuple[float, ...] = (0.30, 0.30, 0.30)
    init_sw_frac: tuple[float, float] = (0.45, 0.90)          # of the LL..DUL span
    init_n: tuple[tuple[float, float], ...] = ((15.0, 35.0), (8.0, 20.0), (4.0, 12.0))

    def validate(self) -> None:
        if len(self.stage_gdd) != 8:
            raise ConfigError(f"stage_gdd needs 8 thresholds, got {len(self.stage_gdd)}")
        for a, b in zip(self.stage_gdd, self.stage_gdd[1:]):
            if b <= a:
                raise ConfigError(f"stage_gdd must be strictly increasing, got {self.stage_gdd}")
        if self.topt <= self.tbase:
            raise ConfigError(f"topt={self.topt} must exceed tbase={self.tbase}")
        n = len(self.layer_dz)
        for name in ("layer_ll", "layer_dul", "layer_sat"):
            if len(getattr(self, name)) != n:
                raise ConfigError(f"{name} must match layer_dz length {n}")
        if len(self.init_n) != n:
            raise ConfigError(f"init_n must match layer_dz length {n}")
        for i in range(n):
            ll, dul, sat = self.layer_ll[i], self.layer_dul[i], self.layer_sat[i]
            if not ll < dul < sat:
                raise ConfigError(
                    f"layer {i}: hydrology must satisfy LL < DUL < SAT, got "
                    f"LL={ll}, DUL={dul}, SAT={sat}"
                )
            if self.layer_dz[i] <= 0:
                raise ConfigError(f"layer {i}: thickness must be > 0")
        lo, hi = self.init_sw_frac
        if not 0.0 <= lo <= hi <= 1.0:
            raise ConfigError(f"init_sw_frac={self.init_sw_frac} must be ordered within [0, 1]")
        for i, (nlo, nhi) in enumerate(self.init_n):
            if not 0.0 <= nlo <= nhi:
                raise ConfigError(f"init_n[{i}]={self.init_n[i]} must be ordered and >= 0")
        for name in ("phyllochron", "rue", "k_canopy", "lai_max", "lai_per_leaf",
                     "lai_senescence", "grain_partition", "grain_translocation",
                     "n_dilution_pct", "mineralization_rate", "n_uptake_frac",
                     "grain_n_uptake_frac", "grain_n_transloc_frac",
                     "runoff_retention", "et_coefficient", "water_extract_frac",
                     "rtdep_init", "rtdep_max", "rtdep_per_gdd", "wtdep"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0")
        if not 0 <= self.plant_window_open <= self.plant_window_close:
            raise ConfigError("planting window must be ordered and non-negative")


@dataclass
class SoilState:
    """Layered soil profile plus cumulative loss counters."""

    dz: tuple[float, ...]        # layer thickness, cm
    ll: tuple[float, ...]        # lower limit, cm3/cm3
    dul: tuple[float, ...]       # drained upper limit, cm3/cm3
    sat: tuple[float, ...]       # saturation, cm3/cm3
    sw: list[float]              # volumetric water content, cm3/cm3
    n_min: list[float]           # mineral nitrogen, kg/ha
    wtdep: float                 # water-table depth, cm (constant)
    cleach: float = 0.0          # cumulative leached N, kg/ha
    runoff_total: float = 0.0    # cumulative runoff, mm

    @property
    def n_layers(self) -> int:
        return len(self.dz)

    def water_mm(self, i: int) -> float:
        return self.sw[i] * self.dz[i] * MM_PER_CM

    def total_water_mm(self) -> float:
        return sum(self.water_mm(i) for i in range(self.n_layers))

    def total_n(self) -> float:
        return sum(self.n_min)

    def copy(self) -> "SoilState":
        return replace(self, sw=list(self.sw), n_min=list(self.n_min))


@dataclass
class CropState:
    """Maize crop state; all-zero defaults encode an unplanted field."""

    planted: bool = False
    istage: int = UNPLANTED
    vstage: float = 0.0          # leaf count
    cumgdd: float = 0.0          # deg C day since planting
    dtt: float = 0.0             # current-day thermal time
    topwt: float = 0.0           # above-ground biomass, kg/ha
    grnwt: float = 0.0           # grain dry matter, kg/ha
    grain_n: float = 0.0         # grain nitrogen mass, kg/ha
    plant_n: float = 0.0         # cumulative plant nitrogen uptake, kg/ha
    pcngrn: float = 0.0          # grain N mass fraction
    xlai: float = 0.0            # leaf area index
    rtdep: float = 0.0           # root depth, cm
    swfac: float = 1.0           # water stress index, 1 = unstressed
    nstres: float = 1.0          # nitrogen stress index, 1 = unstressed
    dap: int = 0                 # days after planting
    stress_days: int = 0         # consecutive post-emergence days under failure stress

    @property
    def emerged(self) -> bool:
        return self.planted and self.istage not in (7, 8)

    def copy(self) -> "CropState":
        return replace(self)


@dataclass(frozen=True)
class WaterFluxes:
    """Result of the daily water balance (all magnitudes, mm)."""

    ep: float
    es: float
    runoff: float
    drainage: float
    swfac: float
    perc: tuple[float, ...]      # downward flux out of each layer


@dataclass(frozen=True)
class NitrogenFluxes:
    """Result of the daily nitrogen balance (kg/ha)."""

    trnu: float
    mineralization: float
    leach: float
    nstres: float


@dataclass(frozen=True)
class DailyFluxes:
    """Per-day flux magnitudes logged alongside the state trajectory."""

    ep: float = 0.0              # plant transpiration, mm
    es: float = 0.0              # soil evaporation, mm
    runoff: float = 0.0          # mm
    drainage: float = 0.0        # mm out of the profile
    trnu: float = 0.0            # plant N uptake, kg/ha
    mineralization: float = 0.0  # kg/ha
    leach: float = 0.0           # N leached below the profile, kg/ha
    delta_topwt: float = 0.0     # biomass increment, kg/ha


def init_field(params: ModelParams, rng: np.random.Generator) -> tuple[SoilState, CropState]:
    """Draw initial soil water and nitrogen; return an unplanted field.

    Draw order is fixed (one uniform per layer for water, then one per layer
    for nitrogen) so a seeded rng reproduces the field bit-exactly.
    """
    params.validate()
    lo, hi = params.init_sw_frac
    sw = []
    for i in range(len(params.layer_dz)):
        u = float(rng.uniform(lo, hi))
        sw.append(params.layer_ll[i] + u * (params.layer_dul[i] - params.layer_ll[i]))
    n_min = [float(rng.uniform(nlo, nhi)) for nlo, nhi in params.init_n]
    soil = SoilState(
        dz=params.layer_dz,
        ll=params.layer_ll,
        dul=params.layer_dul,
        sat=params.layer_sat,
        sw=sw,
        n_min=n_min,
        wtdep=params.wtdep,
    )
    return soil, CropState()


def plant(crop: CropState, params: ModelParams) -> None:
    """Sow the crop: stage 7, zeroed thermal time, initial root depth."""
    crop.planted = True
    crop.istage = 7
    crop.vstage = 0.0
    crop.cumgdd = 0.0
    crop.dap = 0
    crop.rtdep = params.rtdep_init
    crop.stress_days = 0


def compute_gdd(tmax: float, tmin: float, params: ModelParams) -> float:
    """Daily thermal time: mean temperature capped at topt, less tbase, floored at 0."""
    return max(0.0, min((tmax + tmin) / 2.0, params.topt) - params.tbase)


def _root_weights(soil: SoilState, rtdep: float) -> list[float]:
    """Fraction of each layer lying within the rooted depth."""
    weights = []
    top = 0.0
    for dz in soil.dz:
        bottom = top + dz
        span = max(0.0, min(bottom, rtdep) - top)
        weights.append(span / dz)
        top = bottom
    return weights


def water_balance(soil: SoilState, rain: float, amir: float, crop: CropState,
                  weather: WeatherDay, params: ModelParams) -> WaterFluxes:
    """Run one day of the soil water balance, mutating ``soil`` in place.

    Runoff uses a curve-number-like retention S; infiltration fills layers
    top-down with anything above the drained upper limit cascading to the
    next layer and finally out of the profile as drainage. Potential ET is
    split between soil evaporation and transpiration by canopy cover;
    transpiration is limited by extractable water in the rooted zone.
    """
    n = soil.n_layers
    p = rain + amir
    s = params.runoff_retention
    runoff = 0.0
    if p > 0.2 * s:
        runoff = (p - 0.2 * s) ** 2 / (p + 0.8 * s)

    perc = [0.0] * n
    inflow = p - runoff
    for i in range(n):
        water = soil.water_mm(i)
        cap = soil.dul[i] * soil.dz[i] * MM_PER_CM
        excess = max(0.0, water + inflow - cap)
        if inflow != 0.0 or excess != 0.0:
            soil.sw[i] = (water + inflow - excess) / (soil.dz[i] * MM_PER_CM)
        perc[i] = excess
        inflow = excess
    drainage = inflow

    tmean = (weather.tmax + weather.tmin) / 2.0
    tfac = min(1.2, max(0.0, 0.35 + 0.025 * tmean))
    eo = params.et_coefficient * ET_MM_PER_MJ * weather.srad * tfac
    cover = 1.0 - math.exp(-params.k_canopy * crop.xlai) if crop.planted else 0.0
    pot_ep = eo * cover
    pot_es = eo * (1.0 - cover)

    # Soil evaporation draws the topsoil down to its lower limit, no further.
    avail0 = max(0.0, soil.water_mm(0) - soil.ll[0] * soil.dz[0] * MM_PER_CM)
    es = min(pot_es, avail0)
    if es > 0.0:
        soil.sw[0] = (soil.water_mm(0) - es) / (soil.dz[0] * MM_PER_CM)

    weights = _root_weights(soil, crop.rtdep if crop.planted else 0.0)
    avail = [
        w * max(0.0, soil.water_mm(i) - soil.ll[i] * soil.dz[i] * MM_PER_CM)
        for i, w in enumerate(weights)
    ]
    supply = params.water_extract_frac * sum(avail)
    if pot_ep <= 0.0:
        swfac = 1.0
        ep = 0.0
    else:
        swfac = min(1.0, supply / pot_ep)
        ep = min(pot_ep, supply)

    if ep > 0.0:
        total = sum(avail)
        taken = 0.0
        last = max(i for i, a in enumerate(avail) if a > 0.0)
        for i in range(n):
            if avail[i] <= 0.0:
                continue
            # Last contributing layer takes the exact remainder so the
            # extracted shares sum to ep at full precision.
            share = ep - taken if i == last else ep * (avail[i] / total)
            share = min(share, max(0.0, soil.water_mm(i) - soil.ll[i] * soil.dz[i] * MM_PER_CM))
            soil.sw[i] = (soil.water_mm(i) - share) / (soil.dz[i] * MM_PER_CM)
            taken += share
        ep = taken

    soil.runoff_total += runoff
    return WaterFluxes(ep=ep, es=es, runoff=runoff, drainage=drainage,
                       swfac=swfac, perc=tuple(perc))


def _n_dilution_target(topwt: float, params: ModelParams) -> float:
    """Target whole-plant N mass (kg/ha) for a given above-ground biomass."""
    if topwt <= 0.0:
        return 0.0
    pct = params.n_dilution_pct
    if topwt > params.n_dilution_ref:
        pct = params.n_dilution_pct * (topwt / params.n_dilution_ref) ** (-params.n_dilution_exp)
    return pct / 100.0 * topwt


def nitrogen_balance(soil: SoilState, crop: CropState, anfer: float,
                     water: WaterFluxes, weather: WeatherDay,
                     params: ModelParams) -> NitrogenFluxes:
    """Run one day of the soil mineral nitrogen balance, mutating ``soil``.

    Fertilizer and mineralization enter the topsoil; percolating water carries
    nitrogen downward between layers (mixing-cell concentrations), with the
    bottom-layer outflow counted as leaching; crop uptake is the lesser of a
    dilution-curve demand and a water-modified soil supply.
    """
    n = soil.n_layers
    soil.n_min[0] += anfer

    tmean = (weather.tmax + weather.tmin) / 2.0
    tfac = min(1.5, max(0.0, tmean / 25.0))
    span0 = soil.dul[0] - soil.ll[0]
    mfac = min(1.0, max(0.0, (soil.sw[0] - soil.ll[0]) / span0))
    mineralization = params.mineralization_rate * tfac * mfac
    soil.n_min[0] += mineralization

    # Downward convection with the day's percolation.
    leach = 0.0
    for i in range(n):
        flux = water.perc[i]
        if flux <= 0.0 or soil.n_min[i] <= 0.0:
            continue
        moved = params.n_mobility * soil.n_min[i] * flux / (soil.water_mm(i) + flux)
        moved = min(moved, soil.n_min[i])
        soil.n_min[i] -= moved
        if i + 1 < n:
            soil.n_min[i + 1] += moved
        else:
            leach = moved

    # Crop uptake: demand from the dilution curve evaluated at today's
    # potential (unstressed) biomass, supply from rooted, moist layers.
    demand = 0.0
    if crop.planted:
        cover = 1.0 - math.exp(-params.k_canopy * crop.xlai)
        delta_pot = params.rue * weather.srad * cover * KG_PER_HA_PER_G_M2
        demand = max(0.0, _n_dilution_target(crop.topwt + delta_pot, params) - crop.plant_n)

    weights = _root_weights(soil, crop.rtdep if crop.planted else 0.0)
    contrib = []
    for i in range(n):
        span = soil.dul[i] - soil.ll[i]
        wf = min(1.0, max(0.0, (soil.sw[i] - soil.ll[i]) / span))
        contrib.append(weights[i] * soil.n_min[i] * params.n_uptake_frac * wf)
    supply = sum(contrib)

    if not crop.planted or demand <= 0.0:
        trnu = 0.0
        nstres = 1.0
    else:
        trnu = min(demand, supply)
        nstres = min(1.0, supply / demand)

    if trnu > 0.0:
        taken = 0.0
        last = max(i for i, c in enumerate(contrib) if c > 0.0)
        for i in range(n):
            if contrib[i] <= 0.0:
                continue
            share = trnu - taken if i == last else trnu * (contrib[i] / supply)
            share = min(share, soil.n_min[i])
            soil.n_min[i] -= share
            taken += share
        trnu = taken
        crop.plant_n += trnu

    soil.cleach += leach
    return NitrogenFluxes(trnu=trnu, mineralization=mineralization, leach=leach, nstres=nstres)


def grow_biomass(crop: CropState, srad: float, swfac: float, nstres: float,
                 dtt: float, trnu: float, params: ModelParams) -> float:
    """Accumulate biomass, canopy and grain for one day; return the biomass gain.

    Light interception times radiation-use efficiency, cut by the most
    limiting stress. Grain mass and nitrogen only accrue during the grain
    stages; canopy expands with new leaves while vegetative and senesces
    linearly once grain filling is over.
    """
    if not crop.planted or crop.istage not in GROWING_STAGES:
        return 0.0
    stress = min(swfac, nstres)
    cover = 1.0 - math.exp(-params.k_canopy * crop.xlai)
    delta = params.rue * srad * cover * stress * KG_PER_HA_PER_G_M2
    crop.topwt += delta

    if crop.istage in VEGETATIVE_STAGES:
        crop.xlai = min(params.lai_max,
                        crop.xlai + params.lai_per_leaf * (dtt / params.phyllochron) * stress)
    elif crop.istage == 5:
        crop.xlai = max(0.0, crop.xlai - params.lai_senescence)

    if crop.istage in GRAIN_STAGES:
        gain = params.grain_partition * delta + params.grain_translocation
        crop.grnwt = min(crop.topwt, crop.grnwt + gain)
        n_gain = params.grain_n_uptake_frac * trnu \
            + params.grain_n_transloc_frac * max(0.0, crop.plant_n - crop.grain_n)
        crop.grain_n = min(crop.plant_n, crop.grain_n + n_gain)

    crop.pcngrn = crop.grain_n / crop.grnwt if crop.grnwt > 0.0 else 0.0
    return delta


def update_phenology(crop: CropState, dtt: float, params: ModelParams) -> None:
    """Advance thermal time, stage code, leaf number and root depth."""
    if not crop.planted:
        return
    crop.cumgdd += dtt
    idx = STAGE_ORDER.index(crop.istage)
    while idx < len(params.stage_gdd) and crop.cumgdd >= params.stage_gdd[idx]:
        idx += 1
        crop.istage = STAGE_ORDER[idx]
        if crop.istage == 9 and crop.xlai <= 0.0:
            crop.xlai = params.emergence_lai
    if crop.istage in VEGETATIVE_STAGES:
        crop.vstage += dtt / params.phyllochron
    if crop.istage in ROOT_GROWTH_STAGES:
        crop.rtdep = min(params.rtdep_max, crop.rtdep + params.rtdep_per_gdd * dtt)


def auto_plant_check(soil: SoilState, recent_weather: list[WeatherDay],
                     day_of_simulation: int, params: ModelParams) -> bool:
    """Decide whether to sow today (fertilization-task planting rule).

    True inside the planting window when the topsoil is moist enough and the
    recent 5-day mean air temperature is warm enough; unconditionally true on
    the window's closing day so every episode gets planted.
    """
    if day_of_simulation < params.plant_window_open:
        return False
    if day_of_simulation >= params.plant_window_close:
        return True
    if soil.sw[0] < params.plant_sw_frac_dul * soil.dul[0]:
        return False
    window = recent_weather[-5:]
    if not window:
        return False
    tmean = sum((d.tmax + d.tmin) / 2.0 for d in window) / len(window)
    return tmean >= params.plant_temp_mean


def check_terminal(crop: CropState, soil: SoilState, day_of_simulation: int,
                   params: ModelParams) -> str | None:
    """Terminal status of the episode: maturity, failure, or None."""
    if crop.istage == 6:
        return MATURITY
    if crop.stress_days >= params.failure_stress_days:
        return FAILURE
    if not crop.emerged and day_of_simulation >= params.emergence_deadline:
        return FAILURE
    return None


def advance_day(soil: SoilState, crop: CropState, weather: WeatherDay,
                anfer: float, amir: float, params: ModelParams) -> DailyFluxes:
    """Run one simulated day, mutating ``soil`` and ``crop``.

    An unplanted field still runs its water and nitrogen balances; growth and
    phenology require a planted crop. Deterministic: identical inputs give
    bit-identical outputs.
    """
    if crop.planted:
        crop.dap += 1
    dtt = compute_gdd(weather.tmax, weather.tmin, params)
    crop.dtt = dtt

    wf = water_balance(soil, weather.rain, amir, crop, weather, params)
    crop.swfac = wf.swfac
    nf = nitrogen_balance(soil, crop, anfer, wf, weather, params)
    crop.nstres = nf.nstres
    delta = grow_biomass(crop, weather.srad, wf.swfac, nf.nstres, dtt, nf.trnu, params)
    update_phenology(crop, dtt, params)

    if crop.emerged:
        if min(crop.swfac, crop.nstres) < params.failure_stress_level:
            crop.stress_days += 1
        else:
            crop.stress_days = 0

    return DailyFluxes(ep=wf.ep, es=wf.es, runoff=wf.runoff, drainage=wf.drainage,
                       trnu=nf.trnu, mineralization=nf.mineralization,
                       leach=nf.leach, delta_topwt=delta)
