"""Forward projection, in-window validation, and intervention sweeps.

Forecasts start from the last observed day of a series: active cases seed
the infected compartment and recovered + deceased seed the removed
compartment (the output column is called "recovered" but includes the
deceased, matching how the counts are reported). Confidence intervals
summarize the spread of the daily predicted series over the window with a
normal approximation on its mean; they are descriptive, not an endpoint
uncertainty.
"""

from __future__ import annotations

import datetime as dt
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .data import EpiSeries, RegionRecord
from .errors import DataValidationError
from .model import (
    CompartmentState,
    ModelParams,
    die_out_day,
    integrate,
    peak_infected,
)

Z_VALUES = {95: 1.96, 99: 2.576}


def confidence_interval(
    values: Sequence[float], level: int = 95
) -> tuple[float, float]:
    """Normal-approximation interval on the mean of a daily series.

    mean +/- z * sd / sqrt(n) with sample standard deviation and the fixed
    z values 1.96 (95) and 2.576 (99). Symmetric around the mean by
    construction; a constant series collapses to (mean, mean).
    """
    if level not in Z_VALUES:
        raise ValueError(
            f"level must be one of {sorted(Z_VALUES)}, got {level!r}"
        )
    data = np.asarray(values, dtype=float)
    if data.ndim != 1 or len(data) < 2:
        raise ValueError(f"need at least 2 values, got {data.shape}")
    if not np.all(np.isfinite(data)):
        raise ValueError("values contain non-finite entries")
    mean = float(np.mean(data))
    half = Z_VALUES[level] * float(np.std(data, ddof=1)) / math.sqrt(len(data))
    return (mean - half, mean + half)


@dataclass(frozen=True, eq=False)
class ForecastResult:
    """Daily projection plus endpoint values and interval summaries."""

    region: str
    params: ModelParams
    dates: tuple[dt.date, ...]
    susceptible: np.ndarray
    active: np.ndarray
    recovered: np.ndarray
    endpoint_active: float
    endpoint_recovered: float
    active_ci95: tuple[float, float]
    active_ci99: tuple[float, float]
    recovered_ci95: tuple[float, float]
    recovered_ci99: tuple[float, float]

    def __post_init__(self) -> None:
        if not (
            self.active_ci99[0] <= self.active_ci95[0]
            and self.active_ci95[1] <= self.active_ci99[1]
        ):
            raise ValueError("active 99% interval must contain the 95% interval")
        if not (
            self.recovered_ci99[0] <= self.recovered_ci95[0]
            and self.recovered_ci95[1] <= self.recovered_ci99[1]
        ):
            raise ValueError("recovered 99% interval must contain the 95% interval")


def _seed_state(
    series: EpiSeries, population: float, day: int
) -> CompartmentState:
    infected = float(series.active[day])
    removed = float(series.removed[day])
    if infected <= 0:
        raise DataValidationError(
            f"{series.region}: no active cases on {series.dates[day]}; "
            "cannot seed the model"
        )
    susceptible = population - infected - removed
    if susceptible <= 0:
        raise DataValidationError(
            f"{series.region}: population {population} cannot accommodate "
            f"the observed state on {series.dates[day]}"
        )
    return CompartmentState(t=0.0, susceptible=susceptible, infected=infected,
                            removed=removed)


def _check_region(series: EpiSeries, region: RegionRecord,
                  params: ModelParams) -> None:
    if series.region != region.region:
        raise DataValidationError(
            f"series is for {series.region!r} but demographics are for "
            f"{region.region!r}"
        )
    if params.population != region.population:
        raise DataValidationError(
            f"params population {params.population} disagrees with the "
            f"{region.region} demographics population {region.population}"
        )


def forecast_region(
    series: EpiSeries,
    region: RegionRecord,
    params: ModelParams,
    end_date: dt.date,
    step_days: float = 0.1,
) -> ForecastResult:
    """Project a region forward from the last observed day to end_date."""
    _check_region(series, region, params)
    start = series.dates[-1]
    horizon = (end_date - start).days
    if horizon <= 0:
        raise ValueError(
            f"end_date {end_date} must fall after the last observed day {start}"
        )
    initial = _seed_state(series, float(region.population), day=len(series) - 1)
    trajectory = integrate(initial, params, horizon, step_days)
    dates = tuple(start + dt.timedelta(days=k) for k in range(horizon + 1))
    return ForecastResult(
        region=series.region,
        params=params,
        dates=dates,
        susceptible=trajectory.susceptible,
        active=trajectory.infected,
        recovered=trajectory.removed,
        endpoint_active=float(trajectory.infected[-1]),
        endpoint_recovered=float(trajectory.removed[-1]),
        active_ci95=confidence_interval(trajectory.infected, 95),
        active_ci99=confidence_interval(trajectory.infected, 99),
        recovered_ci95=confidence_interval(trajectory.removed, 95),
        recovered_ci99=confidence_interval(trajectory.removed, 99),
    )


@dataclass(frozen=True, eq=False)
class ValidationReport:
    """Observed-vs-predicted comparison over an observation window."""

    region: str
    dates: tuple[dt.date, ...]
    observed_active: np.ndarray
    predicted_active: np.ndarray
    observed_removed: np.ndarray
    predicted_removed: np.ndarray
    mae_active: float
    rmse_active: float
    mae_removed: float
    rmse_removed: float

    def __post_init__(self) -> None:
        for mae, rmse in (
            (self.mae_active, self.rmse_active),
            (self.mae_removed, self.rmse_removed),
        ):
            if not 0.0 <= mae <= rmse * (1.0 + 1e-12):
                raise ValueError(f"invalid error pair mae={mae}, rmse={rmse}")


def _error_pair(observed: np.ndarray, predicted: np.ndarray) -> tuple[float, float]:
    diff = predicted - observed
    return float(np.mean(np.abs(diff))), float(np.sqrt(np.mean(diff * diff)))


def validate(
    series: EpiSeries,
    region: RegionRecord,
    params: ModelParams,
    step_days: float = 0.1,
) -> ValidationReport:
    """Replay the window from its first observed state and score the fit."""
    _check_region(series, region, params)
    if len(series) < 2:
        raise DataValidationError(
            f"{series.region}: need at least 2 observed days, got {len(series)}"
        )
    initial = _seed_state(series, float(region.population), day=0)
    trajectory = integrate(initial, params, len(series) - 1, step_days)
    observed_active = np.asarray(series.active, dtype=float)
    observed_removed = np.asarray(series.removed, dtype=float)
    mae_active, rmse_active = _error_pair(observed_active, trajectory.infected)
    mae_removed, rmse_removed = _error_pair(observed_removed, trajectory.removed)
    return ValidationReport(
        region=series.region,
        dates=series.dates,
        observed_active=observed_active,
        predicted_active=trajectory.infected,
        observed_removed=observed_removed,
        predicted_removed=trajectory.removed,
        mae_active=mae_active,
        rmse_active=rmse_active,
        mae_removed=mae_removed,
        rmse_removed=rmse_removed,
    )


@dataclass(frozen=True)
class SweepPoint:
    """Outcome landmarks for one intervention level."""

    rho: float
    peak_infected: float
    peak_day: int
    die_out_day: int | None


def intervention_sweep(
    params: ModelParams,
    initial: CompartmentState,
    horizon_days: int,
    rho_values: Sequence[float],
    step_days: float = 0.1,
) -> list[SweepPoint]:
    """Integrate one scenario per rho and report peak and die-out landmarks.

    Points come back in the order the rho values were given. die_out_day is
    None when the infected count never falls below one inside the horizon.
    """
    rhos = list(rho_values)
    if not rhos:
        raise ValueError("rho_values must not be empty")
    for rho in rhos:
        if not (isinstance(rho, (int, float)) and 0.0 <= rho <= 1.0):
            raise ValueError(f"rho values must lie in [0, 1], got {rho!r}")
    points = []
    for rho in rhos:
        candidate = ModelParams(beta=params.beta, gamma=params.gamma,
                                population=params.population, rho=float(rho))
        trajectory = integrate(initial, candidate, horizon_days, step_days)
        peak, peak_day = peak_infected(trajectory)
        points.append(
            SweepPoint(rho=float(rho), peak_infected=peak, peak_day=peak_day,
                       die_out_day=die_out_day(trajectory))
        )
    return points
