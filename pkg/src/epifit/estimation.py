"""Parameter estimation: per-day transmission rates, their linear trend, and
grid calibration of the intervention level.

The per-day transmission rate inverts the classical infection balance for
one day pair: beta = (dI * 1/I(t) + gamma) * N/S(t), with susceptibles
depleted by cumulative confirmed cases. The day rates are then regressed
against the day index and the fitted line is read at the window midpoint.
The intervention level rho is fitted separately by exhaustive grid search
on the squared error between modelled and observed active cases.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .data import EpiSeries
from .errors import DataValidationError, NumericsError
from .model import CompartmentState, ModelParams, integrate


@dataclass(frozen=True)
class BetaSample:
    """Transmission rate extracted from one consecutive day pair.

    day_index is the offset of the pair's first day from the window start;
    skipped days leave gaps in the index rather than renumbering.
    """

    day_index: int
    beta: float


@dataclass(frozen=True)
class RegressionFit:
    """Least-squares line y = alpha0 + alpha1 * x."""

    alpha0: float
    alpha1: float
    residual_variance: float
    n_samples: int

    def __post_init__(self) -> None:
        if self.residual_variance < 0.0:
            raise ValueError("residual_variance must be non-negative")
        if self.n_samples < 2:
            raise ValueError("a line fit needs at least 2 samples")

    def value_at(self, x: float) -> float:
        return self.alpha0 + self.alpha1 * x


@dataclass(frozen=True)
class BetaEstimate:
    """Windowed transmission-rate estimate with its CV diagnostic."""

    beta_hat: float
    cv_error: float
    fit: RegressionFit


@dataclass(frozen=True)
class CalibrationResult:
    """Grid-search outcome: rho always lies on the search grid."""

    rho: float
    objective: float
    grid_step: float


def beta_samples(
    series: EpiSeries,
    gamma: float,
    population: float,
    susceptible_init: float,
) -> list[BetaSample]:
    """Extract one transmission-rate sample per consecutive day pair.

    S(t) depletes susceptible_init by the cumulative confirmed count:
    S(t) = susceptible_init - (confirmed(t) - confirmed(start)). Days with
    zero active cases are skipped with a RuntimeWarning since the inversion
    divides by I(t); negative samples (shrinking active counts) are
    legitimate outputs and are retained.
    """
    if len(series) < 2:
        raise DataValidationError(
            f"{series.region}: need at least 2 days to extract transmission "
            f"rates, got {len(series)}"
        )
    if not (isinstance(gamma, (int, float)) and math.isfinite(gamma)) or gamma <= 0:
        raise ValueError(f"gamma must be a positive finite number, got {gamma!r}")
    if population <= 0 or not math.isfinite(population):
        raise ValueError(f"population must be positive, got {population!r}")
    if not 0.0 < susceptible_init <= population:
        raise ValueError(
            f"susceptible_init must lie in (0, population], got {susceptible_init!r}"
        )

    samples: list[BetaSample] = []
    for t in range(len(series) - 1):
        infected = series.active[t]
        if infected == 0:
            warnings.warn(
                f"{series.region}: zero active cases on {series.dates[t]}, "
                "day pair skipped",
                RuntimeWarning,
                stacklevel=2,
            )
            continue
        susceptible = susceptible_init - (series.confirmed[t] - series.confirmed[0])
        if susceptible <= 0:
            raise DataValidationError(
                f"{series.region}: susceptible count depleted to "
                f"{susceptible} on {series.dates[t]}; population or "
                "susceptible_init is inconsistent with the case counts"
            )
        delta = series.active[t + 1] - infected
        beta = (delta / infected + gamma) * population / susceptible
        samples.append(BetaSample(day_index=t, beta=beta))
    if not samples:
        raise DataValidationError(
            f"{series.region}: no usable day pairs (all active counts zero)"
        )
    return samples


def fit_linear(points: Sequence[tuple[float, float]]) -> RegressionFit:
    """Ordinary least squares for y = alpha0 + alpha1 * x.

    Solved with centered normal equations: slope = Sxy/Sxx on mean-shifted
    coordinates. Centering keeps the arithmetic exact for exactly-collinear
    representable inputs, so a perfect line reports a residual_variance of
    literal zero, which callers rely on, instead of rounding dust; a generic
    least-squares solver does not achieve that.

    residual_variance is the residual sum of squares over (n - 2), the
    classic unbiased noise estimate, defined as 0 for n = 2.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("points must be a sequence of (x, y) pairs")
    if len(pts) < 2:
        raise DataValidationError(
            f"a line fit needs at least 2 samples, got {len(pts)}"
        )
    if not np.all(np.isfinite(pts)):
        raise ValueError("points contain non-finite values")
    xs = pts[:, 0]
    ys = pts[:, 1]
    if np.all(xs == xs[0]):
        raise NumericsError("all x values are identical; the fit is singular")

    x_mean = float(np.mean(xs))
    y_mean = float(np.mean(ys))
    dx = xs - x_mean
    dy = ys - y_mean
    alpha1 = float(dx @ dy) / float(dx @ dx)
    alpha0 = y_mean - alpha1 * x_mean
    residual = ys - (alpha0 + alpha1 * xs)
    rss = float(residual @ residual)
    n = len(pts)
    return RegressionFit(
        alpha0=alpha0,
        alpha1=alpha1,
        residual_variance=rss / (n - 2) if n > 2 else 0.0,
        n_samples=n,
    )


def cross_validated_beta(
    samples: Iterable[BetaSample], folds: int = 10
) -> BetaEstimate:
    """Fit the day-rate trend and score it by blocked cross-validation.

    Samples are sorted by day index and split into `folds` contiguous
    blocks; each block is predicted from a fit on the rest, and cv_error is
    the mean squared held-out error pooled over all samples. The final fit
    uses every sample, and beta_hat reads the fitted line at the midpoint of
    the observation window (halfway between the first and last day index).
    """
    ordered = sorted(samples, key=lambda s: s.day_index)
    n = len(ordered)
    if n < 2:
        raise DataValidationError(f"too few samples: need at least 2, got {n}")
    if not 2 <= folds <= n:
        raise DataValidationError(
            f"folds must lie in [2, {n}] for {n} samples, got {folds}"
        )
    xs = np.array([s.day_index for s in ordered], dtype=float)
    ys = np.array([s.beta for s in ordered], dtype=float)

    squared_errors = []
    for block in np.array_split(np.arange(n), folds):
        mask = np.ones(n, dtype=bool)
        mask[block] = False
        fit = fit_linear(list(zip(xs[mask], ys[mask])))
        predicted = fit.alpha0 + fit.alpha1 * xs[block]
        squared_errors.extend((ys[block] - predicted) ** 2)
    cv_error = float(np.mean(squared_errors))

    fit = fit_linear(list(zip(xs, ys)))
    midpoint = (xs[0] + xs[-1]) / 2.0
    return BetaEstimate(beta_hat=fit.value_at(midpoint), cv_error=cv_error, fit=fit)


def calibrate_rho(
    observed: EpiSeries,
    params: ModelParams,
    grid_step: float = 0.001,
    step_days: float = 0.1,
) -> CalibrationResult:
    """Exhaustive grid search for the intervention level.

    Integrates the model from the window's first observed state for every
    candidate rho in {0, grid_step, ..., 1} and scores the sum of squared
    differences between modelled and observed daily active cases. Ties
    resolve to the smaller rho. params supplies beta, gamma, and population;
    its own rho field is ignored.
    """
    if not (isinstance(grid_step, (int, float)) and 0.0 < grid_step <= 1.0):
        raise ValueError(f"grid_step must lie in (0, 1], got {grid_step!r}")
    if len(observed) < 2:
        raise DataValidationError(
            f"{observed.region}: need at least 2 observed days, got {len(observed)}"
        )
    infected0 = float(observed.active[0])
    removed0 = float(observed.removed[0])
    if infected0 <= 0:
        raise DataValidationError(
            f"{observed.region}: first day of the window has no active cases; "
            "cannot seed the model"
        )
    susceptible0 = params.population - infected0 - removed0
    if susceptible0 <= 0:
        raise DataValidationError(
            f"{observed.region}: population {params.population} cannot "
            "accommodate the first observed state"
        )

    n_steps = math.floor(1.0 / grid_step + 1e-9)
    grid = [min(k * grid_step, 1.0) for k in range(n_steps + 1)]
    if grid[-1] < 1.0 - 1e-12:
        grid.append(1.0)

    observed_active = np.asarray(observed.active, dtype=float)
    initial = CompartmentState(t=0.0, susceptible=susceptible0,
                               infected=infected0, removed=removed0)
    horizon = len(observed) - 1

    best_rho = math.nan
    best_sse = math.inf
    for rho in grid:
        candidate = ModelParams(beta=params.beta, gamma=params.gamma,
                                population=params.population, rho=rho)
        trajectory = integrate(initial, candidate, horizon, step_days)
        diff = trajectory.infected - observed_active
        sse = float(diff @ diff)
        if sse < best_sse:
            best_sse = sse
            best_rho = rho
    return CalibrationResult(rho=best_rho, objective=best_sse,
                             grid_step=float(grid_step))
