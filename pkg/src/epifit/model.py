"""Compartment model: susceptible / infected / removed with an intervention
factor that scales transmission down by (1 - rho).

All trajectories are produced by a fixed-step RK4 integrator and sampled at
whole days. The integrator itself lives in a backend kernel (compiled when
available, pure Python otherwise); this module owns validation, the public
types, and the daily-sample contract.
"""

from __future__ import annotations

import math
import operator
from dataclasses import dataclass

import numpy as np

from ._backend import run_sir
from .errors import NumericsError

# Relative slack, in units of the population size, granted to conservation
# checks and to the negative-compartment clamp.
GUARD_BAND = 1e-9

# An outbreak is considered over once fewer than one person is infected.
DIE_OUT_THRESHOLD = 1.0


@dataclass(frozen=True)
class ModelParams:
    """Model parameters.

    beta is the transmission rate per day, gamma the recovery rate per day
    (reciprocal of the mean infectious period), rho the intervention level
    in [0, 1] (0 none, 1 total), population the fixed total N.
    """

    beta: float
    gamma: float
    population: float
    rho: float = 0.0

    def __post_init__(self) -> None:
        for name in ("beta", "gamma", "population", "rho"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or not math.isfinite(value):
                raise ValueError(f"{name} must be a finite number, got {value!r}")
        if self.beta < 0.0:
            raise ValueError(f"beta must be non-negative, got {self.beta}")
        if self.gamma <= 0.0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if self.population <= 0.0:
            raise ValueError(f"population must be positive, got {self.population}")
        if not 0.0 <= self.rho <= 1.0:
            raise ValueError(f"rho must lie in [0, 1], got {self.rho}")


@dataclass(frozen=True)
class CompartmentState:
    """Model state at time t (days): susceptible, infected, removed counts."""

    t: float
    susceptible: float
    infected: float
    removed: float


def basic_reproduction_number(params: ModelParams) -> float:
    """beta / gamma, ignoring any intervention."""
    return params.beta / params.gamma

def effective_reproduction_number(params: ModelParams) -> float:
    """(1 - rho) * beta / gamma: the reproduction number under intervention."""
    return (1.0 - params.rho) * params.beta / params.gamma


def _check_finite_state(state: CompartmentState) -> None:
    if not (
        math.isfinite(state.susceptible)
        and math.isfinite(state.infected)
        and math.isfinite(state.removed)
    ):
        raise ValueError(f"state has non-finite compartments: {state}")


def derivatives_classical(
    state: CompartmentState, params: ModelParams
) -> tuple[float, float, float]:
    """Right-hand side of the classical model, as (dS, dI, dR) per day.

    Infection flow beta*S*I/N leaves S and enters I; recovery gamma*I moves
    I to R. The three components sum to zero up to rounding. rho is ignored.
    """
    _check_finite_state(state)
    flow = params.beta * state.susceptible * state.infected / params.population
    recovery = params.gamma * state.infected
    return (-flow, flow - recovery, recovery)


def derivatives_intervention(
    state: CompartmentState, params: ModelParams
) -> tuple[float, float, float]:
    """Right-hand side with transmission scaled by (1 - rho).

    rho=0 reproduces derivatives_classical bitwise; rho=1 shuts off the
    infection flow entirely so S is frozen and I decays at rate gamma.
    """
    _check_finite_state(state)
    flow = (
        (1.0 - params.rho)
        * params.beta
        * state.susceptible
        * state.infected
        / params.population
    )
    recovery = params.gamma * state.infected
    return (-flow, flow - recovery, recovery)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Daily-sampled model run: arrays t, susceptible, infected, removed.

    Sample k corresponds to t[0] + k days; the initial state is sample 0.
    """

    params: ModelParams
    t: np.ndarray
    susceptible: np.ndarray
    infected: np.ndarray
    removed: np.ndarray

    def __len__(self) -> int:
        return len(self.t)

    def state_at(self, index: int) -> CompartmentState:
        return CompartmentState(
            t=float(self.t[index]),
            susceptible=float(self.susceptible[index]),
            infected=float(self.infected[index]),
            removed=float(self.removed[index]),
        )

    @property
    def states(self) -> tuple[CompartmentState, ...]:
        return tuple(self.state_at(k) for k in range(len(self)))


def _substeps_per_day(step_days: float) -> int:
    if not isinstance(step_days, (int, float)) or not math.isfinite(step_days):
        raise ValueError(f"step_days must be a finite number, got {step_days!r}")
    if step_days <= 0.0:
        raise ValueError(f"step_days must be positive, got {step_days}")
    # The effective step is 1/n for the smallest n with 1/n <= step_days, so
    # samples land exactly on day boundaries without interpolation.
    return max(1, math.ceil(1.0 / step_days - 1e-9))


def integrate(
    initial: CompartmentState,
    params: ModelParams,
    horizon_days: int,
    step_days: float = 0.1,
) -> Trajectory:
    """Run the intervention model forward and sample it at whole days.

    Returns a Trajectory of horizon_days + 1 samples starting with the
    initial state. The initial compartments must be non-negative (values
    within -1e-9*N of zero are clamped to zero) and sum to the population
    within the same band. Raises NumericsError if the state leaves the
    valid range during integration.
    """
    try:
        horizon = operator.index(horizon_days)
    except TypeError:
        raise ValueError(
            f"horizon_days must be a positive integer, got {horizon_days!r}"
        ) from None
    if horizon <= 0:
        raise ValueError(f"horizon_days must be a positive integer, got {horizon}")
    n_sub = _substeps_per_day(step_days)

    _check_finite_state(initial)
    n = params.population
    tol = GUARD_BAND * n
    comps = {
        "susceptible": initial.susceptible,
        "infected": initial.infected,
        "removed": initial.removed,
    }
    for name, value in comps.items():
        if value < -tol:
            raise ValueError(
                f"initial {name} is negative beyond the guard band: {value}"
            )
        if value < 0.0:
            comps[name] = 0.0
    if abs(sum(comps.values()) - n) > tol:
        raise ValueError(
            "initial state does not conserve the population: "
            f"{sum(comps.values())!r} vs {n!r}"
        )

    out_s = np.empty(horizon + 1)
    out_i = np.empty(horizon + 1)
    out_r = np.empty(horizon + 1)
    status = run_sir(
        comps["susceptible"],
        comps["infected"],
        comps["removed"],
        params.beta,
        params.gamma,
        params.rho,
        n,
        horizon,
        n_sub,
        tol,
        out_s,
        out_i,
        out_r,
    )
    if status >= 0:
        raise NumericsError(
            f"integration failed near day {status}: a compartment left the "
            "valid range (reduce step_days or check the parameters)"
        )
    total = out_s + out_i + out_r
    if np.max(np.abs(total - n)) > tol:
        raise NumericsError("integration drifted off the conservation constraint")

    t = initial.t + np.arange(horizon + 1, dtype=float)
    for arr in (t, out_s, out_i, out_r):
        arr.setflags(write=False)
    return Trajectory(params=params, t=t, susceptible=out_s, infected=out_i,
                      removed=out_r)


def peak_infected(trajectory: Trajectory) -> tuple[float, int]:
    """Peak of the daily infected samples.

    Returns (value, day) where day counts days since the trajectory start;
    the first sample attaining the maximum wins.
    """
    index = int(np.argmax(trajectory.infected))
    return float(trajectory.infected[index]), index


def die_out_day(
    trajectory: Trajectory, threshold: float = DIE_OUT_THRESHOLD
) -> int | None:
    """First day (since trajectory start) with fewer infected than threshold.

    Returns None if the trajectory never falls below the threshold.
    """
    below = np.nonzero(trajectory.infected < threshold)[0]
    if below.size == 0:
        return None
    return int(below[0])
