"""Core compartment model: derivatives, integration, trajectory invariants.

Expected values for the worked examples were derived by hand from the model
equations before the implementation was written, and are frozen here.
"""

import math

import numpy as np
import pytest

from epifit.errors import NumericsError
from epifit.model import (
    CompartmentState,
    ModelParams,
    basic_reproduction_number,
    derivatives_classical,
    derivatives_intervention,
    die_out_day,
    effective_reproduction_number,
    integrate,
    peak_infected,
)

GAMMA_14 = 1.0 / 14.0


def state(s, i, r, t=0.0):
    return CompartmentState(t=t, susceptible=s, infected=i, removed=r)


# ---------------------------------------------------------------------------
# derivatives


def test_classical_derivatives_worked_example():
    # S=800, I=100, N=1000, beta=0.2, gamma=1/14:
    #   flow = 0.2*800*100/1000 = 16, recovery = 100/14
    ds, di, dr = derivatives_classical(
        state(800.0, 100.0, 100.0), ModelParams(beta=0.2, gamma=GAMMA_14, population=1000.0)
    )
    assert ds == pytest.approx(-16.0, abs=1e-12)
    assert di == pytest.approx(8.857142857142858, abs=1e-12)
    assert dr == pytest.approx(7.142857142857143, abs=1e-12)


def test_intervention_derivatives_worked_example():
    # Same state with rho=0.5 halves the infection flow only.
    ds, di, dr = derivatives_intervention(
        state(800.0, 100.0, 100.0),
        ModelParams(beta=0.2, gamma=GAMMA_14, population=1000.0, rho=0.5),
    )
    assert ds == pytest.approx(-8.0, abs=1e-12)
    assert di == pytest.approx(0.857142857142857, abs=1e-12)
    assert dr == pytest.approx(7.142857142857143, abs=1e-12)


def test_intervention_with_rho_zero_matches_classical_bitwise():
    rng = np.random.default_rng(7)
    for _ in range(50):
        s, i, r = rng.uniform(0.0, 1e6, size=3)
        p_cls = ModelParams(beta=rng.uniform(0, 1.5), gamma=rng.uniform(0.01, 1.0),
                            population=s + i + r + 1.0)
        p_int = ModelParams(beta=p_cls.beta, gamma=p_cls.gamma,
                            population=p_cls.population, rho=0.0)
        st = state(s, i, r)
        assert derivatives_intervention(st, p_int) == derivatives_classical(st, p_cls)


def test_full_intervention_stops_infection_flow():
    p = ModelParams(beta=0.9, gamma=GAMMA_14, population=1000.0, rho=1.0)
    ds, di, dr = derivatives_intervention(state(800.0, 100.0, 100.0), p)
    assert ds == 0.0
    assert di == -dr
    assert dr == pytest.approx(100.0 * GAMMA_14, abs=1e-12)


def test_derivatives_sum_to_zero():
    rng = np.random.default_rng(11)
    for _ in range(200):
        s, i, r = rng.uniform(0.0, 1e7, size=3)
        p = ModelParams(beta=rng.uniform(0, 2.0), gamma=rng.uniform(0.01, 1.0),
                        population=s + i + r + 1.0, rho=rng.uniform(0, 1))
        ds, di, dr = derivatives_intervention(state(s, i, r), p)
        scale = max(abs(ds), abs(di), abs(dr), 1.0)
        assert abs(ds + di + dr) <= 1e-12 * scale


def test_derivatives_reject_nonfinite_state():
    p = ModelParams(beta=0.2, gamma=GAMMA_14, population=1000.0)
    with pytest.raises(ValueError):
        derivatives_classical(state(math.nan, 1.0, 0.0), p)
    with pytest.raises(ValueError):
        derivatives_intervention(state(1.0, math.inf, 0.0), p)


# ---------------------------------------------------------------------------
# parameter validation


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(beta=-0.1, gamma=GAMMA_14, population=1000.0),
        dict(beta=0.2, gamma=0.0, population=1000.0),
        dict(beta=0.2, gamma=-1.0, population=1000.0),
        dict(beta=0.2, gamma=GAMMA_14, population=0.0),
        dict(beta=0.2, gamma=GAMMA_14, population=-5.0),
        dict(beta=0.2, gamma=GAMMA_14, population=1000.0, rho=-0.01),
        dict(beta=0.2, gamma=GAMMA_14, population=1000.0, rho=1.01),
        dict(beta=math.nan, gamma=GAMMA_14, population=1000.0),
    ],
)
def test_model_params_rejects_bad_values(kwargs):
    with pytest.raises(ValueError):
        ModelParams(**kwargs)


def test_reproduction_numbers():
    p = ModelParams(beta=0.2, gamma=GAMMA_14, population=1000.0, rho=0.5)
    assert basic_reproduction_number(p) == pytest.approx(2.8, rel=1e-12)
    assert effective_reproduction_number(p) == pytest.approx(1.4, rel=1e-12)


# ---------------------------------------------------------------------------
# integration


def small_town_scenario(rho=0.0):
    params = ModelParams(beta=0.2, gamma=GAMMA_14, population=1000.0, rho=rho)
    initial = state(995.0, 5.0, 0.0)
    return initial, params


def test_integrate_returns_daily_samples_including_initial():
    initial, params = small_town_scenario()
    traj = integrate(initial, params, horizon_days=10)
    assert len(traj) == 11
    assert traj.t[0] == 0.0 and traj.t[-1] == 10.0
    assert traj.susceptible[0] == 995.0
    assert traj.infected[0] == 5.0
    assert traj.removed[0] == 0.0
    st = traj.states[3]
    assert st.t == 3.0
    assert st.susceptible == traj.susceptible[3]


def test_integrate_conserves_population_long_run():
    initial, params = small_town_scenario()
    traj = integrate(initial, params, horizon_days=300, step_days=0.1)
    total = traj.susceptible + traj.infected + traj.removed
    assert np.max(np.abs(total - 1000.0)) <= 1e-6


def test_full_intervention_gives_pure_exponential_decay():
    # With rho=1 the model reduces to dI/dt = -gamma*I, solved by
    # I0*exp(-gamma*t); the integrator must match the closed form.
    initial, params = small_town_scenario(rho=1.0)
    traj = integrate(initial, params, horizon_days=60)
    expected = 5.0 * np.exp(-GAMMA_14 * traj.t)
    assert np.max(np.abs(traj.infected - expected) / expected) < 1e-6
    assert np.all(traj.susceptible == 995.0)


def test_step_refinement_converges():
    initial, params = small_town_scenario()
    coarse = integrate(initial, params, horizon_days=120, step_days=0.1)
    fine = integrate(initial, params, horizon_days=120, step_days=0.05)
    rel = np.abs(coarse.infected - fine.infected) / np.maximum(fine.infected, 1e-30)
    assert np.max(rel) < 1e-3


def test_increasing_rho_never_increases_cumulative_infections():
    initial, params = small_town_scenario()
    prev = None
    for rho in (0.0, 0.25, 0.5, 0.75, 1.0):
        p = ModelParams(beta=0.2, gamma=GAMMA_14, population=1000.0, rho=rho)
        cumulative = 1000.0 - integrate(initial, p, horizon_days=150).susceptible
        if prev is not None:
            assert np.all(cumulative <= prev + 1e-9)
        prev = cumulative


def test_conservation_randomized_instances():
    rng = np.random.default_rng(2026)
    for _ in range(200):
        n = rng.uniform(1e2, 1e9)
        i0 = n * rng.uniform(1e-6, 0.2)
        r0 = n * rng.uniform(0.0, 0.2)
        s0 = n - i0 - r0
        p = ModelParams(beta=rng.uniform(0.0, 1.5), gamma=rng.uniform(0.02, 1.0),
                        population=n, rho=rng.uniform(0.0, 1.0))
        traj = integrate(state(s0, i0, r0), p, horizon_days=int(rng.integers(10, 60)),
                         step_days=float(rng.uniform(0.05, 0.5)))
        total = traj.susceptible + traj.infected + traj.removed
        assert np.max(np.abs(total - n)) <= 1e-9 * n


def test_integrate_rejects_bad_horizon_and_step():
    initial, params = small_town_scenario()
    with pytest.raises(ValueError):
        integrate(initial, params, horizon_days=0)
    with pytest.raises(ValueError):
        integrate(initial, params, horizon_days=-3)
    with pytest.raises(ValueError):
        integrate(initial, params, horizon_days=10, step_days=0.0)
    with pytest.raises(ValueError):
        integrate(initial, params, horizon_days=10, step_days=-0.1)


def test_integrate_rejects_unbalanced_initial_state():
    _, params = small_town_scenario()
    with pytest.raises(ValueError):
        integrate(state(900.0, 5.0, 0.0), params, horizon_days=10)


def test_integrate_clamps_tiny_negative_initial_value():
    _, params = small_town_scenario()
    traj = integrate(state(995.0 + 5e-7, 5.0, -5e-7), params, horizon_days=5)
    assert traj.removed[0] == 0.0


def test_integrate_rejects_large_negative_initial_value():
    _, params = small_town_scenario()
    with pytest.raises(ValueError):
        integrate(state(1000.0 + 2.0, -2.0, 0.0), params, horizon_days=5)


def test_integrate_flags_numerical_blow_up():
    # An absurd step on a stiff configuration must fail loudly, not return
    # garbage.
    p = ModelParams(beta=80.0, gamma=60.0, population=1000.0)
    with pytest.raises(NumericsError):
        integrate(state(5.0, 990.0, 5.0), p, horizon_days=400, step_days=1.0)


def test_trajectory_arrays_are_read_only():
    initial, params = small_town_scenario()
    traj = integrate(initial, params, horizon_days=5)
    with pytest.raises(ValueError):
        traj.infected[0] = 7.0


# ---------------------------------------------------------------------------
# peak / die-out helpers


def test_peak_and_die_out_on_small_town_scenario():
    initial, params = small_town_scenario()
    traj = integrate(initial, params, horizon_days=200)
    peak, day = peak_infected(traj)
    assert 275.0 < peak <= 285.0
    assert 45 <= day <= 51
    out = die_out_day(traj)
    assert out is not None and out > day


def test_peak_picks_first_day_attaining_max():
    initial, params = small_town_scenario(rho=1.0)
    traj = integrate(initial, params, horizon_days=30)
    peak, day = peak_infected(traj)
    assert peak == 5.0
    assert day == 0


def test_die_out_none_when_never_below_threshold():
    initial, params = small_town_scenario()
    traj = integrate(initial, params, horizon_days=30)
    assert die_out_day(traj) is None
