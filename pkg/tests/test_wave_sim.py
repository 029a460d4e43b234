import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wavelife.profiles import BumpProfile, DipoleProfile, free_wave_1d, free_wave_radial2, free_wave_radial3_v
from wavelife.wave_sim import (
    InconclusiveLifespan,
    ProblemSpec,
    crossing_time,
    detect_lifespan,
    discrete_energy,
    evolve,
    is_blowup_history,
    ode_blowup_oracle,
    simulate,
    simulate_ode,
)

BUMP4 = BumpProfile(1.0, 1.0, 4.0)


def _linear_error(n, dx, t=2.0, profile=BUMP4):
    spec = ProblemSpec(n=n, p=2.0, eps=1.0, g_profile=profile, dx=dx, t_max=t, linear=True)
    state = evolve(spec, t)
    if n == 1:
        exact = free_wave_1d(profile, state.x, state.t)
    elif n == 3:
        exact = free_wave_radial3_v(profile, state.x, state.t)
    else:
        exact = free_wave_radial2(profile, state.x, state.t)
    return float(np.max(np.abs(state.u - exact)))


@pytest.mark.parametrize("n", [1, 2, 3])
def test_linear_mode_second_order(n):
    errors = [_linear_error(n, dx) for dx in (0.1, 0.05, 0.025)]
    orders = [math.log2(a / b) for a, b in zip(errors, errors[1:])]
    assert all(abs(o - 2.0) <= 0.2 for o in orders), orders


@pytest.mark.parametrize("n", [1, 2, 3])
def test_zero_data_stays_zero(n):
    rec = simulate(ProblemSpec(n=n, p=2.0, eps=0.0, dx=0.1, t_max=5.0))
    assert not rec.blew_up and rec.status == "no_blowup"
    assert all(a == 0.0 for _, a in rec.trace)


@pytest.mark.parametrize("t_end", [1.0, 3.0, 6.0])
@pytest.mark.parametrize("dx", [0.1, 0.05])
def test_finite_propagation(t_end, dx):
    spec = ProblemSpec(n=1, p=2.0, eps=0.1, dx=dx, t_max=10.0)
    state = evolve(spec, t_end)
    steps = round(state.t / state.dt)
    R = spec.g_profile.support_radius
    ax = np.abs(state.x)
    # the stencil reaches one cell per step: exact zeros beyond that cone
    assert np.all(state.u[ax > R + steps * dx + 1e-9] == 0.0)
    # between the physical cone plus the buffer and the stencil cone only round-off-sized tails remain
    tail = np.abs(state.u[ax > R + state.t + spec.buffer_cells * dx])
    assert tail.size == 0 or tail.max() < 1e-12 * np.abs(state.u).max()


def test_linear_energy_drift_second_order():
    drifts = []
    for dx in (0.1, 0.05, 0.025):
        spec = ProblemSpec(n=1, p=2.0, eps=1.0, dx=dx, t_max=10.0, linear=True)
        e0 = discrete_energy(evolve(spec, 2 * spec.dt))
        e1 = discrete_energy(evolve(spec, 10.0))
        drifts.append(abs(e1 - e0) / e0)
    assert drifts[0] < 5e-3
    assert all(0.15 < b / a < 0.35 for a, b in zip(drifts, drifts[1:]))


def test_nonlinear_dominates_free_solution():
    spec = ProblemSpec(n=1, p=2.0, eps=0.2, dx=0.05, t_max=10.0)
    rec = simulate(spec)
    x = np.arange(-12.0, 12.0, 0.01)
    for t, amp in rec.trace:
        if t >= rec.T_h - 0.5:
            break
        free = spec.eps * np.max(np.abs(free_wave_1d(spec.g_profile, x, t)))
        assert amp >= 0.95 * free


def test_blowup_time_decreases_with_eps():
    T = [simulate(ProblemSpec(n=1, p=2.0, eps=e, dx=0.05)).T_h for e in (0.4, 0.2, 0.1)]
    assert T[0] < T[1] < T[2]


def test_radial3_anchor_blows_up():
    rec = simulate(ProblemSpec(n=3, p=2.0, eps=0.5, dx=0.1, t_max=200.0))
    assert rec.blew_up and rec.T_h < 200.0


def test_ode_mode_matches_exact_solution():
    rec = simulate_ode(2.0, 6.0, 12.0)
    assert rec.blew_up
    assert rec.T_h == pytest.approx(1.0, rel=0.02)
    assert ode_blowup_oracle(2.0, 6.0, 12.0) == pytest.approx(1.0, rel=1e-9)


@settings(max_examples=30)
@given(st.floats(1.2, 4.0), st.floats(0.5, 5.0), st.floats(0.0, 5.0), st.floats(0.2, 5.0))
def test_ode_oracle_scaling(p, y0, y1, lam):
    base = ode_blowup_oracle(p, y0, y1)
    scaled = ode_blowup_oracle(p, lam ** (2 / (p - 1)) * y0, lam ** ((p + 1) / (p - 1)) * y1)
    assert scaled == pytest.approx(base / lam, rel=1e-7)


@settings(max_examples=30)
@given(st.floats(1.2, 4.0), st.floats(0.5, 5.0), st.floats(0.0, 5.0), st.floats(1.01, 3.0))
def test_ode_oracle_comparison(p, y0, y1, factor):
    assert ode_blowup_oracle(p, factor * y0, y1) < ode_blowup_oracle(p, y0, y1)


def test_ode_mode_close_to_oracle_general():
    rec = simulate_ode(3.0, 1.0, 0.5, dt=1e-3)
    assert rec.T_h == pytest.approx(ode_blowup_oracle(3.0, 1.0, 0.5), rel=0.02)


def test_cap_insensitivity():
    estimates = {}
    for cap in (1e8, 1e10):
        runs = [simulate(ProblemSpec(n=1, p=2.0, eps=0.2, dx=0.1, cap=cap).refined(level)) for level in (0, 1)]
        estimates[cap] = detect_lifespan(*runs)
    assert abs(estimates[1e8].T - estimates[1e10].T) < estimates[1e10].uncertainty


def test_crossing_time_from_trace_is_monotone_in_cap():
    rec = simulate(ProblemSpec(n=1, p=2.0, eps=0.2, dx=0.1))
    times = [crossing_time(rec, c) for c in (1e4, 1e6, 1e8)]
    assert times[0] < times[1] < times[2] <= rec.T_h


def test_lifespan_converges_under_refinement():
    base = ProblemSpec(n=1, p=2.0, eps=0.2, dx=0.1)
    T = [simulate(base.refined(level)).T_h for level in range(3)]
    assert abs(T[1] - T[2]) < abs(T[0] - T[1])


def test_detect_lifespan_inconclusive_without_blowup():
    spec = ProblemSpec(n=1, p=2.0, eps=0.2, dx=0.1, t_max=2.0)
    runs = [simulate(spec.refined(level)) for level in (0, 1)]
    with pytest.raises(InconclusiveLifespan):
        detect_lifespan(*runs)


def test_blowup_history_classifier():
    assert is_blowup_history([1.0, 2.0, 5.0, 40.0])
    assert is_blowup_history([-1.0, -3.0, -9.0])
    assert not is_blowup_history([1.0, -2.0, 4.0, -8.0])
    assert not is_blowup_history([1.0, 3.0, 2.0, 9.0])
    assert not is_blowup_history([1.0, math.inf])


def test_dipole_run_is_flagged_outside_hypotheses():
    spec = ProblemSpec(n=1, p=2.0, eps=1.0, g_profile=DipoleProfile(), dx=0.1, t_max=5.0)
    assert not spec.within_hypotheses
    rec = simulate(spec)
    assert rec.diagnostics["within_hypotheses"] is False


def test_spec_validation():
    with pytest.raises(ValueError):
        ProblemSpec(n=4, p=2.0, eps=1.0)
    with pytest.raises(ValueError):
        ProblemSpec(n=1, p=1.0, eps=1.0)
    with pytest.raises(ValueError):
        ProblemSpec(n=1, p=2.0, eps=1.0, courant=1.5)
    with pytest.raises(ValueError):
        ProblemSpec(n=3, p=2.0, eps=1.0, g_profile=DipoleProfile())


def test_spec_round_trip():
    spec = ProblemSpec(n=3, p=2.5, eps=0.3, g_profile=BumpProfile(2.0, 1.5, 3.0), dx=0.07)
    assert ProblemSpec.from_dict(spec.to_dict()) == spec
