import math

import numpy as np
import pytest

from fano_forge import get_preset, registry
from fano_forge.errors import IntegrationError
from fano_forge.params import OMEGA, derive_couplings
from fano_forge.response import exact_sidebands
from fano_forge.steady_state import solve_steady_state
from fano_forge.sweep import params_digest
from fano_forge.timedomain import (DEFAULT_RTOL, MIN_DECAY_TIMES, demodulate, integrate_fluctuations,
                                   integration_schedule, project, timedomain_point,
                                   timedomain_sidebands, worker_count)


def _setup(p):
    d = derive_couplings(p)
    return p, d, solve_steady_state(p, d)


def _distinct_presets():
    seen, out = set(), []
    for pr in registry().values():
        key = params_digest(pr.params)
        if key not in seen:
            seen.add(key)
            out.append(pr)
    return out


def test_zero_input_zero_output():
    pr = get_preset("fig3a_black")
    p = pr.params.with_(P_probe=1e-300)
    p, d, ss = _setup(p)
    d = type(d)(**{**vars(d), "eps_pr": 0.0})
    traj = integrate_fluctuations(ss, p, d, 1.3 * OMEGA, record_from=0.0)
    for x in (traj.da, traj.dQ1, traj.dP1, traj.dQ2, traj.dP2):
        assert not np.any(x)


def test_uncoupled_cavity_is_lorentzian():
    p, d, ss = _setup(get_preset("bare").params)
    delta = 1.25 * OMEGA
    exact = d.eps_pr / (p.kappa + 1j * (ss.Delta_eff - delta))
    # the default schedule targets 1e-7; tighten it for this analytic check
    sol, res = timedomain_point(ss, p, d, delta, rtol=1e-9)
    assert abs(sol.a1_minus - exact) / abs(exact) < 1e-8
    assert res.converged


def test_projection_picks_single_tone():
    n = 4000
    t = np.arange(n + 1) * (2 * math.pi / 1000)
    x = (2 - 1j) * np.exp(-1j * t) + 5 * np.exp(1j * t) + 3 * np.exp(-2j * t)
    assert abs(project(t, x, 1.0, 1000) - (2 - 1j)) < 1e-12
    assert abs(project(t, x, -1.0, 1000) - 5) < 1e-12


def test_schedule_divides_the_period():
    p, d, ss = _setup(get_preset("fig3a_blue").params)
    for x in (-0.7, 0.0, 0.4):
        delta = x * OMEGA + p.Delta_c
        s = integration_schedule(ss, p, d, delta)
        assert s.steps_per_period >= 50
        assert s.dt * s.steps_per_period == pytest.approx(2 * math.pi / delta, rel=1e-15)
        assert s.t_end >= MIN_DECAY_TIMES / p.gamma1


def test_resonant_points_run_longer():
    p, d, ss = _setup(get_preset("fig3a_blue").params)
    far = integration_schedule(ss, p, d, 1.5 * OMEGA)
    near = integration_schedule(ss, p, d, OMEGA)
    assert near.t_cut > far.t_cut and near.dt < far.dt


def test_preconditions_enforced():
    p, d, ss = _setup(get_preset("fig3a_blue").params)
    with pytest.raises(ValueError, match="steps per"):
        integrate_fluctuations(ss, p, d, OMEGA, dt=1e-8)
    with pytest.raises(ValueError, match="transient"):
        integrate_fluctuations(ss, p, d, OMEGA, t_end=1e-5)


def test_non_finite_state_raises():
    pr = get_preset("fig3a_blue")
    p, d, ss = _setup(pr.params)
    d = type(d)(**{**vars(d), "eps_pr": math.inf})
    with pytest.raises(IntegrationError):
        integrate_fluctuations(ss, p, d, 0.9 * OMEGA)


def test_step_halving_is_fourth_order():
    p, d, ss = _setup(get_preset("fig4c").params)
    delta = 1.0005 * OMEGA
    exact = exact_sidebands(ss, p, d, delta).a1_minus
    errs = []
    t_end = 40 / p.gamma1
    for spp in (80, 160):
        dt = 2 * math.pi / delta / spp
        traj = integrate_fluctuations(ss, p, d, delta, dt=dt, t_end=t_end, record_from=0.8 * t_end)
        est = demodulate(traj, window_periods=200).a1_minus_est
        errs.append(abs(est - exact) / abs(exact))
    ratio = errs[0] / errs[1]
    assert 12 < ratio < 20, (errs, ratio)


def test_linear_in_all_inputs_jointly():
    p, d, ss = _setup(get_preset("fig6_blue").params)
    delta = 1.3 * OMEGA
    DC = type(d)
    a = integrate_fluctuations(ss, p, d, delta)
    scaled = DC(**{**vars(d), "eps_pr": 3 * d.eps_pr, "Sprime_m1": 3 * d.Sprime_m1,
                   "Sprime_m2": 3 * d.Sprime_m2})
    b = integrate_fluctuations(ss, p, scaled, delta)
    np.testing.assert_allclose(b.da, 3 * a.da, rtol=1e-12, atol=1e-12 * np.abs(a.da).max())
    np.testing.assert_allclose(b.dQ2, 3 * a.dQ2, rtol=1e-12, atol=1e-12 * np.abs(a.dQ2).max())


def test_deterministic():
    p, d, ss = _setup(get_preset("fig7").params)
    a = timedomain_point(ss, p, d, 1.2 * OMEGA)[0]
    b = timedomain_point(ss, p, d, 1.2 * OMEGA)[0]
    assert a == b


def test_zero_detuning_returns_merged_sidebands():
    p, d, ss = _setup(get_preset("fig3a_red").params)
    sol, _ = timedomain_point(ss, p, d, 0.0)
    ex = exact_sidebands(ss, p, d, 0.0)
    merged = ex.a1_minus + ex.a1_plus
    assert abs(sol.a1_minus - merged) / abs(merged) < 1e-6
    assert sol.a1_plus == 0


def test_mechanical_amplitudes_follow_closed_form():
    p, d, ss = _setup(get_preset("fig7").params)
    delta = 0.75 * OMEGA
    sol, _ = timedomain_point(ss, p, d, delta)
    ex = exact_sidebands(ss, p, d, delta)
    for got, ref in ((sol.Q1_minus, ex.Q1_minus), (sol.Q2_minus, ex.Q2_minus), (sol.a1_plus, ex.a1_plus)):
        assert abs(got - ref) / abs(ref) < 1e-6


@pytest.mark.parametrize("preset", _distinct_presets(), ids=lambda pr: pr.name)
def test_random_detunings_agree_with_closed_form(preset):
    p, d, ss = _setup(preset.params)
    rng = np.random.default_rng(int(params_digest(p)[:8], 16))
    x = rng.uniform(-1.0, 1.0, 20)
    deltas = x * preset.grid.Omega + p.Delta_c
    td, results = timedomain_sidebands(ss, p, d, deltas)
    ex = exact_sidebands(ss, p, d, deltas).a1_minus
    err = np.abs(td.a1_minus - ex) / np.abs(ex)
    assert err.max() < 1e-6, (x[np.argmax(err)], err.max())
    assert all(r.converged for r in results)


def test_thread_count_env(monkeypatch):
    monkeypatch.setenv("FANO_FORGE_THREADS", "3")
    assert worker_count() == 3
    monkeypatch.setenv("FANO_FORGE_THREADS", "0")
    assert worker_count() >= 1
    monkeypatch.setenv("FANO_FORGE_THREADS", "-2")
    with pytest.raises(ValueError):
        worker_count()


def test_threaded_matches_serial():
    p, d, ss = _setup(get_preset("fig5a").params)
    deltas = np.array([0.8, 1.1, 1.2, 1.5]) * OMEGA
    a, _ = timedomain_sidebands(ss, p, d, deltas, threads=1)
    b, _ = timedomain_sidebands(ss, p, d, deltas, threads=3)
    np.testing.assert_array_equal(a.a1_minus, b.a1_minus)


def test_default_tolerance_contract():
    assert DEFAULT_RTOL <= 1e-6
