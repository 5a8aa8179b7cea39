import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fano_forge.errors import ConvergenceError
from fano_forge.params import OMEGA, derive_couplings, paper_params
from fano_forge.steady_state import detuning_shift, solve_steady_state


def _solve(**kw):
    p = paper_params(P_probe=1e-39, **kw)
    d = derive_couplings(p)
    return p, d, solve_steady_state(p, d)


def test_matches_high_precision_reference(golden, fig3a):
    ref = golden["steady_fig3a_blue"]
    d = derive_couplings(fig3a.params)
    ss = solve_steady_state(fig3a.params, d)
    assert ss.Delta_eff == pytest.approx(float(ref["Delta_eff"]), rel=1e-15)
    assert ss.a_s.real == pytest.approx(float(ref["a_s"][0]), rel=1e-13)
    assert ss.a_s.imag == pytest.approx(float(ref["a_s"][1]), rel=1e-13)
    assert ss.Q1s == pytest.approx(float(ref["Q1s"]), rel=1e-13)


def test_residual_and_weak_shift():
    p, d, ss = _solve()
    assert ss.residual < 1e-12
    assert abs(ss.Delta_eff - p.Delta_c) / p.Delta_c < 1e-6
    assert ss.Q1s == pytest.approx(d.G1 * ss.intensity / p.omega_m1, rel=1e-15)


def test_reconverges_quickly_from_solution():
    p, d, ss = _solve()
    again = solve_steady_state(p, d, initial=ss.Delta_eff)
    assert again.iterations <= 2
    assert again.Delta_eff == pytest.approx(ss.Delta_eff, rel=1e-15)


def test_resonant_pump_allowed():
    p, d, ss = _solve(Delta_c=0.0)
    assert math.isfinite(ss.Delta_eff) and ss.residual < 1e-12


def test_strong_coupling_converges():
    p, d, ss = _solve(coupling_scale=3e3, P_pump=1e-3)
    assert ss.residual < 1e-12
    assert ss.Delta_eff < p.Delta_c


def test_pinning_hits_target_exactly():
    p = paper_params(P_probe=1e-39, coupling_scale=1e3, pin_effective_detuning=True)
    d = derive_couplings(p)
    ss = solve_steady_state(p, d)
    assert ss.Delta_eff == OMEGA
    assert ss.Delta_c == pytest.approx(OMEGA + detuning_shift(OMEGA, p, d), rel=1e-15)
    assert ss.residual < 1e-12


def test_non_convergence_raises():
    p = paper_params(P_probe=1e-39, coupling_scale=3e3, P_pump=1e-3)
    with pytest.raises(ConvergenceError):
        solve_steady_state(p, derive_couplings(p), max_iterations=2)


@settings(max_examples=100, deadline=None)
@given(st.floats(1e-7, 1e-3), st.floats(1.01, 10.0))
def test_intensity_increases_with_pump(P, k):
    p = paper_params(P_probe=1e-39, P_pump=P)
    q = p.with_(P_pump=k * P)
    a = solve_steady_state(p, derive_couplings(p))
    b = solve_steady_state(q, derive_couplings(q))
    assert b.intensity > a.intensity
