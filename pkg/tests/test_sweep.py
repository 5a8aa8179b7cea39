import math

import numpy as np
import pytest

from fano_forge import get_preset
from fano_forge.constants import FEMTONEWTON
from fano_forge.errors import SingularityError
from fano_forge.params import OMEGA, paper_params
from fano_forge.sweep import (CalibrationTarget, DetuningGrid, Feature, SpectrumResult,
                              calibrate_probe_power, extract_features, oracle_check,
                              params_digest, reference_probe_power, run_sweep)


def _spectrum(x, y):
    grid = DetuningGrid(float(x[0]), float(x[-1]), len(x))
    return SpectrumResult(grid, np.asarray(x), np.asarray(y), np.zeros(len(x)), "test", "0")


def test_grid_validation():
    with pytest.raises(ValueError):
        DetuningGrid(points=1)
    with pytest.raises(ValueError):
        DetuningGrid(start=1.0, stop=1.0)
    with pytest.raises(ValueError):
        DetuningGrid(Omega=0.0)


def test_grid_maps_to_pump_probe_detuning():
    g = DetuningGrid(-1, 1, 3, OMEGA)
    np.testing.assert_array_equal(g.deltas(OMEGA), [0.0, OMEGA, 2 * OMEGA])


def test_refinement_is_sorted_and_unique():
    g = DetuningGrid(-1, 1, 2001, OMEGA, ((0.0, 5e-3, 401),))
    x = g.values()
    assert np.all(np.diff(x) > 0)
    assert x.size == 2001 + 401 - 11
    assert g.step == 1e-3


def test_bare_preset_lorentzian():
    spec = run_sweep(get_preset("bare"))
    lor = 2.0 / (1.0 + (spec.x * OMEGA / get_preset("bare").params.kappa) ** 2)
    assert np.max(np.abs(spec.re_eta - lor)) < 1e-12
    feats = extract_features(spec)
    assert len(feats) == 1 and feats[0].kind == "peak"
    assert abs(feats[0].location) < 1e-9 and feats[0].value == pytest.approx(2.0, abs=1e-12)


def test_sweep_is_deterministic():
    a = run_sweep(get_preset("fig7"))
    b = run_sweep(get_preset("fig7"))
    np.testing.assert_array_equal(a.re_eta, b.re_eta)
    assert a.params_digest == b.params_digest


def test_result_shapes_and_finiteness():
    pr = get_preset("fig6_blue")
    spec = run_sweep(pr, "linsys")
    assert len(spec) == spec.re_eta.size == spec.im_eta.size == pr.grid.values().size
    assert np.all(np.isfinite(spec.re_eta)) and np.all(np.isfinite(spec.im_eta))


@pytest.mark.parametrize("solver,tol", [("linsys", 1e-10), ("linear_system", 1e-10), ("linearized", 1e-4)])
def test_solvers_agree_at_sweep_level(solver, tol):
    pr = get_preset("fig5a")
    ex = run_sweep(pr, "exact")
    other = run_sweep(pr, solver)
    a = ex.re_eta + 1j * ex.im_eta
    b = other.re_eta + 1j * other.im_eta
    assert np.max(np.abs(a - b) / np.abs(a)) < tol


def test_timedomain_sweep_on_coarse_grid():
    pr = get_preset("fig7")
    grid = DetuningGrid(-1, 1, 11, pr.grid.Omega)
    td = run_sweep(pr, "timedomain", grid)
    ex = run_sweep(pr, "exact", grid)
    a, b = ex.re_eta + 1j * ex.im_eta, td.re_eta + 1j * td.im_eta
    # index 0 is delta = 0, where the time domain reports the merged sidebands
    assert np.max(np.abs(a[1:] - b[1:]) / np.abs(a[1:])) < 1e-6


def test_timedomain_grid_guard():
    with pytest.raises(ValueError, match="101"):
        run_sweep(get_preset("fig7"), "timedomain")


def test_unknown_solver():
    with pytest.raises(ValueError):
        run_sweep(get_preset("fig7"), "spectral")


def test_singularity_carries_grid_index():
    p = paper_params(P_probe=1e-39, s_m1_fN=1.0).with_(gamma1=1e-300)
    grid = DetuningGrid(-1, 1, 5, OMEGA)  # x = 0 puts delta on omega_m1
    with pytest.raises(SingularityError) as err:
        run_sweep(p, "exact", grid)
    assert err.value.index == 2


def test_digest_changes_with_every_field():
    p = get_preset("fig7").params
    base = params_digest(p)
    seen = {base}
    for name, value in vars(p).items():
        if isinstance(value, bool):
            q = p.with_(**{name: not value})
        elif name == "r":
            q = p.with_(r=0.6, t=0.8)
        elif name == "t":
            q = p.with_(r=0.8, t=0.6)
        elif name in ("gamma1", "gamma2"):
            q = p.with_(**{name: value * 1.5})
        else:
            q = p.with_(**{name: value * 1.000001 + 1e-30})
        d = params_digest(q)
        assert d not in seen, name
        seen.add(d)


def test_digest_sees_grid_and_solver():
    p = get_preset("fig7").params
    g = DetuningGrid()
    assert params_digest(p, g, "exact") != params_digest(p, g, "linsys")
    assert params_digest(p, g) != params_digest(p, g.with_points(2003))


def test_reference_calibration_golden(golden):
    ref = golden["calibration_11fN"]
    assert reference_probe_power() == pytest.approx(float(ref["P_probe"]), rel=1e-14)


def test_calibration_balances_line_center():
    pr = get_preset("fig3a_blue")
    assert pr.params.P_probe == reference_probe_power()
    spec = run_sweep(pr)
    i = int(np.argmin(np.abs(spec.x)))
    assert spec.x[i] == 0.0 and abs(spec.re_eta[i]) < 0.02


def test_doubling_drive_quadruples_power():
    p = paper_params(P_probe=1.0)
    a = calibrate_probe_power(p, target=CalibrationTarget(5 * FEMTONEWTON, 1.5 * math.pi, 1))
    b = calibrate_probe_power(p, target=CalibrationTarget(10 * FEMTONEWTON, 1.5 * math.pi, 1))
    assert b == pytest.approx(4 * a, rel=1e-14)


def test_mirror_two_calibration_matches_mirror_one_for_identical_mirrors():
    p = paper_params(P_probe=1.0)
    a = calibrate_probe_power(p, target=CalibrationTarget(7e-15, 1.5 * math.pi, 1))
    b = calibrate_probe_power(p, target=CalibrationTarget(7e-15, 1.5 * math.pi, 2))
    assert a == pytest.approx(b, rel=1e-14)


def test_calibration_rejects_zero_drive_and_wrong_phase():
    p = paper_params(P_probe=1.0)
    with pytest.raises(ValueError, match="nonzero"):
        calibrate_probe_power(p, target=CalibrationTarget(0.0, 1.5 * math.pi, 1))
    with pytest.raises(ValueError, match="against"):
        calibrate_probe_power(p, target=CalibrationTarget(1e-14, 0.5 * math.pi, 1))
    with pytest.raises(ValueError):
        calibrate_probe_power(p, target=CalibrationTarget(1e-14, 1.5 * math.pi, 3))


def test_features_on_parabola_are_exact():
    x = np.linspace(-1, 1, 11) ** 3  # uneven spacing
    y = 1.0 - (x - 0.1) ** 2
    feats = extract_features(_spectrum(x, y))
    assert len(feats) == 1
    assert feats[0] == Feature("peak", pytest.approx(0.1, abs=1e-12), pytest.approx(1.0, abs=1e-12))


def test_monotone_data_has_no_features():
    x = np.linspace(0, 1, 9)
    assert extract_features(_spectrum(x, x**2)) == []


def test_plateaus_are_not_strict_extrema():
    x = np.linspace(0, 1, 7)
    assert extract_features(_spectrum(x, [0, 1, 2, 2, 1, 0, 0])) == []


def test_feature_extraction_needs_five_points():
    with pytest.raises(ValueError):
        extract_features(_spectrum(np.arange(4.0), np.zeros(4)))


@pytest.mark.parametrize("name", ["fig5a", "fig6_blue", "fig7"])
def test_features_stable_under_refinement(name):
    pr = get_preset(name)
    coarse = extract_features(run_sweep(pr))
    fine = extract_features(run_sweep(pr, grid=pr.grid.with_points(4001)))
    half = pr.grid.step / 2
    for f in coarse:
        if abs(f.value) < 0.1 and f.kind == "peak":
            continue
        near = [g for g in fine if g.kind == f.kind and abs(g.location - f.location) < half]
        assert near, f


def test_oracle_report_without_timedomain():
    rep = oracle_check(get_preset("fig4c"), timedomain=False)
    assert rep.timedomain is None and rep.passed()
    assert rep.linear_system < 1e-10 and rep.linearized < 1e-4
