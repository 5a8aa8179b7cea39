import pytest

from fano_forge import get_preset, preset_names, registry
from fano_forge.sweep import reference_probe_power

FIGURE_CURVES = {
    "3a": 3, "3b": 3, "3c": 2, "4a": 1, "4b": 1, "4c": 1, "4d": 1, "5a": 1, "5b": 1,
    "6": 3, "7": 2, "8": 3,
}


def test_names_unique_and_cover_every_curve():
    names = preset_names()
    assert len(names) == len(set(names))
    counts = {}
    for pr in registry().values():
        if pr.figure and not pr.name.endswith("_undriven"):
            counts[pr.figure] = counts.get(pr.figure, 0) + 1
    assert counts == FIGURE_CURVES


def test_unknown_preset_lists_names():
    with pytest.raises(KeyError, match="fig3a_blue"):
        get_preset("fig99")


def test_shared_probe_power():
    assert {pr.params.P_probe for pr in registry().values()} == {reference_probe_power()}


def test_expected_features_are_refined():
    for pr in registry().values():
        centers = [c for c, _, _ in pr.grid.refine]
        for f in pr.expected_features:
            assert f.kind in ("dip", "peak")
            assert any(abs(f.location - c) <= w for c, w, _ in pr.grid.refine), pr.name
        assert centers == sorted(centers)


@pytest.mark.parametrize("name,kw", [
    ("fig3a_blue", dict(s_m1=11e-15, phi_m1=4.71238898038469)),
    ("fig5a", dict(s_m1=8e-15)),
    ("fig6_blue", dict(s_m1=10.5e-15, s_m2=38e-15, phi_m2=3.141592653589793)),
    ("fig7", dict(s_m1=15e-15, s_m2=20e-15, phi_m1=0.0, phi_m2=0.0)),
    ("fig8_red", dict(s_m1=30e-15, s_m2=10e-15, phi_m2=0.0)),
])
def test_drive_settings(name, kw):
    p = get_preset(name).params
    for key, value in kw.items():
        assert getattr(p, key) == pytest.approx(value, rel=1e-15), key


def test_frequencies():
    assert get_preset("fig5a").params.omega_m1 == pytest.approx(1.2 * get_preset("bare").params.omega_m1)
    p7 = get_preset("fig7").params
    assert p7.omega_m1 / p7.Delta_c == pytest.approx(0.8) and p7.omega_m2 / p7.Delta_c == pytest.approx(1.2)
    p6 = get_preset("fig6_blue").params
    assert p6.omega_m2 / p6.Delta_c == pytest.approx(1.3)
    p8 = get_preset("fig8_blue").params
    assert p8.omega_m1 == p8.omega_m2 == pytest.approx(1.3 * p8.Delta_c)


def test_presets_leave_pinning_off():
    assert not any(pr.params.pin_effective_detuning for pr in registry().values())
