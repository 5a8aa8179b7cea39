"""Named scenarios for the four-mirror cavity lineshapes.

Every preset shares the macroscopic parameter set and a single probe power,
calibrated so that 11 fN on mirror 1 at phase 3pi/2 balances the probe at line
center. Curves of one family differ only in the mechanical drives and
frequencies, so their relative strengths are directly comparable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .params import OMEGA, PhysicalParams, paper_params
from .sweep import DetuningGrid

PI = math.pi
REFINE_HALF_WIDTH = 5e-3  # five linewidths gamma/Omega
REFINE_POINTS = 401


@dataclass(frozen=True)
class ExpectedFeature:
    kind: str  # "dip" or "peak"
    location: float  # delta_pr / Omega
    magnitude: str  # qualitative, e.g. "near zero", "strong"


@dataclass(frozen=True)
class ScenarioPreset:
    name: str
    params: PhysicalParams
    grid: DetuningGrid
    expected_features: tuple = ()
    figure: str = ""
    notes: str = ""
    # drive-free twin for switch-off comparisons
    reference: str | None = None


def _grid(centers=()) -> DetuningGrid:
    refine = tuple((float(c), REFINE_HALF_WIDTH, REFINE_POINTS) for c in sorted(set(centers)))
    return DetuningGrid(-1.0, 1.0, 2001, OMEGA, refine)


def _preset(name, figure, features=(), notes="", reference=None, refine=None, **overrides):
    feats = tuple(ExpectedFeature(*f) for f in features)
    centers = [f.location for f in feats] if refine is None else refine
    return ScenarioPreset(name, paper_params(**overrides), _grid(centers), feats,
                          figure, notes, reference)


def _build() -> dict[str, ScenarioPreset]:
    out = []
    out.append(_preset(
        "bare", "", [("peak", 0.0, "Lorentzian maximum 2")],
        notes="optomechanical coupling switched off; Re(eta_as) = 2 kappa^2/(kappa^2+delta_pr^2)",
        coupling_scale=0.0))

    # single mirror at omega_m1 = Omega, phase 3pi/2: transparency depth grows with drive
    three_half = dict(phi_m1=1.5 * PI)
    out += [
        _preset("fig3a_blue", "3a", [("dip", 0.0, "near zero")], s_m1_fN=11.0, **three_half),
        _preset("fig3a_red", "3a", [("dip", 0.0, "partial")], s_m1_fN=6.0, **three_half),
        _preset("fig3a_black", "3a", [("peak", 0.0, "undriven maximum")], **three_half),
        _preset("fig3b_blue", "3b", [("dip", 0.0, "deeper than single drive")],
                s_m1_fN=5.5, s_m2_fN=5.5, phi_m2=1.5 * PI, **three_half),
        _preset("fig3b_red", "3b", [("dip", 0.0, "partial")], s_m1_fN=5.5, **three_half),
        _preset("fig3b_black", "3b", [("peak", 0.0, "undriven maximum")], **three_half),
        _preset("fig3c_red", "3c", [("dip", 0.0, "near zero")], s_m1_fN=11.0, **three_half),
        _preset("fig3c_black", "3c", [("peak", 0.0, "undriven maximum")],
                notes="second drive at pi/2 cancels the first",
                reference="fig3b_black",
                s_m1_fN=11.0, s_m2_fN=11.0, phi_m2=0.5 * PI, **three_half),
    ]

    # phase ladder for 11 fN on mirror 1
    out += [
        _preset("fig4a", "4a", [("dip", 0.0, "minimum near zero")], s_m1_fN=11.0, phi_m1=1.5 * PI),
        _preset("fig4b", "4b", [("peak", 0.0, "sharp maximum")], s_m1_fN=11.0, phi_m1=0.5 * PI),
        _preset("fig4c", "4c", [("dip", -5e-4, "Fano minimum"), ("peak", 5e-4, "Fano maximum")],
                refine=[0.0], s_m1_fN=11.0, phi_m1=0.0),
        _preset("fig4d", "4d", [("peak", -5e-4, "Fano maximum"), ("dip", 5e-4, "Fano minimum")],
                refine=[0.0], notes="mirror image of fig4c about the background",
                s_m1_fN=11.0, phi_m1=PI),
    ]

    # mirror 1 detuned to 1.2 Omega: Fano pair at delta_pr/Omega = 0.2
    out += [
        _preset("fig5a", "5a", [("dip", 0.2, "Fano minimum"), ("peak", 0.2, "Fano maximum")],
                s_m1_fN=8.0, omega_m1=1.2 * OMEGA, phi_m1=1.5 * PI),
        _preset("fig5b", "5b", [("peak", 0.2, "Fano maximum"), ("dip", 0.2, "Fano minimum")],
                notes="mirror image of fig5a",
                s_m1_fN=8.0, omega_m1=1.2 * OMEGA, phi_m1=0.5 * PI),
    ]

    # two nondegenerate mirrors: transparency at 0, resonance at 0.3
    six = dict(omega_m2=1.3 * OMEGA, phi_m1=1.5 * PI, phi_m2=PI)
    out += [
        _preset("fig6_blue", "6", [("dip", 0.0, "near zero"), ("peak", 0.3, "sharp")],
                s_m1_fN=10.5, s_m2_fN=38.0, **six),
        _preset("fig6_red", "6", [("dip", 0.0, "partial"), ("peak", 0.3, "weaker")],
                notes="probe power held at the family calibration",
                s_m1_fN=5.0, s_m2_fN=20.0, **six),
        _preset("fig6_black", "6", [("peak", 0.0, "undriven maximum")], refine=[0.0, 0.3], **six),
    ]

    # double Fano resonance, mirrors at 0.8 Omega and 1.2 Omega
    seven = dict(s_m1_fN=15.0, omega_m1=0.8 * OMEGA, s_m2_fN=20.0, omega_m2=1.2 * OMEGA, phi_m1=0.0)
    out += [
        _preset("fig7", "7", [("peak", -0.2, "strong"), ("dip", 0.2, "strong")],
                notes="mirror 1 at 0.8 Omega sets the feature at -0.2, mirror 2 the one at +0.2",
                phi_m2=0.0, **seven),
        _preset("fig7_red", "7", [("peak", -0.2, "strong"), ("peak", 0.2, "strong")],
                phi_m2=PI, **seven),
    ]

    # degenerate mirrors at 1.3 Omega: relative phase switches the feature on and off
    eight = dict(omega_m1=1.3 * OMEGA, omega_m2=1.3 * OMEGA, phi_m1=PI)
    out += [
        _preset("fig8_blue", "8", [("peak", 0.3, "constructive")],
                s_m1_fN=20.0, s_m2_fN=20.0, phi_m2=PI, **eight),
        _preset("fig8_red", "8", [("peak", 0.3, "unequal drives")],
                s_m1_fN=30.0, s_m2_fN=10.0, phi_m2=0.0, **eight),
        _preset("fig8_black", "8", [],
                notes="equal drives in antiphase cancel; matches the undriven curve",
                reference="fig8_undriven", refine=[0.3],
                s_m1_fN=20.0, s_m2_fN=20.0, phi_m2=0.0, **eight),
        _preset("fig8_undriven", "8", [], refine=[0.3],
                notes="drive-free reference for the fig8 family", **eight),
    ]
    return {p.name: p for p in out}


_REGISTRY: dict[str, ScenarioPreset] | None = None


def registry() -> dict[str, ScenarioPreset]:
    global _REGISTRY
    if _REGISTRY is None:
        _REGISTRY = _build()
    return _REGISTRY


def preset_names() -> list[str]:
    return list(registry())


def get_preset(name: str) -> ScenarioPreset:
    try:
        return registry()[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; available: {', '.join(preset_names())}") from None
