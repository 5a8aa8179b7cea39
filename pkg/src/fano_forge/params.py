"""Physical inputs of the four-mirror cavity and the couplings derived from them.

All frequencies and rates are angular (rad/s). Mirror 1 sits in the arm fed
by the transmitted beam of the splitter, mirror 2 in the reflected arm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace

from .constants import C_LIGHT, FEMTONEWTON, HBAR, TWO_PI

SPLITTER_TOL = 1e-12

# Fields whose values are angular frequencies; config files carry these in Hz.
FREQUENCY_FIELDS = ("omega_m1", "omega_m2", "gamma1", "gamma2", "kappa", "Delta_c")


@dataclass(frozen=True)
class PhysicalParams:
    """Raw lab-frame inputs.

    ``coupling_scale`` multiplies the bare optomechanical coupling; setting it
    to zero switches off radiation pressure entirely (the bare cavity).
    ``pin_effective_detuning`` reinterprets ``Delta_c`` as the requested
    effective detuning and shifts the bare detuning to compensate.
    """

    L1: float
    L2: float
    L3: float
    L4: float
    m1: float
    m2: float
    omega_m1: float
    omega_m2: float
    gamma1: float
    gamma2: float
    kappa: float
    Delta_c: float
    lambda_pump: float
    P_pump: float
    P_probe: float
    r: float
    t: float
    s_m1: float = 0.0
    s_m2: float = 0.0
    phi_m1: float = 0.0
    phi_m2: float = 0.0
    coupling_scale: float = 1.0
    pin_effective_detuning: bool = False

    def __post_init__(self):
        for name in ("L1", "L2", "L3", "L4", "m1", "m2", "omega_m1", "omega_m2",
                     "gamma1", "gamma2", "kappa", "lambda_pump", "P_pump", "P_probe"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0.0):
                raise ValueError(f"{name} must be finite and strictly positive, got {value!r}")
        for name in ("s_m1", "s_m2", "coupling_scale", "r", "t"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0.0):
                raise ValueError(f"{name} must be finite and nonnegative, got {value!r}")
        for name in ("phi_m1", "phi_m2", "Delta_c"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if abs(self.r**2 + self.t**2 - 1.0) > SPLITTER_TOL:
            raise ValueError(f"lossless splitter requires r^2 + t^2 = 1, got {self.r**2 + self.t**2!r}")
        if self.gamma1 >= self.omega_m1 or self.gamma2 >= self.omega_m2:
            raise ValueError("mechanical oscillators must be underdamped (gamma_i < omega_mi)")

    def with_(self, **changes) -> PhysicalParams:
        return replace(self, **changes)

    @property
    def omega_pump(self) -> float:
        return TWO_PI * C_LIGHT / self.lambda_pump


def field_names() -> tuple[str, ...]:
    return tuple(f.name for f in fields(PhysicalParams))


@dataclass(frozen=True)
class DerivedCouplings:
    """Coupling constants in SI angular-frequency units.

    Attributes
    ----------
    g : float
        Bare optomechanical coupling, rad/(s m).
    G1, G2 : float
        Effective couplings per dimensionless displacement, rad/s.
    eps_pu, eps_pr : float
        Intracavity pump and probe drive amplitudes, 1/s.
    Sprime_m1, Sprime_m2 : float
        Mechanical drive energies in the dimensionless coordinate, J.
    S_m1, S_m2 : float
        ``Sprime / (2 hbar)``; the phasor amplitude entering the sideband
        equations.
    """

    g: float
    G1: float
    G2: float
    eps_pu: float
    eps_pr: float
    Sprime_m1: float
    Sprime_m2: float
    S_m1: float
    S_m2: float


def zero_point_length(mass: float, omega_m: float) -> float:
    """Length scale sqrt(hbar / m omega) that makes the mirror coordinate dimensionless."""
    return math.sqrt(HBAR / (mass * omega_m))


def drive_amplitude(power: float, kappa: float, omega: float) -> float:
    return math.sqrt(2.0 * kappa * power / (HBAR * omega))


def probe_power_for_amplitude(eps_pr: float, kappa: float, omega: float) -> float:
    """Inverse of :func:`drive_amplitude`."""
    return eps_pr**2 * HBAR * omega / (2.0 * kappa)


def derive_couplings(p: PhysicalParams) -> DerivedCouplings:
    """Evaluate g, G_i, the drive amplitudes and the mechanical drive terms.

    The probe amplitude is normalised with the pump frequency; the probe sits
    within ~1e-7 relative of it, so a single constant keeps the anti-Stokes
    normalisation independent of detuning.
    """
    w_pu = p.omega_pump
    g = p.coupling_scale * w_pu / (p.L4 + p.L1 * p.t**2 + p.L2 * p.r**2)
    x1 = zero_point_length(p.m1, p.omega_m1)
    x2 = zero_point_length(p.m2, p.omega_m2)
    sp1 = p.s_m1 * x1
    sp2 = p.s_m2 * x2
    return DerivedCouplings(
        g=g,
        G1=p.t**2 * g * x1,
        G2=p.r**2 * g * x2,
        eps_pu=drive_amplitude(p.P_pump, p.kappa, w_pu),
        eps_pr=drive_amplitude(p.P_probe, p.kappa, w_pu),
        Sprime_m1=sp1,
        Sprime_m2=sp2,
        S_m1=sp1 / (2.0 * HBAR),
        S_m2=sp2 / (2.0 * HBAR),
    )


# Macroscopic cavity used throughout the figures.
OMEGA = TWO_PI * 1e7
PAPER_DEFAULTS = dict(
    L1=35e-3, L2=35e-3, L3=35e-3, L4=35e-3,
    m1=14.5e-3, m2=14.5e-3,
    omega_m1=OMEGA, omega_m2=OMEGA,
    gamma1=TWO_PI * 1e4, gamma2=TWO_PI * 1e4,
    kappa=TWO_PI * 1e6,
    Delta_c=OMEGA,
    lambda_pump=1064e-9,
    P_pump=10e-6,
    r=1.0 / math.sqrt(2.0), t=1.0 / math.sqrt(2.0),
)


def paper_params(P_probe: float | None = None, **overrides) -> PhysicalParams:
    """Macroscopic parameter set with optional overrides.

    Drive amplitudes may be given in femtonewtons through ``s_m1_fN`` /
    ``s_m2_fN``. Without an explicit ``P_probe`` the reference calibration
    (11 fN on mirror 1 at phase 3pi/2) is used.
    """
    values = dict(PAPER_DEFAULTS)
    for key in ("s_m1", "s_m2"):
        fn = overrides.pop(key + "_fN", None)
        if fn is not None:
            values[key] = fn * FEMTONEWTON
    values.update(overrides)
    if P_probe is None:
        from .sweep import reference_probe_power
        P_probe = reference_probe_power()
    return PhysicalParams(P_probe=P_probe, **values)
