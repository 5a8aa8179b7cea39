"""Frequency-domain sideband solvers.

The fluctuations are expanded as ``X^- exp(-i delta t) + X^+ exp(+i delta t)``
where ``delta = omega_pr - omega_pu``. Three routes to the amplitudes are
provided:

* :func:`exact_sidebands` -- closed-form elimination of the six coupled
  equations;
* :func:`sidebands_linear_system` -- the six equations assembled as printed
  (with their complex conjugates), split into a 12x12 real system and solved
  by elimination;
* :func:`linearized_a1` -- first order in the optomechanical coupling.

Every function accepts a scalar or an array of detunings.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constants import HBAR
from .errors import SingularityError
from .linalg import solve_partial_pivot
from .params import DerivedCouplings, PhysicalParams
from .steady_state import SteadyState

SINGULAR_REL = 1e-30

EXACT = "exact_closed_form"
LINEAR_SYSTEM = "linear_system"
LINEARIZED = "linearized"
TIMEDOMAIN = "timedomain"


@dataclass(frozen=True)
class SidebandSolution:
    """Sideband amplitudes at one detuning (or a grid of them).

    ``kappa`` is carried along so that :func:`eta_as` needs only the probe
    amplitude.
    """

    a1_minus: complex | np.ndarray
    a1_plus: complex | np.ndarray
    Q1_minus: complex | np.ndarray
    Q1_plus: complex | np.ndarray
    Q2_minus: complex | np.ndarray
    Q2_plus: complex | np.ndarray
    delta: float | np.ndarray
    kappa: float
    solver_tag: str

    def amplitudes(self) -> np.ndarray:
        """Stack in the order (a1-, a1+, Q1-, Q1+, Q2-, Q2+) along the last axis."""
        return np.stack(np.broadcast_arrays(
            self.a1_minus, self.a1_plus, self.Q1_minus,
            self.Q1_plus, self.Q2_minus, self.Q2_plus), axis=-1)


@dataclass(frozen=True)
class AuxiliaryQuantities:
    alpha: complex | np.ndarray
    beta: complex | np.ndarray
    d1: complex | np.ndarray
    d2: complex | np.ndarray


def _first_index(mask):
    mask = np.asarray(mask)
    if mask.ndim == 0:
        return None
    return int(np.flatnonzero(mask)[0])


def chi(omega_m: float, gamma: float, delta):
    """Mechanical susceptibility ``omega_m / (omega_m^2 - i gamma delta - delta^2)``.

    Raises
    ------
    SingularityError
        At the undamped pole ``gamma = 0, delta = +-omega_m``.
    """
    if omega_m <= 0.0 or gamma < 0.0:
        raise ValueError("chi needs omega_m > 0 and gamma >= 0")
    delta = np.asarray(delta, dtype=float)
    den = omega_m**2 - delta**2 - 1j * gamma * delta
    small = np.abs(den) <= SINGULAR_REL * omega_m**2
    if np.any(small):
        raise SingularityError("susceptibility denominator", 0.0, _first_index(small))
    out = omega_m / den
    return out[()] if out.ndim == 0 else out


def auxiliary(ss: SteadyState, p: PhysicalParams, d: DerivedCouplings, delta) -> AuxiliaryQuantities:
    delta = np.asarray(delta, dtype=float)
    D = ss.Delta_eff
    n = ss.intensity
    alpha = p.kappa - 1j * (D + delta)
    beta = p.kappa + 1j * (D - delta)
    ab = alpha * beta
    d1 = ab - 2.0 * d.G1**2 * n * chi(p.omega_m1, p.gamma1, delta) * D
    d2 = ab - 2.0 * d.G2**2 * n * chi(p.omega_m2, p.gamma2, delta) * D
    return AuxiliaryQuantities(alpha, beta, d1, d2)


def _drive_phasors(p: PhysicalParams, d: DerivedCouplings):
    return d.S_m1 * np.exp(-1j * p.phi_m1), d.S_m2 * np.exp(-1j * p.phi_m2)


def _scalarize(x):
    x = np.asarray(x)
    return x[()] if x.ndim == 0 else x


def exact_sidebands(ss: SteadyState, p: PhysicalParams, d: DerivedCouplings, delta) -> SidebandSolution:
    """Closed-form sideband amplitudes including all orders in G."""
    delta = np.asarray(delta, dtype=float)
    D = ss.Delta_eff
    a_s = ss.a_s
    n = ss.intensity
    G1, G2, eps = d.G1, d.G2, d.eps_pr
    x1 = chi(p.omega_m1, p.gamma1, delta)
    x2 = chi(p.omega_m2, p.gamma2, delta)
    aux = auxiliary(ss, p, d, delta)
    alpha, beta, d1, d2 = aux.alpha, aux.beta, aux.d1, aux.d2
    e1, e2 = _drive_phasors(p, d)
    scale = np.abs(alpha * beta)

    cross = 2.0 * D * G1 * G2 * n
    den = d1 * d2 - cross**2 * x1 * x2
    small = np.abs(den) <= SINGULAR_REL * scale**2
    if np.any(small):
        raise SingularityError("d1*d2 - 4 Delta^2 G1^2 G2^2 |a_s|^4 chi1 chi2",
                               float(np.min(np.abs(den))), _first_index(small))
    small = np.abs(d2) <= SINGULAR_REL * scale
    if np.any(small):
        raise SingularityError("d2", float(np.min(np.abs(d2))), _first_index(small))

    num1 = (alpha * x1 * (eps * np.conj(a_s) * G1 * (d2 + 2.0 * D * G2**2 * n * x2) + beta * e1 * d2)
            + alpha * beta * x1 * x2 * cross * e2)
    Q1m = num1 / den
    Q2m = (eps * np.conj(a_s) * G2 * x2 * alpha + cross * x2 * Q1m + e2 * x2 * alpha * beta) / d2
    a1m = (eps + 1j * a_s * (G1 * Q1m + G2 * Q2m)) / beta
    # conjugated a1+ equation: alpha (a1+)^* = -i a_s^* (G1 Q1- + G2 Q2-), and Q+ = (Q-)^*
    a1p = np.conj(-1j * np.conj(a_s) * (G1 * Q1m + G2 * Q2m) / alpha)
    return SidebandSolution(
        a1_minus=_scalarize(a1m), a1_plus=_scalarize(a1p),
        Q1_minus=_scalarize(Q1m), Q1_plus=_scalarize(np.conj(Q1m)),
        Q2_minus=_scalarize(Q2m), Q2_plus=_scalarize(np.conj(Q2m)),
        delta=_scalarize(delta), kappa=p.kappa, solver_tag=EXACT,
    )


def coupled_equations(ss: SteadyState, p: PhysicalParams, d: DerivedCouplings, delta):
    """The six sideband equations as coefficient arrays.

    Returns ``(C, E, b)`` with shapes (..., 6, 6), (..., 6, 6), (..., 6) such
    that the equations read ``C u + E conj(u) = b`` for the unknowns
    ``u = (a1-, a1+, Q1-, Q1+, Q2-, Q2+)``.
    """
    delta = np.asarray(delta, dtype=float)
    shape = delta.shape
    D, a_s, k = ss.Delta_eff, ss.a_s, p.kappa
    C = np.zeros(shape + (6, 6), dtype=complex)
    E = np.zeros(shape + (6, 6), dtype=complex)
    b = np.zeros(shape + (6,), dtype=complex)
    # field sidebands
    C[..., 0, 0] = k + 1j * (D - delta)
    C[..., 0, 2] = -1j * d.G1 * a_s
    C[..., 0, 4] = -1j * d.G2 * a_s
    b[..., 0] = d.eps_pr
    C[..., 1, 1] = k + 1j * (D + delta)
    C[..., 1, 3] = -1j * d.G1 * a_s
    C[..., 1, 5] = -1j * d.G2 * a_s
    # mechanical sidebands
    mirrors = ((2, p.omega_m1, p.gamma1, d.G1, d.Sprime_m1, p.phi_m1),
               (4, p.omega_m2, p.gamma2, d.G2, d.Sprime_m2, p.phi_m2))
    for row, w, gam, G, Sp, phi in mirrors:
        force = Sp * w / (2.0 * HBAR)
        C[..., row, row] = w**2 - 1j * gam * delta - delta**2
        C[..., row, 0] = -G * w * np.conj(a_s)
        E[..., row, 1] = -G * w * a_s
        b[..., row] = force * np.exp(-1j * phi)
        C[..., row + 1, row + 1] = w**2 + 1j * gam * delta - delta**2
        C[..., row + 1, 1] = -G * w * np.conj(a_s)
        E[..., row + 1, 0] = -G * w * a_s
        b[..., row + 1] = force * np.exp(1j * phi)
    return C, E, b


def _realify(C, E, b):
    """Split ``C u + E conj(u) = b`` into a real system in (Re u, Im u)."""
    Cr, Ci, Er, Ei = C.real, C.imag, E.real, E.imag
    top = np.concatenate([Cr + Er, -Ci + Ei], axis=-1)
    bottom = np.concatenate([Ci + Ei, Cr - Er], axis=-1)
    M = np.concatenate([top, bottom], axis=-2)
    rhs = np.concatenate([b.real, b.imag], axis=-1)
    return M, rhs


def sidebands_linear_system(ss: SteadyState, p: PhysicalParams, d: DerivedCouplings, delta) -> SidebandSolution:
    """Solve the six coupled equations directly (12x12 real elimination)."""
    delta = np.asarray(delta, dtype=float)
    C, E, b = coupled_equations(ss, p, d, delta)
    M, rhs = _realify(C, E, b)
    x = solve_partial_pivot(M, rhs)
    u = x[..., :6] + 1j * x[..., 6:]
    cols = [_scalarize(u[..., j]) for j in range(6)]
    return SidebandSolution(*cols, delta=_scalarize(delta), kappa=p.kappa, solver_tag=LINEAR_SYSTEM)


def sideband_residual(sol: SidebandSolution, ss: SteadyState, p: PhysicalParams, d: DerivedCouplings):
    """Largest relative residual of the six equations after substitution.

    Each equation's residual is measured against the sum of magnitudes of its
    terms, so cancellation inside an equation does not inflate the figure.
    """
    C, E, b = coupled_equations(ss, p, d, sol.delta)
    u = sol.amplitudes()
    uc = np.conj(u)
    lhs = np.einsum("...ij,...j->...i", C, u) + np.einsum("...ij,...j->...i", E, uc)
    scale = (np.einsum("...ij,...j->...i", np.abs(C), np.abs(u))
             + np.einsum("...ij,...j->...i", np.abs(E), np.abs(uc)) + np.abs(b))
    scale = np.where(scale == 0.0, 1.0, scale)
    return float(np.max(np.abs(lhs - b) / scale))


def linearized_a1(ss: SteadyState, p: PhysicalParams, d: DerivedCouplings, delta) -> SidebandSolution:
    """Sideband amplitudes to first order in the couplings.

    a1- = [eps_pr + i G1 a_s S1 chi1 e^{-i phi1} + i G2 a_s S2 chi2 e^{-i phi2}] / (kappa + i(Delta - delta))

    The mechanical amplitudes are the directly driven responses
    ``chi_i S_i e^{-i phi_i}``; a1+ follows from them at the same order.
    """
    delta = np.asarray(delta, dtype=float)
    D, a_s = ss.Delta_eff, ss.a_s
    x1 = chi(p.omega_m1, p.gamma1, delta)
    x2 = chi(p.omega_m2, p.gamma2, delta)
    e1, e2 = _drive_phasors(p, d)
    beta = p.kappa + 1j * (D - delta)
    alpha = p.kappa - 1j * (D + delta)
    a1m = (d.eps_pr + 1j * d.G1 * a_s * e1 * x1 + 1j * d.G2 * a_s * e2 * x2) / beta
    Q1m = x1 * e1
    Q2m = x2 * e2
    a1p = np.conj(-1j * np.conj(a_s) * (d.G1 * Q1m + d.G2 * Q2m) / alpha)
    return SidebandSolution(
        a1_minus=_scalarize(a1m), a1_plus=_scalarize(a1p),
        Q1_minus=_scalarize(Q1m), Q1_plus=_scalarize(np.conj(Q1m)),
        Q2_minus=_scalarize(Q2m), Q2_plus=_scalarize(np.conj(Q2m)),
        delta=_scalarize(delta), kappa=p.kappa, solver_tag=LINEARIZED,
    )


def linearized_a1_symmetric(ss: SteadyState, p: PhysicalParams, d: DerivedCouplings, delta):
    """Factored first-order a1- for identical mirrors.

    ``(eps_pr + A (S1 e^{-i phi1} + S2 e^{-i phi2})) / (kappa + i(Delta - delta))``
    with ``A = i G a_s chi``. Only valid when G1 == G2 and chi1 == chi2.
    """
    if d.G1 != d.G2 or p.omega_m1 != p.omega_m2 or p.gamma1 != p.gamma2:
        raise ValueError("factored form requires identical couplings and susceptibilities")
    delta = np.asarray(delta, dtype=float)
    A = 1j * d.G1 * ss.a_s * chi(p.omega_m1, p.gamma1, delta)
    e1, e2 = _drive_phasors(p, d)
    return _scalarize((d.eps_pr + A * (e1 + e2)) / (p.kappa + 1j * (ss.Delta_eff - delta)))


def eta_as(sb: SidebandSolution, eps_pr: float):
    """Normalised anti-Stokes response ``2 kappa a1- / eps_pr`` (complex)."""
    if eps_pr == 0.0:
        raise ZeroDivisionError("eta_as is undefined without a probe; use a1_minus directly")
    return 2.0 * sb.kappa * np.asarray(sb.a1_minus) / eps_pr


SOLVERS = {
    "exact": exact_sidebands,
    "linsys": sidebands_linear_system,
    "linear_system": sidebands_linear_system,
    "linearized": linearized_a1,
}
