"""Self-consistent steady state of the pumped cavity.

The static radiation-pressure displacement of both mirrors shifts the cavity
detuning, ``Delta = Delta_c - G1 Q1s - G2 Q2s``, and the displacements in turn
depend on the intracavity intensity at that detuning. The effective detuning
is found as the fixed point of

    Delta -> Delta_c - sum_i G_i^2 |eps_pu / (kappa + i Delta)|^2 / omega_mi

by damped iteration started at ``Delta_c``. Only the branch continuously
connected to the bare detuning is followed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConvergenceError
from .params import DerivedCouplings, PhysicalParams

DAMPING = 0.5
MAX_ITERATIONS = 1000
REL_TOL = 1e-14
ABS_FLOOR = 1e-6  # rad/s


@dataclass(frozen=True)
class SteadyState:
    """Converged steady state.

    ``Delta_c`` is the bare detuning actually used; it differs from the input
    only when the effective detuning was pinned.
    """

    a_s: complex
    Q1s: float
    Q2s: float
    Delta_eff: float
    Delta_c: float
    iterations: int
    residual: float

    @property
    def intensity(self) -> float:
        return abs(self.a_s) ** 2


def detuning_shift(delta: float, p: PhysicalParams, d: DerivedCouplings) -> float:
    """Static shift sum_i G_i Q_is for a given effective detuning."""
    n = d.eps_pu**2 / (p.kappa**2 + delta**2)
    return d.G1**2 * n / p.omega_m1 + d.G2**2 * n / p.omega_m2


def _assemble(delta: float, delta_c: float, p, d, iterations: int) -> SteadyState:
    a_s = d.eps_pu / complex(p.kappa, delta)
    n = abs(a_s) ** 2
    residual = abs(delta_c - detuning_shift(delta, p, d) - delta) / max(abs(delta), p.kappa)
    return SteadyState(
        a_s=a_s,
        Q1s=d.G1 * n / p.omega_m1,
        Q2s=d.G2 * n / p.omega_m2,
        Delta_eff=delta,
        Delta_c=delta_c,
        iterations=iterations,
        residual=residual,
    )


def solve_steady_state(
    p: PhysicalParams,
    d: DerivedCouplings,
    initial: float | None = None,
    max_iterations: int = MAX_ITERATIONS,
    pin_effective_detuning: bool | None = None,
) -> SteadyState:
    """Solve for a_s, Q_is and the effective detuning.

    Parameters
    ----------
    p, d : PhysicalParams, DerivedCouplings
    initial : float, optional
        Starting detuning; defaults to ``p.Delta_c``.
    max_iterations : int
    pin_effective_detuning : bool, optional
        Overrides ``p.pin_effective_detuning``. When set, ``p.Delta_c`` is the
        target effective detuning and the bare detuning is solved for in
        closed form instead.

    Raises
    ------
    ConvergenceError
        When the iteration fails to settle or produces a non-finite value.
    """
    pin = p.pin_effective_detuning if pin_effective_detuning is None else pin_effective_detuning
    if pin:
        target = p.Delta_c
        return _assemble(target, target + detuning_shift(target, p, d), p, d, 0)

    delta_c = p.Delta_c
    tol = max(REL_TOL * abs(delta_c), ABS_FLOOR)
    delta = delta_c if initial is None else float(initial)
    change = math.inf
    for k in range(1, max_iterations + 1):
        target = delta_c - detuning_shift(delta, p, d)
        new = (1.0 - DAMPING) * delta + DAMPING * target
        if not math.isfinite(new):
            raise ConvergenceError("non-finite detuning during fixed-point iteration", change, k)
        change = abs(new - delta)
        delta = new
        if change <= tol:
            return _assemble(delta, delta_c, p, d, k)
    raise ConvergenceError("steady state did not converge", change, max_iterations)
