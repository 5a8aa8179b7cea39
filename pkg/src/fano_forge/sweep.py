"""Detuning sweeps, probe calibration and lineshape feature extraction."""

from __future__ import annotations

import functools
import hashlib
import math
from dataclasses import dataclass, field, fields

import numpy as np

from .constants import FEMTONEWTON
from .errors import SingularityError
from .params import (DerivedCouplings, PhysicalParams, derive_couplings,
                     probe_power_for_amplitude)
from .response import SOLVERS, chi, eta_as
from .steady_state import SteadyState, solve_steady_state

TIMEDOMAIN_MAX_POINTS = 101
SOLVER_CHOICES = ("exact", "linearized", "linsys", "linear_system", "timedomain")


@dataclass(frozen=True)
class DetuningGrid:
    """Grid in normalised probe detuning ``delta_pr / Omega``.

    ``refine`` lists extra windows as ``(center, half_width, points)``. The
    solvers consume ``delta = delta_pr + Delta_c``.
    """

    start: float = -1.0
    stop: float = 1.0
    points: int = 2001
    Omega: float = 2 * math.pi * 1e7
    refine: tuple = ()

    def __post_init__(self):
        for name in ("start", "stop", "Omega"):
            object.__setattr__(self, name, float(getattr(self, name)))
        object.__setattr__(self, "points", int(self.points))
        if self.points < 2:
            raise ValueError("a grid needs at least two points")
        if not self.stop > self.start:
            raise ValueError("grid stop must exceed start")
        if not self.Omega > 0.0:
            raise ValueError("Omega must be positive")

    @property
    def step(self) -> float:
        return (self.stop - self.start) / (self.points - 1)

    def values(self) -> np.ndarray:
        parts = [np.linspace(self.start, self.stop, self.points)]
        for center, half, n in self.refine:
            lo = max(center - half, self.start)
            hi = min(center + half, self.stop)
            if hi > lo:
                parts.append(np.linspace(lo, hi, int(n)))
        x = np.unique(np.concatenate(parts))
        # window edges land within rounding of base points; keep one of each
        keep = np.concatenate(([True], np.diff(x) > 1e-9 * self.step))
        return x[keep]

    def deltas(self, Delta_c: float) -> np.ndarray:
        return self.values() * self.Omega + Delta_c

    def with_points(self, points: int) -> DetuningGrid:
        return DetuningGrid(self.start, self.stop, points, self.Omega, self.refine)


@dataclass(frozen=True)
class SpectrumResult:
    grid: DetuningGrid
    x: np.ndarray
    re_eta: np.ndarray
    im_eta: np.ndarray
    solver_tag: str
    params_digest: str
    a1_minus: np.ndarray = field(repr=False, default=None)

    def __len__(self):
        return self.x.size


@dataclass(frozen=True)
class Feature:
    kind: str  # "dip" or "peak"
    location: float
    value: float


@dataclass(frozen=True)
class CalibrationTarget:
    drive: float  # N
    phase: float  # rad
    mirror: int = 1


def params_digest(p: PhysicalParams, grid: DetuningGrid | None = None, solver: str = "") -> str:
    """Stable checksum over every input (bit-exact float representation)."""
    h = hashlib.sha256()
    for f in fields(p):
        v = getattr(p, f.name)
        h.update(f"{f.name}={float(v).hex() if not isinstance(v, bool) else v};".encode())
    if grid is not None:
        h.update(f"grid={grid.start.hex()},{grid.stop.hex()},{grid.points},{grid.Omega.hex()};".encode())
        for c, w, n in grid.refine:
            h.update(f"ref={float(c).hex()},{float(w).hex()},{int(n)};".encode())
    h.update(solver.encode())
    return h.hexdigest()[:16]


def calibrate_probe_power(p: PhysicalParams, d: DerivedCouplings | None = None,
                          target: CalibrationTarget | None = None) -> float:
    """Probe power that balances the mechanical drive at line center.

    Sets ``eps_pr = |G_i a_s S_i chi_i(Delta)|`` so the first-order numerator
    ``eps_pr + i G_i a_s S_i chi_i e^{-i phi}`` cancels in magnitude when the
    drive opposes the probe. Without a target, mirror 1's drive in ``p`` is
    used.

    Raises
    ------
    ValueError
        For a zero drive, or a phase that does not oppose the probe.
    """
    if target is None:
        target = CalibrationTarget(p.s_m1, p.phi_m1, 1)
    if target.mirror not in (1, 2):
        raise ValueError("mirror must be 1 or 2")
    if not target.drive > 0.0:
        raise ValueError("calibration needs a nonzero mechanical drive")
    if target.mirror == 1:
        q = p.with_(s_m1=target.drive, phi_m1=target.phase)
    else:
        q = p.with_(s_m2=target.drive, phi_m2=target.phase)
    d = derive_couplings(q) if d is None else d
    dq = derive_couplings(q)
    ss = solve_steady_state(q, dq)
    D = ss.Delta_eff
    if target.mirror == 1:
        G, S, x = dq.G1, dq.S_m1, chi(q.omega_m1, q.gamma1, D)
    else:
        G, S, x = dq.G2, dq.S_m2, chi(q.omega_m2, q.gamma2, D)
    term = 1j * G * ss.a_s * S * x * np.exp(-1j * target.phase)
    if term.real >= 0.0:
        raise ValueError("calibration phase must put the drive term against the probe")
    return probe_power_for_amplitude(abs(term), q.kappa, q.omega_pump)


@functools.cache
def reference_probe_power() -> float:
    """Probe power shared by every preset: 11 fN on mirror 1 at phase 3pi/2."""
    from .params import paper_params
    p = paper_params(P_probe=1.0, s_m1_fN=11.0, phi_m1=1.5 * math.pi)
    return calibrate_probe_power(p, target=CalibrationTarget(11.0 * FEMTONEWTON, 1.5 * math.pi, 1))


def default_grid(p: PhysicalParams, points: int = 2001) -> DetuningGrid:
    """Grid normalised to Omega = Delta_c (or omega_m1 when Delta_c <= 0)."""
    omega = p.Delta_c if p.Delta_c > 0.0 else p.omega_m1
    return DetuningGrid(-1.0, 1.0, points, omega)


def solve_spectrum(p: PhysicalParams, deltas, solver: str = "exact", threads=None):
    """Sideband solution over raw detunings (rad/s) with the chosen solver."""
    d = derive_couplings(p)
    ss = solve_steady_state(p, d)
    if solver == "timedomain":
        from .timedomain import timedomain_sidebands
        sol, _ = timedomain_sidebands(ss, p, d, deltas, threads=threads)
        return sol, ss, d
    try:
        fn = SOLVERS[solver]
    except KeyError:
        raise ValueError(f"unknown solver {solver!r}; choose from {SOLVER_CHOICES}") from None
    return fn(ss, p, d, deltas), ss, d


def run_sweep(target, solver: str = "exact", grid: DetuningGrid | None = None,
              allow_large_timedomain: bool = False, threads=None) -> SpectrumResult:
    """Evaluate Re/Im of eta_as over a detuning grid.

    ``target`` is a preset (anything with ``params`` and ``grid``) or a bare
    :class:`PhysicalParams`.

    Raises
    ------
    SingularityError
        With the offending grid index when a solver hits a singular point.
    ValueError
        For the time-domain solver on grids above ``TIMEDOMAIN_MAX_POINTS``
        unless ``allow_large_timedomain`` is set.
    """
    if isinstance(target, PhysicalParams):
        p = target
        grid = grid or default_grid(p)
    else:
        p = target.params
        grid = grid or target.grid
    if solver not in SOLVER_CHOICES:
        raise ValueError(f"unknown solver {solver!r}; choose from {SOLVER_CHOICES}")
    x = grid.values()
    if solver == "timedomain" and x.size > TIMEDOMAIN_MAX_POINTS and not allow_large_timedomain:
        raise ValueError(f"time-domain sweeps are limited to {TIMEDOMAIN_MAX_POINTS} points "
                         f"(got {x.size}); use allow_large_timedomain (--allow-large-timedomain) to override")
    deltas = x * grid.Omega + p.Delta_c
    try:
        sol, ss, d = solve_spectrum(p, deltas, solver, threads)
    except SingularityError:
        raise
    eta = np.atleast_1d(eta_as(sol, d.eps_pr))
    if not np.all(np.isfinite(eta)):
        bad = int(np.flatnonzero(~np.isfinite(eta))[0])
        raise SingularityError("eta_as", math.nan, bad)
    return SpectrumResult(grid=grid, x=x, re_eta=eta.real.copy(), im_eta=eta.imag.copy(),
                          solver_tag=sol.solver_tag, params_digest=params_digest(p, grid, solver),
                          a1_minus=np.atleast_1d(sol.a1_minus))


def _parabola_vertex(x0, x1, x2, y0, y1, y2):
    """Vertex of the parabola through three (possibly unevenly spaced) points."""
    d01, d12, d02 = x1 - x0, x2 - x1, x2 - x0
    a = (y0 / (d01 * d02)) - (y1 / (d01 * d12)) + (y2 / (d12 * d02))
    b_num = y0 * (x1 + x2) / (d01 * d02) - y1 * (x0 + x2) / (d01 * d12) + y2 * (x0 + x1) / (d12 * d02)
    if a == 0.0:
        return x1, y1, 0.0
    xv = b_num / (2.0 * a)
    # quadratic through the three points: y = a x^2 - b_num x + c
    c = y1 - a * x1 * x1 + b_num * x1
    yv = a * xv * xv - b_num * xv + c
    return xv, yv, a


def extract_features(spec: SpectrumResult) -> list[Feature]:
    """Strict local extrema of Re(eta_as), refined by three-point parabolas."""
    x, y = np.asarray(spec.x), np.asarray(spec.re_eta)
    if x.size < 5:
        raise ValueError("feature extraction needs at least five grid points")
    out = []
    inner = np.arange(1, x.size - 1)
    peak = (y[inner] > y[inner - 1]) & (y[inner] > y[inner + 1])
    dip = (y[inner] < y[inner - 1]) & (y[inner] < y[inner + 1])
    for i in inner[peak | dip]:
        xv, yv, a = _parabola_vertex(x[i - 1], x[i], x[i + 1], y[i - 1], y[i], y[i + 1])
        if not (x[i - 1] <= xv <= x[i + 1]):
            xv, yv = x[i], y[i]
        kind = "peak" if a < 0.0 or (a == 0.0 and y[i] > y[i - 1]) else "dip"
        out.append(Feature(kind, float(xv), float(yv)))
    return out


def line_center_value(spec: SpectrumResult, at: float = 0.0) -> float:
    i = int(np.argmin(np.abs(spec.x - at)))
    if abs(spec.x[i] - at) > 1e-12:
        raise ValueError(f"grid has no point at {at}")
    return float(spec.re_eta[i])


ORACLE_TOLERANCES = {"linear_system": 1e-10, "linearized": 1e-4, "timedomain": 1e-6}


@dataclass(frozen=True)
class OracleReport:
    """Largest relative disagreement of each solver with the closed form."""

    linear_system: float
    linearized: float
    timedomain: float | None
    timedomain_points: int
    timedomain_seconds: float
    worst_timedomain_x: float | None = None

    def passed(self, tolerances=ORACLE_TOLERANCES) -> bool:
        ok = (self.linear_system < tolerances["linear_system"]
              and self.linearized < tolerances["linearized"])
        if self.timedomain is not None:
            ok = ok and self.timedomain < tolerances["timedomain"]
        return bool(ok)


def _relative(ref: np.ndarray, other: np.ndarray) -> np.ndarray:
    """Pointwise relative error with a floor at 1e-12 of the largest reference value."""
    ref, other = np.asarray(ref), np.asarray(other)
    scale = np.abs(ref).max() if ref.size else 0.0
    if scale == 0.0:
        return np.abs(other - ref)
    return np.abs(other - ref) / np.maximum(np.abs(ref), 1e-12 * scale)


def blockwise_relative(ref: np.ndarray, other: np.ndarray) -> np.ndarray:
    """Per-point relative error of the six amplitudes, field and mirror blocks apart.

    The field pair (a1-, a1+) is measured against its larger member and the
    four mirror amplitudes against theirs, so a sideband that cancels to
    rounding level is judged on the scale of its partner.
    """
    ref, other = np.atleast_2d(ref), np.atleast_2d(other)
    out = np.zeros(ref.shape[0])
    for block in (slice(0, 2), slice(2, 6)):
        diff = np.abs(other[:, block] - ref[:, block]).max(axis=1)
        scale = np.abs(ref[:, block]).max(axis=1)
        nz = scale > 0.0
        out[nz] = np.maximum(out[nz], diff[nz] / scale[nz])
        out[~nz] = np.maximum(out[~nz], diff[~nz])
    return out


def oracle_check(target, points: int = 21, timedomain: bool = True, threads=None,
                 grid: DetuningGrid | None = None) -> OracleReport:
    """Compare the closed form against the other three solvers.

    The linear-system and linearized legs use the full grid (all six
    amplitudes, blockwise, for the linear system, the probe sideband for the linearized
    form). The time-domain leg uses ``points`` evenly spaced detunings across
    the grid span; where the sidebands merge (``delta = 0``) it is compared
    with the sum of both field sidebands.
    """
    import time

    if isinstance(target, PhysicalParams):
        p, grid = target, grid or default_grid(target)
    else:
        p, grid = target.params, grid or target.grid
    d = derive_couplings(p)
    ss = solve_steady_state(p, d)
    deltas = grid.deltas(p.Delta_c)
    ex = SOLVERS["exact"](ss, p, d, deltas)
    ls = SOLVERS["linsys"](ss, p, d, deltas)
    ln = SOLVERS["linearized"](ss, p, d, deltas)
    e_ls = float(blockwise_relative(ex.amplitudes(), ls.amplitudes()).max())
    e_ln = float(_relative(ex.a1_minus, ln.a1_minus).max())

    e_td, worst_x, elapsed = None, None, 0.0
    if timedomain:
        from .timedomain import timedomain_sidebands
        x = np.linspace(grid.start, grid.stop, points)
        sub = x * grid.Omega + p.Delta_c
        t0 = time.perf_counter()
        td, _ = timedomain_sidebands(ss, p, d, sub, threads=threads)
        elapsed = time.perf_counter() - t0
        exs = SOLVERS["exact"](ss, p, d, sub)
        ref = np.where(sub == 0.0, exs.a1_minus + exs.a1_plus, exs.a1_minus)
        err = _relative(ref, td.a1_minus)
        e_td = float(err.max())
        worst_x = float(x[int(np.argmax(err))])
    return OracleReport(e_ls, e_ln, e_td, points if timedomain else 0, elapsed, worst_x)
