"""Time-domain oracle for the sideband amplitudes.

The linearised fluctuation equations

    d(da)/dt = -(kappa + i Delta_c) da + eps_pr e^{-i delta t}
               + i G1 (Q1s da + a_s dQ1) + i G2 (Q2s da + a_s dQ2)
    d(dQi)/dt = omega_mi dPi
    d(dPi)/dt = -omega_mi dQi - gamma_i dPi + G_i (a_s^* da + a_s da^*)
                + (S'_mi / hbar) cos(delta t + phi_mi)

are integrated with classical fixed-step RK4 from rest, and the coefficient of
``e^{-i delta t}`` in ``da`` is extracted by projection over whole periods.
Nothing here uses the frequency-domain solvers; the step size and run length
come from an a-priori error model of the integrator.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numba
import numpy as np

from .constants import HBAR, TWO_PI
from .errors import IntegrationError
from .params import DerivedCouplings, PhysicalParams
from .response import TIMEDOMAIN, SidebandSolution
from .steady_state import SteadyState

MIN_STEPS_PER_PERIOD = 50
MIN_DECAY_TIMES = 10.0
# Worst observed ratio between the mechanically driven part of a1- and a1-
# itself (calibrated OMIT dips cancel to ~10%).
CANCELLATION_HEADROOM = 10.0
DEFAULT_RTOL = 1e-7
DRIFT_THRESHOLD = 1e-6
FINITE_CHECK_EVERY = 4096
# fast-math is left off: it lets LLVM fold the finiteness checks away


@numba.njit(cache=True, nogil=True)
def _all_finite(da, q1, p1, q2, p2):
    return (np.isfinite(da.real) and np.isfinite(da.imag) and np.isfinite(q1)
            and np.isfinite(p1) and np.isfinite(q2) and np.isfinite(p2))


@numba.njit(cache=True, nogil=True)
def _rhs(da, q1, p1, q2, p2, z, c1, c2, K, eps, a_s, G1, G2, w1, w2, g1, g2, F1, F2):
    rp = 2.0 * (a_s.conjugate() * da).real
    dda = -K * da + eps * z + 1j * a_s * (G1 * q1 + G2 * q2)
    return (dda,
            w1 * p1, -w1 * q1 - g1 * p1 + G1 * rp + F1 * c1,
            w2 * p2, -w2 * q2 - g2 * p2 + G2 * rp + F2 * c2)


@numba.njit(cache=True, nogil=True)
def _rk4_kernel(n_steps, h, rec_start, probe, cos1, cos2,
                K, eps, a_s, G1, G2, w1, w2, g1, g2, F1, F2,
                out_da, out_q1, out_p1, out_q2, out_p2):
    # Tables hold the forcing at half-step resolution over one period.
    nt = probe.shape[0]
    da = 0j
    q1 = 0.0
    p1 = 0.0
    q2 = 0.0
    p2 = 0.0
    if rec_start == 0:
        out_da[0] = da
        out_q1[0] = q1
        out_p1[0] = p1
        out_q2[0] = q2
        out_p2[0] = p2
    hh = 0.5 * h
    k0 = 0
    for n in range(n_steps):
        k1 = k0 + 1 if k0 + 1 < nt else 0
        k2 = k1 + 1 if k1 + 1 < nt else 0
        a1, b1, c1, d1, e1 = _rhs(da, q1, p1, q2, p2, probe[k0], cos1[k0], cos2[k0],
                                  K, eps, a_s, G1, G2, w1, w2, g1, g2, F1, F2)
        a2, b2, c2, d2, e2 = _rhs(da + hh * a1, q1 + hh * b1, p1 + hh * c1, q2 + hh * d1, p2 + hh * e1,
                                  probe[k1], cos1[k1], cos2[k1],
                                  K, eps, a_s, G1, G2, w1, w2, g1, g2, F1, F2)
        a3, b3, c3, d3, e3 = _rhs(da + hh * a2, q1 + hh * b2, p1 + hh * c2, q2 + hh * d2, p2 + hh * e2,
                                  probe[k1], cos1[k1], cos2[k1],
                                  K, eps, a_s, G1, G2, w1, w2, g1, g2, F1, F2)
        a4, b4, c4, d4, e4 = _rhs(da + h * a3, q1 + h * b3, p1 + h * c3, q2 + h * d3, p2 + h * e3,
                                  probe[k2], cos1[k2], cos2[k2],
                                  K, eps, a_s, G1, G2, w1, w2, g1, g2, F1, F2)
        s = h / 6.0
        da = da + s * (a1 + 2.0 * a2 + 2.0 * a3 + a4)
        q1 = q1 + s * (b1 + 2.0 * b2 + 2.0 * b3 + b4)
        p1 = p1 + s * (c1 + 2.0 * c2 + 2.0 * c3 + c4)
        q2 = q2 + s * (d1 + 2.0 * d2 + 2.0 * d3 + d4)
        p2 = p2 + s * (e1 + 2.0 * e2 + 2.0 * e3 + e4)
        k0 = k2
        j = n + 1
        if j % FINITE_CHECK_EVERY == 0 or j == n_steps:
            if not _all_finite(da, q1, p1, q2, p2):
                return j
        if j >= rec_start:
            r = j - rec_start
            out_da[r] = da
            out_q1[r] = q1
            out_p1[r] = p1
            out_q2[r] = q2
            out_p2[r] = p2
    return -1


@dataclass(frozen=True)
class Schedule:
    """Fixed-step integration plan for one detuning.

    ``dt`` divides the forcing period exactly (``steps_per_period`` steps) so
    that windows of whole periods are whole numbers of samples.
    """

    dt: float
    steps_per_period: int
    n_steps: int
    t_end: float
    t_cut: float


@dataclass(frozen=True)
class Trajectory:
    """Recorded fluctuation trajectory (samples from ``t[0]`` onward)."""

    t: np.ndarray
    da: np.ndarray
    dQ1: np.ndarray
    dP1: np.ndarray
    dQ2: np.ndarray
    dP2: np.ndarray
    dt: float
    delta: float
    schedule: Schedule
    unstable: bool = False


@dataclass(frozen=True)
class DemodResult:
    a1_minus_est: complex
    periods_averaged: int
    drift_metric: float
    converged: bool
    windows: int
    sample_adjustment: float = 0.0
    window_estimates: tuple = field(default=(), repr=False)


def _fastest_rate(ss, p, delta):
    return max(abs(delta), p.omega_m1, p.omega_m2, p.kappa, abs(ss.Delta_c))


def integration_schedule(ss: SteadyState, p: PhysicalParams, d: DerivedCouplings, delta: float,
                         rtol: float = DEFAULT_RTOL) -> Schedule:
    """Choose ``dt`` and the run length from an error model of RK4.

    RK4 shifts a mode of frequency w by ~ w (w h)^4 / 120. Near a mechanical
    resonance of width gamma that shift is amplified by w / max(|w - delta|,
    gamma/2). The start-up transient of mode i decays as e^{-gamma_i t / 2}
    with an initial weight set by how close delta is to resonance.
    """
    delta = abs(float(delta))
    h = TWO_PI / _fastest_rate(ss, p, delta) / MIN_STEPS_PER_PERIOD
    t_cut = 0.0
    modes = [(p.omega_m1, p.gamma1), (p.omega_m2, p.gamma2)]
    for w, gam in modes:
        detune = max(abs(w - delta), 0.5 * gam)
        amp = w / detune
        h = min(h, (120.0 * rtol / (amp * CANCELLATION_HEADROOM)) ** 0.25 / w)
        weight = CANCELLATION_HEADROOM * (0.5 * gam / detune) / rtol
        if weight > 1.0:
            t_cut = max(t_cut, 2.0 * math.log(weight) / gam)
    cav = math.hypot(p.kappa, ss.Delta_c)
    amp = cav / max(abs(abs(ss.Delta_c) - delta), p.kappa)
    h = min(h, (120.0 * rtol / (amp * CANCELLATION_HEADROOM)) ** 0.25 / cav)
    t_cut = max(t_cut, math.log(CANCELLATION_HEADROOM / rtol) / p.kappa)

    slowest = min(p.gamma1, p.gamma2, p.kappa)
    window = 1.0 / slowest
    t_end = max(t_cut + 2.0 * window, MIN_DECAY_TIMES / slowest)
    if delta > 0.0:
        period = TWO_PI / delta
        spp = max(MIN_STEPS_PER_PERIOD, math.ceil(period / h))
        dt = period / spp
    else:
        spp = 0
        dt = h
    n_steps = math.ceil(t_end / dt)
    return Schedule(dt=dt, steps_per_period=spp, n_steps=n_steps, t_end=n_steps * dt, t_cut=t_cut)


def _forcing_tables(delta, dt, spp, p):
    """Probe phasor and drive cosines at half-step resolution over one period."""
    if spp == 0:
        k = np.zeros(1)
    else:
        k = np.arange(2 * spp)
    t = 0.5 * dt * k
    if spp:
        # phase of whole periods: exact multiples of pi / spp
        theta = np.pi * k / spp
    else:
        theta = delta * t
    probe = np.exp(-1j * theta)
    return probe, np.cos(theta + p.phi_m1), np.cos(theta + p.phi_m2)


def _check_preconditions(ss, p, delta, t_end, dt):
    limit = TWO_PI / _fastest_rate(ss, p, delta) / MIN_STEPS_PER_PERIOD
    if dt > limit * (1.0 + 1e-12):
        raise ValueError(f"dt={dt:.3e} s exceeds {MIN_STEPS_PER_PERIOD} steps per fastest period ({limit:.3e} s)")
    need = MIN_DECAY_TIMES / min(p.gamma1, p.gamma2, p.kappa)
    if t_end < need * (1.0 - 1e-12):
        raise ValueError(f"t_end={t_end:.3e} s is shorter than the transient bound {need:.3e} s")


def _is_growing(x: np.ndarray, chunks: int = 10) -> bool:
    if x.size < 10 * chunks:
        return False
    tail = x[-(x.size // 5):]
    env = np.array([np.max(np.abs(c)) for c in np.array_split(tail, chunks)])
    return bool(np.all(np.diff(env) > 0.0) and env[-1] > 1.01 * env[0])


def integrate_fluctuations(ss: SteadyState, p: PhysicalParams, d: DerivedCouplings, delta: float,
                           t_end: float | None = None, dt: float | None = None,
                           record_from: float | None = None, rtol: float = DEFAULT_RTOL) -> Trajectory:
    """Integrate the fluctuation equations from zero initial conditions.

    Parameters
    ----------
    ss, p, d : steady state, parameters and couplings
    delta : float
        Pump-probe detuning in rad/s; also the frequency of the mechanical
        drives.
    t_end, dt : float, optional
        Override the automatic :func:`integration_schedule`. Both must honour
        the preconditions (>= 50 steps per fastest period, t_end >= 10 decay
        times).
    record_from : float, optional
        Time from which samples are kept. Defaults to the transient cut of
        the schedule; pass 0 to keep the full run.

    Raises
    ------
    IntegrationError
        If the state becomes non-finite; carries the step index.
    """
    delta = float(delta)
    sched = integration_schedule(ss, p, d, delta, rtol)
    if dt is not None or t_end is not None:
        dt = sched.dt if dt is None else float(dt)
        t_end = sched.t_end if t_end is None else float(t_end)
        _check_preconditions(ss, p, delta, t_end, dt)
        if delta > 0.0:
            spp_f = TWO_PI / (delta * dt)
            spp = int(round(spp_f)) if abs(spp_f - round(spp_f)) < 1e-9 * spp_f else 0
        else:
            spp = 0
        n_steps = math.ceil(t_end / dt - 1e-9)
        sched = Schedule(dt=dt, steps_per_period=spp, n_steps=n_steps, t_end=n_steps * dt,
                         t_cut=min(sched.t_cut, 0.7 * n_steps * dt))
    start_t = sched.t_cut if record_from is None else float(record_from)
    rec_start = min(max(int(math.floor(start_t / sched.dt)), 0), sched.n_steps)
    n_rec = sched.n_steps - rec_start + 1

    if sched.steps_per_period or delta == 0.0:
        probe, c1, c2 = _forcing_tables(delta, sched.dt, sched.steps_per_period, p)
    else:
        # incommensurate step: tabulate the whole run
        k = np.arange(2 * sched.n_steps + 1)
        theta = delta * 0.5 * sched.dt * k
        probe, c1, c2 = np.exp(-1j * theta), np.cos(theta + p.phi_m1), np.cos(theta + p.phi_m2)

    out = [np.empty(n_rec, dtype=complex)] + [np.empty(n_rec) for _ in range(4)]
    K = complex(p.kappa, ss.Delta_c - d.G1 * ss.Q1s - d.G2 * ss.Q2s)
    status = _rk4_kernel(sched.n_steps, sched.dt, rec_start, probe, c1, c2,
                         K, d.eps_pr, complex(ss.a_s), d.G1, d.G2, p.omega_m1, p.omega_m2,
                         p.gamma1, p.gamma2, d.Sprime_m1 / HBAR, d.Sprime_m2 / HBAR, *out)
    if status >= 0:
        raise IntegrationError("non-finite fluctuation state", status)
    t = (rec_start + np.arange(n_rec)) * sched.dt
    unstable = any(_is_growing(x) for x in out)
    return Trajectory(t, *out, dt=sched.dt, delta=delta, schedule=sched, unstable=unstable)


def project(t: np.ndarray, x: np.ndarray, frequency: float, n_samples: int) -> complex:
    """(1/T) * trapezoid integral of ``x e^{+i frequency t}`` over ``n_samples`` steps."""
    w = x[: n_samples + 1] * np.exp(1j * frequency * t[: n_samples + 1])
    total = w.sum() - 0.5 * (w[0] + w[-1])
    return complex(total / n_samples)


def demodulate(series: Trajectory, delta: float | None = None, window_periods: int = 1,
               window_samples: int | None = None, signal: str = "da", sign: int = +1,
               threshold: float = DRIFT_THRESHOLD) -> DemodResult:
    """Extract the coefficient of ``e^{-i sign delta t}`` from a recorded series.

    The recorded span is tiled backwards from its end by windows of
    ``window_periods`` whole periods; the estimate is the average over all
    complete windows and the drift metric compares the last two.

    Raises
    ------
    ValueError
        If fewer than two complete windows are available.
    """
    delta = series.delta if delta is None else float(delta)
    x = getattr(series, signal)
    t = series.t
    dt = series.dt
    adjustment = 0.0
    if window_samples is None:
        if delta == 0.0:
            raise ValueError("window_samples is required at zero detuning")
        exact = window_periods * TWO_PI / (delta * dt)
        window_samples = max(int(round(exact)), 1)
        adjustment = window_samples - exact
        if abs(adjustment) < 1e-9 * exact:
            adjustment = 0.0
    n_windows = (x.size - 1) // window_samples
    if n_windows < 2:
        raise ValueError(f"need at least two complete windows, have {n_windows}")
    first = x.size - 1 - n_windows * window_samples
    estimates = []
    for w in range(n_windows):
        lo = first + w * window_samples
        estimates.append(project(t[lo:], x[lo:], sign * delta, window_samples))
    estimates = np.array(estimates)
    last, prev = estimates[-1], estimates[-2]
    drift = abs(last - prev) / abs(last) if last != 0 else abs(last - prev)
    return DemodResult(
        a1_minus_est=complex(estimates.mean()),
        periods_averaged=n_windows * window_periods,
        drift_metric=float(drift),
        converged=bool(drift < threshold),
        windows=n_windows,
        sample_adjustment=float(adjustment),
        window_estimates=tuple(estimates),
    )


def _default_window(traj: Trajectory, p: PhysicalParams):
    """Window of whole periods spanning roughly a tenth of the recorded record."""
    n = traj.t.size - 1
    if traj.delta == 0.0:
        return dict(window_samples=max(n // 10, 1))
    spp = TWO_PI / (traj.delta * traj.dt)
    periods = max(int(n / 10 // spp), 1)
    return dict(window_periods=periods)


def timedomain_point(ss: SteadyState, p: PhysicalParams, d: DerivedCouplings, delta: float,
                     rtol: float = DEFAULT_RTOL):
    """Integrate and demodulate at one detuning.

    Returns ``(SidebandSolution, DemodResult)``. At ``delta == 0`` the two
    field sidebands coincide, so ``a1_minus`` then holds their sum and
    ``a1_plus`` is zero.
    """
    traj = integrate_fluctuations(ss, p, d, delta, rtol=rtol)
    win = _default_window(traj, p)
    res = demodulate(traj, delta, **win)
    if delta == 0.0:
        amps = [res.a1_minus_est, 0j,
                demodulate(traj, delta, signal="dQ1", **win).a1_minus_est, 0j,
                demodulate(traj, delta, signal="dQ2", **win).a1_minus_est, 0j]
    else:
        a_plus = demodulate(traj, delta, sign=-1, **win).a1_minus_est
        q1 = demodulate(traj, delta, signal="dQ1", **win).a1_minus_est
        q2 = demodulate(traj, delta, signal="dQ2", **win).a1_minus_est
        amps = [res.a1_minus_est, a_plus, q1, np.conj(q1), q2, np.conj(q2)]
    sol = SidebandSolution(*amps, delta=delta, kappa=p.kappa, solver_tag=TIMEDOMAIN)
    return sol, res


def worker_count() -> int:
    """Thread cap from ``FANO_FORGE_THREADS`` (0 or unset: one per CPU)."""
    raw = os.environ.get("FANO_FORGE_THREADS", "0").strip() or "0"
    n = int(raw)
    if n < 0:
        raise ValueError("FANO_FORGE_THREADS must be >= 0")
    return n or (os.cpu_count() or 1)


def timedomain_sidebands(ss: SteadyState, p: PhysicalParams, d: DerivedCouplings, deltas,
                         rtol: float = DEFAULT_RTOL, threads: int | None = None):
    """Time-domain solutions over a grid of detunings, in input order.

    Returns ``(SidebandSolution, list[DemodResult])`` with array fields.
    """
    deltas = np.atleast_1d(np.asarray(deltas, dtype=float))
    threads = worker_count() if threads is None else threads

    def one(delta):
        return timedomain_point(ss, p, d, float(delta), rtol)

    if threads > 1 and deltas.size > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, deltas))
    else:
        results = [one(x) for x in deltas]
    amps = np.array([r[0].amplitudes() for r in results])
    sol = SidebandSolution(*(amps[:, j] for j in range(6)), delta=deltas, kappa=p.kappa,
                           solver_tag=TIMEDOMAIN)
    return sol, [r[1] for r in results]
