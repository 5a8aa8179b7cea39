"""Command-line front end, config files, spectrum CSV, feature JSON and SVG plots.

Config files hold one ``key = value`` per line with ``#`` comments. Frequency
fields are written in Hz and converted to rad/s on load; a value may instead
carry an explicit ``rad/s`` suffix, which the writer uses whenever no decimal
Hz value reproduces the angular frequency bit for bit.
"""

from __future__ import annotations

import argparse
import configparser
import dataclasses
import json
import math
import sys
from pathlib import Path

import numpy as np

from .constants import TWO_PI
from .params import FREQUENCY_FIELDS, PAPER_DEFAULTS, PhysicalParams, field_names

CSV_HEADER = "delta_pr_over_Omega,re_eta_as,im_eta_as"
RAD_SUFFIX = "rad/s"
_BOOL_FIELDS = ("pin_effective_detuning",)


def _format_float(x: float) -> str:
    return repr(float(x))


def _exact_hz(omega: float) -> str | None:
    """Shortest decimal Hz string whose 2pi multiple equals ``omega`` exactly."""
    hz = omega / TWO_PI
    for _ in range(4):
        if float(repr(hz)) * TWO_PI == omega:
            return repr(hz)
        hz = math.nextafter(hz, math.inf if hz * TWO_PI < omega else -math.inf)
    return None


def dumps_config(p: PhysicalParams) -> str:
    lines = ["# fano-forge parameters; frequencies in Hz unless marked rad/s"]
    for name in field_names():
        v = getattr(p, name)
        if name in _BOOL_FIELDS:
            text = "true" if v else "false"
        elif name in FREQUENCY_FIELDS:
            hz = _exact_hz(v)
            text = hz if hz is not None else f"{_format_float(v)} {RAD_SUFFIX}"
        else:
            text = _format_float(v)
        lines.append(f"{name} = {text}")
    return "\n".join(lines) + "\n"


def _parse_value(name: str, raw: str):
    raw = raw.strip()
    if name in _BOOL_FIELDS:
        low = raw.lower()
        if low in ("true", "1", "yes", "on"):
            return True
        if low in ("false", "0", "no", "off"):
            return False
        raise ValueError(f"{name}: expected a boolean, got {raw!r}")
    angular = False
    if raw.endswith(RAD_SUFFIX):
        if name not in FREQUENCY_FIELDS:
            raise ValueError(f"{name}: unit suffix only allowed on frequencies")
        raw, angular = raw[: -len(RAD_SUFFIX)].strip(), True
    try:
        v = float(raw)
    except ValueError:
        raise ValueError(f"{name}: not a number: {raw!r}") from None
    if name in FREQUENCY_FIELDS and not angular:
        v *= TWO_PI
    return v


def loads_config(text: str, source: str = "<string>") -> PhysicalParams:
    """Parse a config; unspecified fields take the macroscopic defaults.

    Without ``P_probe`` the shared reference calibration is used.
    """
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",), interpolation=None)
    cp.optionxform = str
    try:
        cp.read_string("[params]\n" + text, source=source)
    except configparser.Error as exc:
        raise ValueError(f"{source}: {exc}") from None
    known = set(field_names())
    values = dict(PAPER_DEFAULTS)
    for name, raw in cp["params"].items():
        if name not in known:
            raise ValueError(f"{source}: unknown parameter {name!r}")
        values[name] = _parse_value(name, raw)
    if "P_probe" not in values:
        from .sweep import reference_probe_power
        values["P_probe"] = reference_probe_power()
    return PhysicalParams(**values)


def load_config(path) -> PhysicalParams:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot read config {path}: {exc.strerror}") from exc
    return loads_config(text, str(path))


def dump_config(p: PhysicalParams, path) -> None:
    _write_text(Path(path), dumps_config(p))


def _write_text(path: Path, text: str) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror}") from exc


def spectrum_csv(spec) -> str:
    rows = [CSV_HEADER]
    for x, re, im in zip(spec.x, spec.re_eta, spec.im_eta):
        rows.append(f"{x:.17g},{re:.17g},{im:.17g}")
    return "\n".join(rows) + "\n"


def write_spectrum_csv(spec, path) -> None:
    _write_text(Path(path), spectrum_csv(spec))


def read_spectrum_csv(path) -> np.ndarray:
    """Rows of (delta_pr/Omega, Re, Im) as an (n, 3) array."""
    text = Path(path).read_text(encoding="utf-8")
    if not text.startswith(CSV_HEADER):
        raise ValueError(f"{path}: unexpected header")
    return np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)


def features_json(features, expected=(), **meta) -> str:
    doc = dict(meta)
    doc["features"] = [dataclasses.asdict(f) for f in features]
    doc["expected_features"] = [dataclasses.asdict(f) for f in expected]
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def write_features_json(features, path, expected=(), **meta) -> None:
    _write_text(Path(path), features_json(features, expected, **meta))


def write_trajectory_csv(traj, path) -> None:
    """Time series of the fluctuations, one row per recorded step."""
    cols = np.column_stack([traj.t, traj.da.real, traj.da.imag,
                            traj.dQ1, traj.dP1, traj.dQ2, traj.dP2])
    lines = ["t,re_da,im_da,dQ1,dP1,dQ2,dP2"]
    lines += [",".join(f"{v:.17g}" for v in row) for row in cols]
    _write_text(Path(path), "\n".join(lines) + "\n")


# plotting

_W, _H = 720, 440
_ML, _MR, _MT, _MB = 70, 20, 20, 50


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    span = hi - lo
    if span <= 0:
        return [lo]
    raw = span / n
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=10 * mag)
    start = math.ceil(lo / step) * step
    out, v = [], start
    while v <= hi + 1e-9 * span:
        out.append(0.0 if abs(v) < 1e-12 * span else v)
        v += step
    return out


def plot_svg(spec, features=()) -> str:
    """Standalone SVG of Re(eta_as) against delta_pr/Omega."""
    x = np.asarray(spec.x, dtype=float)
    y = np.asarray(spec.re_eta, dtype=float)
    if x.size == 0:
        raise ValueError("cannot plot an empty spectrum")
    x0, x1 = float(x.min()), float(x.max())
    y0, y1 = float(y.min()), float(y.max())
    if x1 == x0:
        x0, x1 = x0 - 1.0, x1 + 1.0
    pad = 0.05 * (y1 - y0) if y1 > y0 else 1.0
    y0, y1 = y0 - pad, y1 + pad
    pw, ph = _W - _ML - _MR, _H - _MT - _MB

    def sx(v):
        return _ML + (v - x0) / (x1 - x0) * pw

    def sy(v):
        return _MT + (y1 - v) / (y1 - y0) * ph

    pts = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in zip(x, y))
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}" font-family="sans-serif" font-size="12">',
        f'<rect x="{_ML}" y="{_MT}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for t in _ticks(x0, x1):
        out.append(f'<line x1="{sx(t):.2f}" y1="{_MT + ph}" x2="{sx(t):.2f}" y2="{_MT + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{sx(t):.2f}" y="{_MT + ph + 18}" text-anchor="middle">{t:g}</text>')
    for t in _ticks(y0, y1):
        out.append(f'<line x1="{_ML - 5}" y1="{sy(t):.2f}" x2="{_ML}" y2="{sy(t):.2f}" stroke="black"/>')
        out.append(f'<text x="{_ML - 8}" y="{sy(t) + 4:.2f}" text-anchor="end">{t:g}</text>')
    out.append(f'<text x="{_ML + pw / 2}" y="{_H - 10}" text-anchor="middle">delta_pr/Omega</text>')
    out.append(f'<text x="16" y="{_MT + ph / 2}" text-anchor="middle" '
               f'transform="rotate(-90 16 {_MT + ph / 2})">Re(eta_as)</text>')
    out.append(f'<polyline fill="none" stroke="#1f4e9c" stroke-width="1.2" points="{pts}"/>')
    for f in features:
        colour = "#c0392b" if f.kind == "dip" else "#27862e"
        out.append(f'<circle class="feature {f.kind}" cx="{sx(f.location):.2f}" cy="{sy(f.value):.2f}" '
                   f'r="4" fill="none" stroke="{colour}"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_plot_svg(spec, features, path) -> None:
    _write_text(Path(path), plot_svg(spec, features))


# command line

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL = 0, 1, 2
MODES = ("sweep", "point", "calibrate", "oracle-check", "list-presets")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


@dataclasses.dataclass(frozen=True)
class RunRequest:
    mode: str
    preset: str | None = None
    config: str | None = None
    solver: str = "exact"
    points: int | None = None
    out: str | None = None
    plot: bool = False
    pin_effective_detuning: bool = False
    at: float | None = None
    mirror: int = 1
    allow_large_timedomain: bool = False


def _build_parser() -> argparse.ArgumentParser:
    from .sweep import SOLVER_CHOICES

    parser = _Parser(prog="fano-forge", description="Anti-Stokes response of a driven four-mirror cavity.")
    sub = parser.add_subparsers(dest="mode", required=True, parser_class=_Parser)

    def source(sp):
        g = sp.add_mutually_exclusive_group(required=True)
        g.add_argument("--preset", help="named scenario (see list-presets)")
        g.add_argument("--config", help="key = value parameter file")
        sp.add_argument("--pin-effective-detuning", action="store_true",
                        help="treat Delta_c as the target effective detuning")

    sp = sub.add_parser("sweep", help="Re/Im eta_as over a detuning grid")
    source(sp)
    sp.add_argument("--solver", choices=SOLVER_CHOICES, default="exact")
    sp.add_argument("--points", type=int, help="base grid points over [-1, 1]")
    sp.add_argument("--out", default=".", help="output directory")
    sp.add_argument("--plot", action="store_true", help="also write an SVG plot")
    sp.add_argument("--allow-large-timedomain", action="store_true",
                    help="lift the time-domain grid size limit")

    sp = sub.add_parser("point", help="response at one detuning")
    source(sp)
    sp.add_argument("--solver", choices=SOLVER_CHOICES, default="exact")
    sp.add_argument("--at", type=float, required=True, help="delta_pr/Omega")

    sp = sub.add_parser("calibrate", help="probe power balancing a mirror drive at line center")
    source(sp)
    sp.add_argument("--mirror", type=int, choices=(1, 2), default=1)

    sp = sub.add_parser("oracle-check", help="compare all solvers against the closed form")
    source(sp)
    sp.add_argument("--points", type=int, default=21, help="time-domain subgrid size")

    sub.add_parser("list-presets", help="print the scenario names")
    return parser


def parse_cli(argv) -> RunRequest:
    """Parse arguments into a :class:`RunRequest`.

    Raises
    ------
    UsageError
        For malformed arguments, conflicting flags or unknown presets.
    """
    from .presets import preset_names

    ns = _build_parser().parse_args(list(argv))
    req = RunRequest(**{k.replace("-", "_"): v for k, v in vars(ns).items()})
    if req.preset is not None and req.preset not in preset_names():
        raise UsageError(f"unknown preset {req.preset!r}; available presets:\n  "
                         + "\n  ".join(preset_names()))
    if req.points is not None and req.points < (5 if req.mode == "sweep" else 1):
        raise UsageError("--points is too small")
    return req


def _resolve(req: RunRequest):
    """(name, params, grid, expected features) for a compute request."""
    from .presets import get_preset
    from .sweep import default_grid

    if req.preset is not None:
        pr = get_preset(req.preset)
        name, p, grid, expected = pr.name, pr.params, pr.grid, pr.expected_features
    else:
        p = load_config(req.config)
        name, grid, expected = Path(req.config).stem, default_grid(p), ()
    if req.pin_effective_detuning:
        p = p.with_(pin_effective_detuning=True)
    if req.points is not None and req.mode == "sweep":
        grid = grid.with_points(req.points)
    return name, p, grid, expected


def _run(req: RunRequest, out=None) -> int:
    from . import sweep as sw
    from .presets import registry

    out = sys.stdout if out is None else out
    if req.mode == "list-presets":
        for pr in registry().values():
            label = f"fig. {pr.figure}" if pr.figure else ""
            out.write(f"{pr.name:<14} {label:<8} {pr.notes}".rstrip() + "\n")
        return EXIT_OK

    name, p, grid, expected = _resolve(req)

    if req.mode == "sweep":
        try:
            spec = sw.run_sweep(p, req.solver, grid, req.allow_large_timedomain)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        feats = sw.extract_features(spec)
        outdir = Path(req.out)
        outdir.mkdir(parents=True, exist_ok=True)
        stem = f"{name}_{req.solver}"
        write_spectrum_csv(spec, outdir / f"{stem}.csv")
        write_features_json(feats, outdir / f"{stem}.features.json", expected,
                            preset=name, solver=spec.solver_tag, params_digest=spec.params_digest)
        if req.plot:
            emit_plot_svg(spec, feats, outdir / f"{stem}.svg")
        out.write(f"{name}: {len(spec)} points, solver {spec.solver_tag}, digest {spec.params_digest}\n")
        for f in feats:
            out.write(f"  {f.kind:<4} at {f.location:+.6f}  Re(eta_as) = {f.value:.6g}\n")
        out.write(f"wrote {outdir / (stem + '.csv')}\n")
        return EXIT_OK

    if req.mode == "point":
        try:
            sol, ss, d = sw.solve_spectrum(p, np.array([req.at * grid.Omega + p.Delta_c]), req.solver)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        a = complex(np.atleast_1d(sol.a1_minus)[0])
        eta = 2.0 * p.kappa * a / d.eps_pr
        out.write(f"delta_pr/Omega = {req.at:.17g}\n")
        out.write(f"Re(eta_as) = {eta.real:.17g}\nIm(eta_as) = {eta.imag:.17g}\n")
        out.write(f"a1_minus = {a.real:.17g} {a.imag:+.17g}j\n")
        out.write(f"Delta_eff = {ss.Delta_eff:.17g} rad/s\n")
        return EXIT_OK

    if req.mode == "calibrate":
        s, phi = (p.s_m1, p.phi_m1) if req.mirror == 1 else (p.s_m2, p.phi_m2)
        try:
            power = sw.calibrate_probe_power(p, target=sw.CalibrationTarget(s, phi, req.mirror))
        except ValueError as exc:
            raise UsageError(f"{name}: {exc}") from None
        out.write(f"P_probe = {power:.17g} W\n")
        return EXIT_OK

    if req.mode == "oracle-check":
        rep = sw.oracle_check(p, points=req.points, grid=grid)
        tol = sw.ORACLE_TOLERANCES
        rows = [("linear_system", rep.linear_system), ("linearized", rep.linearized),
                ("timedomain", rep.timedomain)]
        out.write(f"{name}: closed form vs\n")
        for key, err in rows:
            verdict = "ok" if err < tol[key] else "FAIL"
            out.write(f"  {key:<14} max rel err {err:.3e}  (tol {tol[key]:.0e})  {verdict}\n")
        out.write(f"  time-domain: {rep.timedomain_points} points in {rep.timedomain_seconds:.2f} s\n")
        return EXIT_OK if rep.passed() else EXIT_NUMERICAL

    raise UsageError(f"unknown mode {req.mode!r}")


def main(argv=None) -> int:
    from .errors import ConvergenceError, IntegrationError, SingularityError

    argv = sys.argv[1:] if argv is None else argv
    try:
        return _run(parse_cli(argv))
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"fano-forge: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SingularityError, ConvergenceError, IntegrationError) as exc:
        print(f"fano-forge: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"fano-forge: {exc}", file=sys.stderr)
        return EXIT_USAGE
