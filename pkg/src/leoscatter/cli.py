"""Command-line front end emitting plot-ready CSV.

Every output starts with ``#`` metadata: the tool version, the fully
resolved configuration as ``# key=value`` lines, and result notes as
``# key: value``. The file itself can be passed back through ``--config``
to reproduce it.
"""
from __future__ import annotations

import argparse
import io
import math
import sys
from dataclasses import replace
from importlib import metadata
from pathlib import Path

import numpy as np

from . import montecarlo
from .angular_pdf import AzimuthSupport, JointAoaPdf, marginal_azimuth, marginal_elevation, joint_pdf
from .delay_stats import DEFAULT_SCHEDULE, DelaySpreadSchedule, excess_moments
from .exceptions import UnreachableTargetError
from .geometry import SPEED_OF_LIGHT, EllipsoidAxes, delay_closure_axes, max_relative_delay
from .pipeline import DEFAULT_HEIGHT, environment_for, fold_degrees, solve_elevation, doppler_spectrum
from .spectrum import compose_rician

PROG = "leoscatter"
EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 2, 3
# options never written into the embedded config
_NOT_CONFIG = {"command", "config", "out"}


def _version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "unknown"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(x).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return "%.9g" % x


class CsvTable:
    """Header, rows and leading comment lines; floats at 9 significant digits."""

    def __init__(self, columns):
        self.columns = list(columns)
        self.comments: list[str] = []
        self.rows: list[str] = []

    def note(self, text: str):
        self.comments.append(text)

    def add(self, *values, comment: str | None = None):
        if len(values) != len(self.columns):
            raise ValueError("row width does not match the header")
        if comment:
            self.rows.append(f"# {comment}")
        self.rows.append(",".join(_fmt(v) for v in values))

    def add_many(self, *columns):
        for row in zip(*columns):
            self.add(*row)

    def render(self) -> str:
        buf = io.StringIO()
        for c in self.comments:
            buf.write(f"# {c}\n")
        buf.write(",".join(self.columns) + "\n")
        for r in self.rows:
            buf.write(r + "\n")
        return buf.getvalue()


# ---------------------------------------------------------------- parsing

def _degrees_interval(text: str):
    try:
        lo, hi = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO,HI in degrees, got {text!r}") from None
    return lo, hi


def _axes_triplet(text: str):
    try:
        a, b, c = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected A,B,C in meters, got {text!r}") from None
    return a, b, c


def _count(text: str) -> int:
    value = float(text)
    if value != int(value):
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    return int(value)


def _add_common(p, elevation=True):
    if elevation:
        p.add_argument("--elevation", type=float, help="satellite elevation in degrees, 0 to 180")
    p.add_argument("--height", type=float, default=DEFAULT_HEIGHT, help="maximum scatterer height (m)")
    p.add_argument("--rms-delay-ns", type=float, help="RMS delay spread target; schedule value if omitted")
    p.add_argument("--max-delay-ns", type=float, help="maximum relative delay; selects the delay closure")
    p.add_argument("--ratio", type=float, default=0.6, help="b/a for the ratio closure")
    p.add_argument("--schedule", help="CSV with elevation_deg,rms_delay_ns")
    p.add_argument("--out", help="output file (stdout when omitted)")
    p.add_argument("--config", help="key=value file; command-line flags take precedence")


def _add_geometry_override(p):
    p.add_argument("--axes", type=_axes_triplet, help="use semi-axes A,B,C (m) instead of solving")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog=PROG, description="Semi-ellipsoid scatterer channel model")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("geometry", help="solve semi-axes at one elevation")
    _add_common(p)

    p = sub.add_parser("sweep", help="solve semi-axes over an elevation range")
    _add_common(p, elevation=False)
    p.add_argument("--start", type=float, default=0.0)
    p.add_argument("--end", type=float, default=90.0)
    p.add_argument("--step", type=float, default=1.0)

    p = sub.add_parser("delay-stats", help="excess-delay moments and RMS delay spread")
    _add_common(p)
    _add_geometry_override(p)

    p = sub.add_parser("pdf", help="angle-of-arrival densities")
    _add_common(p)
    _add_geometry_override(p)
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--joint", dest="kind", action="store_const", const="joint")
    mode.add_argument("--marginal-azimuth", dest="kind", action="store_const", const="azimuth")
    mode.add_argument("--marginal-elevation", dest="kind", action="store_const", const="elevation")
    p.add_argument("--points", type=_count, default=181, help="grid points per angle")
    p.add_argument("--support", type=_degrees_interval, default=(0.0, 360.0))
    p.set_defaults(kind="joint")

    for name, text in (("psd", "Doppler power spectral density"),
                       ("compose", "Doppler PSD with a line-of-sight component")):
        p = sub.add_parser(name, help=text)
        _add_common(p)
        _add_geometry_override(p)
        p.add_argument("--method", default="binned")
        p.add_argument("--support", type=_degrees_interval, default=(0.0, 360.0))
        p.add_argument("--bins", type=_count, default=201)
        if name == "compose":
            p.add_argument("--k-factor", type=float, default=1.0)
            p.add_argument("--f-los", type=float, default=0.0, help="line frequency over f_d")

    p = sub.add_parser("mc", help="Monte Carlo scatterer draw")
    _add_common(p)
    _add_geometry_override(p)
    p.add_argument("--samples", type=_count, default=1_000_000)
    p.add_argument("--seed", type=_count, default=42)
    p.add_argument("--histogram", type=_count, default=0,
                   help="write an n-bin Doppler histogram instead of the rays")

    p = sub.add_parser("synth", help="sum-of-rays waveform")
    _add_common(p)
    _add_geometry_override(p)
    p.add_argument("--rays", type=_count, default=10_000)
    p.add_argument("--duration", type=float, default=200.0, help="seconds")
    p.add_argument("--rate", type=float, default=8.0, help="sample rate (Hz)")
    p.add_argument("--fd", type=float, default=1.0, help="maximum Doppler shift (Hz)")
    p.add_argument("--seed", type=_count, default=42)
    return parser


def read_config(path) -> dict[str, str]:
    """``key=value`` lines; an optional leading ``#`` is allowed, other lines are skipped.

    Reading stops at the first line that is neither blank nor a comment, so a
    CSV produced by this tool can serve as its own config.
    """
    entries = {}
    with open(path) as fh:
        for raw in fh:
            line = raw.strip()
            if not line:
                continue
            commented = line.startswith("#")
            if not commented and "=" not in line:
                break
            body = line.lstrip("#").strip()
            if "=" in body:
                key, value = body.split("=", 1)
                entries[key.strip().replace("_", "-")] = value.strip()
            elif not commented:
                break
    return entries


def _subparser(parser, command):
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices[command]
    raise KeyError(command)


def parse(argv) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        try:
            entries = read_config(args.config)
        except OSError as exc:
            raise UsageError(f"cannot read config {args.config}: {exc.strerror}") from None
        if entries.pop("command", args.command) != args.command:
            raise UsageError(f"config {args.config} was written for another command")
        sub = _subparser(parser, args.command)
        known = {a.dest: a for a in sub._actions}
        defaults = {}
        for key, text in entries.items():
            dest = key.replace("-", "_")
            if dest not in known or dest in _NOT_CONFIG:
                raise UsageError(f"unknown config key {key!r}")
            action = known[dest]
            defaults[dest] = action.type(text) if action.type else text
        sub.set_defaults(**defaults)
        args = parser.parse_args(argv)
    if args.command == "pdf" and args.kind not in _PDF_COLUMNS:
        raise UsageError(f"unknown pdf kind {args.kind!r}")
    return args


def _config_value(value) -> str:
    # floats round-trip exactly so a re-run reproduces the output
    if isinstance(value, float):
        return repr(value)
    return value if isinstance(value, str) else _fmt(value)


def resolved_config(args) -> list[str]:
    lines = [f"command={args.command}"]
    for key, value in sorted(vars(args).items()):
        if key in _NOT_CONFIG or value is None:
            continue
        if isinstance(value, tuple):
            text = ",".join(_config_value(v) for v in value)
        else:
            text = _config_value(value)
        lines.append(f"{key.replace('_', '-')}={text}")
    return lines


# ---------------------------------------------------------------- commands

def _schedule(args):
    return DelaySpreadSchedule.from_csv(args.schedule) if args.schedule else DEFAULT_SCHEDULE


def _require_elevation(args) -> float:
    if args.elevation is None:
        raise ValueError("--elevation is required")
    fold_degrees(args.elevation)
    return args.elevation


def _env_kwargs(args):
    return dict(height=args.height, schedule=_schedule(args), rms_delay_ns=args.rms_delay_ns,
                max_delay_ns=args.max_delay_ns, axis_ratio=args.ratio)


def _axes(args, table: CsvTable | None = None) -> EllipsoidAxes:
    elevation = _require_elevation(args)
    if getattr(args, "axes", None) is not None:
        return EllipsoidAxes(*args.axes)
    axes = solve_elevation(elevation, **_env_kwargs(args)).axes
    if table is not None:
        table.note(f"axes_m: {_fmt(axes.a)},{_fmt(axes.b)},{_fmt(axes.c)}")
    return axes


def _support(args) -> AzimuthSupport:
    lo, hi = args.support
    return AzimuthSupport.from_degrees((lo, hi))


_GEOMETRY_COLUMNS = ("elevation_deg", "a_m", "b_m", "c_m", "sigma_tau_ns", "max_delay_ns")


def _geometry_row(table, elevation, args) -> bool:
    try:
        solved = solve_elevation(elevation, **_env_kwargs(args))
    except UnreachableTargetError as exc:
        a = c = math.nan
        if args.max_delay_ns is not None:
            a, c = delay_closure_axes(environment_for(elevation, **_env_kwargs(args)))
        table.add(elevation, a, math.nan, c, math.nan, math.nan,
                  comment=f"error elevation_deg={_fmt(elevation)}: {type(exc).__name__}: {exc}")
        return False
    ax = solved.axes
    table.add(elevation, ax.a, ax.b, ax.c, solved.rms_delay_spread() * 1e9,
              solved.max_relative_delay() * 1e9)
    return True


def cmd_geometry(args, table):
    return EXIT_OK if _geometry_row(table, _require_elevation(args), args) else EXIT_NUMERIC


def cmd_sweep(args, table):
    if not 0 <= args.start <= args.end <= 90:
        raise ValueError("sweep needs 0 <= start <= end <= 90")
    if not args.step > 0:
        raise ValueError("sweep step must be positive")
    count = int(math.floor((args.end - args.start) / args.step + 1e-9)) + 1
    failures = 0
    for k in range(count):
        failures += not _geometry_row(table, args.start + k * args.step, args)
    table.note(f"failed_rows: {failures}")
    return EXIT_NUMERIC if failures else EXIT_OK


def cmd_delay_stats(args, table):
    axes = _axes(args)
    elevation = math.radians(fold_degrees(args.elevation)[0])
    m1, m2 = excess_moments(axes, elevation)
    sigma = math.sqrt(max(m2 - m1 * m1, 0.0)) / SPEED_OF_LIGHT
    table.add(args.elevation, axes.a, axes.b, axes.c, m1, m2, sigma * 1e9,
              max_relative_delay(axes, elevation) * 1e9)
    return EXIT_OK


def cmd_pdf(args, table):
    if args.points < 2:
        raise ValueError("--points must be at least 2")
    axes = _axes(args, table)
    pdf = JointAoaPdf(axes, math.radians(fold_degrees(args.elevation)[0]), _support(args))
    table.note(f"support_mass: {_fmt(pdf.support_mass)}")
    alpha = np.linspace(0.0, 2 * math.pi, args.points)
    beta = np.linspace(0.0, 0.5 * math.pi, args.points)
    if args.kind == "azimuth":
        table.add_many(np.degrees(alpha), marginal_azimuth(pdf, alpha))
    elif args.kind == "elevation":
        table.add_many(np.degrees(beta), marginal_elevation(pdf, beta))
    else:
        A, B = np.meshgrid(alpha, beta, indexing="ij")
        table.add_many(np.degrees(A).ravel(), np.degrees(B).ravel(), joint_pdf(pdf, A, B).ravel())
    return EXIT_OK


def _spectrum(args, table):
    axes = _axes(args, table)
    spectrum = doppler_spectrum(axes, args.elevation, args.method, _support(args), args.bins)
    below, above = spectrum.density_near_zero()
    table.note(f"support_mass: {_fmt(spectrum.support_mass)}")
    table.note(f"density_0minus: {_fmt(below)}")
    table.note(f"density_0plus: {_fmt(above)}")
    return spectrum


def cmd_psd(args, table):
    spectrum = _spectrum(args, table)
    table.add_many(spectrum.freq_grid, spectrum.density)
    return EXIT_OK


def cmd_compose(args, table):
    spectrum = compose_rician(_spectrum(args, table), args.k_factor, args.f_los)
    table.note(f"continuous_power: {_fmt(spectrum.continuous_power)}")
    for line in spectrum.lines:
        table.note(f"line {_fmt(line.freq)} {_fmt(line.power)}")
    table.add_many(spectrum.freq_grid, spectrum.density)
    return EXIT_OK


def _ensemble(args, table, n):
    axes = _axes(args, table)
    folded, _ = fold_degrees(args.elevation)
    ens = montecarlo.sample_rays(axes, math.radians(folded), n, args.seed)
    if folded != args.elevation:
        ens = _mirror(ens)
    return ens


def _mirror(ens):
    # past zenith the geometry is the folded one seen from the other side
    return replace(ens, alpha=np.mod(math.pi - ens.alpha, 2 * math.pi), doppler_norm=-ens.doppler_norm)


def cmd_mc(args, table):
    if args.samples < 1:
        raise ValueError("--samples must be at least 1")
    ens = _ensemble(args, table, args.samples)
    mean, rms, peak = montecarlo.empirical_delay_stats(ens)
    table.note(f"acceptance: {_fmt(ens.acceptance)}")
    table.note(f"excess_delay_mean_s: {_fmt(mean)}")
    table.note(f"excess_delay_rms_s: {_fmt(rms)}")
    table.note(f"excess_delay_max_s: {_fmt(peak)}")
    if args.histogram:
        hist = montecarlo.empirical_doppler(ens, args.histogram)
        table.columns = ["f_over_fd", "density"]
        table.add_many(hist.centers, hist.densities)
    else:
        table.add_many(ens.alpha, ens.beta, ens.r, ens.excess_delay, ens.doppler_norm)
    return EXIT_OK


def cmd_synth(args, table):
    if args.rays < 1:
        raise ValueError("--rays must be at least 1")
    ens = _ensemble(args, table, args.rays)
    field = montecarlo.synthesize_waveform(ens, args.fd, args.duration, args.rate)
    t = np.arange(field.size) / args.rate
    table.add_many(t, field.real, field.imag)
    return EXIT_OK


COMMANDS = {
    "geometry": (cmd_geometry, _GEOMETRY_COLUMNS),
    "sweep": (cmd_sweep, _GEOMETRY_COLUMNS),
    "delay-stats": (cmd_delay_stats, ("elevation_deg", "a_m", "b_m", "c_m", "mean_excess_m",
                                      "second_moment_m2", "sigma_tau_ns", "max_delay_ns")),
    "pdf": (cmd_pdf, None),
    "psd": (cmd_psd, ("f_over_fd", "density")),
    "compose": (cmd_compose, ("f_over_fd", "density")),
    "mc": (cmd_mc, ("alpha", "beta", "r", "excess_delay_s", "doppler_norm")),
    "synth": (cmd_synth, ("t", "re", "im")),
}

_PDF_COLUMNS = {"joint": ("alpha_deg", "beta_deg", "density"),
                "azimuth": ("alpha_deg", "density"),
                "elevation": ("beta_deg", "density")}


def run(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parse(argv)
    except UsageError as exc:
        print(f"{PROG}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)

    handler, columns = COMMANDS[args.command]
    table = CsvTable(columns or _PDF_COLUMNS[args.kind])
    table.note(f"{PROG} {_version()}")
    for line in resolved_config(args):
        table.note(line)
    try:
        code = handler(args, table)
    except ArithmeticError as exc:
        print(f"{PROG}: numerical error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, OSError) as exc:
        print(f"{PROG}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    text = table.render()
    if args.out:
        try:
            Path(args.out).write_text(text)
        except OSError as exc:
            print(f"{PROG}: error: cannot write {args.out}: {exc.strerror}", file=sys.stderr)
            return EXIT_USAGE
    else:
        sys.stdout.write(text)
    if code == EXIT_NUMERIC:
        print(f"{PROG}: one or more solves did not converge", file=sys.stderr)
    return code


def main():
    sys.exit(run())
