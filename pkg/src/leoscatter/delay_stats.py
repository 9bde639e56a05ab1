"""Excess-path moments, RMS delay spread and the elevation/delay-spread schedule."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

from .exceptions import ConsistencyError
from .geometry import SPEED_OF_LIGHT, EllipsoidAxes
from .numerics import Bracket, QuadratureSpec, nodes_and_weights, refine_estimate

FULL_CIRCLE = Bracket(0.0, 2.0 * math.pi)
UPPER_HEMISPHERE = Bracket(0.0, 0.5 * math.pi)

# Default elevation (deg) -> RMS delay spread (ns) realisation for NLOS urban LEO links.
TABLE_I = (
    (0.0, 250.0),
    (10.0, 183.7667),
    (20.0, 125.1762),
    (30.0, 85.4138),
    (40.0, 63.7133),
    (50.0, 50.0438),
    (60.0, 40.9588),
    (70.0, 34.9798),
    (80.0, 31.5052),
    (90.0, 30.0),
)


@dataclass(frozen=True)
class DelaySpreadSchedule:
    """Piecewise-linear RMS delay spread (ns) as a function of elevation (deg)."""

    knots: tuple = TABLE_I

    def __post_init__(self):
        knots = tuple((float(e), float(s)) for e, s in self.knots)
        object.__setattr__(self, "knots", knots)
        if len(knots) < 2:
            raise ValueError("a schedule needs at least two knots")
        elev = np.array([k[0] for k in knots])
        if elev[0] != 0.0 or elev[-1] != 90.0 or np.any(np.diff(elev) <= 0):
            raise ValueError("schedule elevations must increase strictly from 0 to 90 degrees")
        if any(s <= 0 for _, s in knots):
            raise ValueError("schedule delay spreads must be positive")

    @property
    def elevations(self) -> np.ndarray:
        return np.array([k[0] for k in self.knots])

    @property
    def rms_delays_ns(self) -> np.ndarray:
        return np.array([k[1] for k in self.knots])

    @classmethod
    def from_csv(cls, path) -> "DelaySpreadSchedule":
        """Read a ``elevation_deg,rms_delay_ns`` table (``#`` lines are comments)."""
        with Path(path).open(newline="") as fh:
            rows = [r for r in csv.reader(line for line in fh if not line.lstrip().startswith("#")) if r]
        if not rows or [h.strip() for h in rows[0]] != ["elevation_deg", "rms_delay_ns"]:
            raise ValueError(f"{path}: expected header 'elevation_deg,rms_delay_ns'")
        try:
            knots = tuple((float(e), float(s)) for e, s in rows[1:])
        except ValueError as exc:
            raise ValueError(f"{path}: malformed row ({exc})") from None
        return cls(knots)


DEFAULT_SCHEDULE = DelaySpreadSchedule()


def delay_spread_target(elevation_deg: float, schedule: DelaySpreadSchedule = DEFAULT_SCHEDULE) -> float:
    """Interpolated RMS delay spread in nanoseconds."""
    if not 0.0 <= elevation_deg <= 90.0:
        raise ValueError(f"elevation must lie in [0, 90] degrees, got {elevation_deg!r}")
    return float(np.interp(elevation_deg, schedule.elevations, schedule.rms_delays_ns))


@lru_cache(maxsize=8)
def _direction_grid(spec: QuadratureSpec):
    # direction cosines over the upper hemisphere and the cos(beta)-weighted rule
    xa, wa = nodes_and_weights(FULL_CIRCLE, spec)
    xb, wb = nodes_and_weights(UPPER_HEMISPHERE, spec)
    A, B = np.meshgrid(xa, xb, indexing="ij")
    cb = np.cos(B)
    grid = {
        "dx": np.cos(A) * cb,
        "dy2": (np.sin(A) * cb) ** 2,
        "dz": np.sin(B),
        "w": np.outer(wa, wb) * cb,
    }
    for arr in grid.values():
        arr.flags.writeable = False
    return grid


def _excess_moments(axes: EllipsoidAxes, elevation: float, spec: QuadratureSpec):
    g = _direction_grid(spec)
    ce, se = math.cos(elevation), math.sin(elevation)
    xp = g["dx"] * ce
    xp += g["dz"] * se
    zp = g["dz"] * ce
    zp -= g["dx"] * se
    q = g["dy2"] * (1.0 / axes.b**2)
    zp *= zp
    zp *= 1.0 / axes.c**2
    q += zp
    zp = xp * xp
    zp *= 1.0 / axes.a**2
    q += zp
    r2 = np.reciprocal(q, out=q)
    one = np.subtract(1.0, xp, out=xp)
    w = r2 * r2
    w *= one
    w *= g["w"]
    abc = axes.a * axes.b * axes.c
    m1 = 3.0 / (8.0 * math.pi * abc) * np.sum(w)
    w *= one
    w *= np.sqrt(r2, out=r2)
    m2 = 3.0 / (10.0 * math.pi * abc) * np.sum(w)
    return m1, m2


def excess_moments(axes: EllipsoidAxes, elevation: float, spec: QuadratureSpec | None = None):
    """First and second moments of the excess path ``r - x'`` (m, m^2)."""
    spec = spec or QuadratureSpec()
    if not spec.refine:
        return _excess_moments(axes, elevation, spec)
    m1 = refine_estimate(lambda s: _excess_moments(axes, elevation, s)[0], spec)
    m2 = refine_estimate(lambda s: _excess_moments(axes, elevation, s)[1], spec)
    return m1, m2


def mean_excess_distance(axes: EllipsoidAxes, elevation: float, spec: QuadratureSpec | None = None) -> float:
    return float(excess_moments(axes, elevation, spec)[0])


def second_moment_excess(axes: EllipsoidAxes, elevation: float, spec: QuadratureSpec | None = None) -> float:
    return float(excess_moments(axes, elevation, spec)[1])


def rms_delay_spread(axes: EllipsoidAxes, elevation: float, spec: QuadratureSpec | None = None) -> float:
    """RMS delay spread in seconds for scatterers uniform in the semi-ellipsoid."""
    m1, m2 = excess_moments(axes, elevation, spec)
    var = m2 - m1 * m1
    if var < -1e-12 * max(m2, np.finfo(float).tiny):
        raise ConsistencyError(f"negative excess-path variance {var:.3e} m^2 (m1={m1:.6g}, m2={m2:.6g})")
    return math.sqrt(max(var, 0.0)) / SPEED_OF_LIGHT
