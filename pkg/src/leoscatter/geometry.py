"""Rotated semi-ellipsoid scatterer geometry.

The receiver sits at the origin of the global frame ``(x, y, z)`` with ``z``
up. The scatterer ellipsoid is centred on the receiver, its semi-major axis
``a`` points along the line of sight (elevation ``beta_ele`` in the x-z
plane), ``b`` is the cross-track axis and ``c`` the remaining axis. Only the
half above ground (``z >= 0``) holds scatterers.

Angles are radians and lengths meters throughout; delays are seconds.
"""
from __future__ import annotations

import math
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import constants, optimize

from .exceptions import (
    BracketError,
    ConsistencyError,
    DegenerateAngleError,
    InfeasibleGeometryError,
    UnreachableTargetError,
)
from .numerics import Bracket, QuadratureSpec, find_root

SPEED_OF_LIGHT = constants.c
DEFAULT_AXIS_RATIO = 0.6
HALF_PI = 0.5 * math.pi

# solver search settings
_EPS_FRACTION = 1e-3
_UPPER_FACTOR = 100.0
_SCAN_POINTS = 48
_SCAN_SPEC = QuadratureSpec(200)
_ZENITH_TOL = 1e-12
# relative residual below which a coarse extremum is re-checked at full resolution
_PEAK_MARGIN = 0.02


def fold_elevation(elevation: float) -> tuple[float, int]:
    """Map an elevation in [0, pi] to ``(folded, doppler_sign)``.

    Elevations past the zenith reuse the mirrored geometry with the Doppler
    scale negated.
    """
    elevation = float(elevation)
    if not 0.0 <= elevation <= math.pi:
        raise ValueError(f"elevation must lie in [0, pi] rad, got {elevation!r}")
    if elevation > HALF_PI:
        return math.pi - elevation, -1
    return elevation, 1


def _is_zenith(elevation: float) -> bool:
    return abs(elevation - HALF_PI) <= _ZENITH_TOL


@dataclass(frozen=True)
class EllipsoidAxes:
    a: float
    b: float
    c: float

    def __post_init__(self):
        for name in ("a", "b", "c"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ValueError(f"semi-axis {name} must be positive and finite, got {value!r}")

    @property
    def volume(self) -> float:
        """Volume of the upper half-ellipsoid."""
        return 2.0 / 3.0 * math.pi * self.a * self.b * self.c

    @property
    def isotropy(self) -> float:
        return min(self.a, self.b, self.c) / max(self.a, self.b, self.c)

    def as_array(self) -> np.ndarray:
        return np.array([self.a, self.b, self.c])


@dataclass(frozen=True)
class EnvironmentSpec:
    """Inputs of the axis solve at one elevation.

    Exactly one closure applies: ``max_delay`` (seconds) when given,
    otherwise the cross-track ratio ``b = axis_ratio * a``.
    """

    height: float
    elevation: float
    rms_delay: float
    max_delay: Optional[float] = None
    axis_ratio: float = DEFAULT_AXIS_RATIO

    def __post_init__(self):
        if not self.height > 0:
            raise ValueError(f"height must be positive, got {self.height!r}")
        fold_elevation(self.elevation)
        if not self.rms_delay > 0:
            raise ValueError(f"rms_delay must be positive, got {self.rms_delay!r}")
        if self.max_delay is not None and not self.max_delay > 0:
            raise ValueError(f"max_delay must be positive, got {self.max_delay!r}")
        if not 0 < self.axis_ratio <= 1:
            raise ValueError(f"axis_ratio must lie in (0, 1], got {self.axis_ratio!r}")

    @property
    def closure(self) -> str:
        return "ratio" if self.max_delay is None else "delay"


def rotate_to_prime(p, elevation: float) -> np.ndarray:
    """Global ``(..., 3)`` coordinates to the ellipsoid-aligned frame."""
    p = np.asarray(p, dtype=float)
    ce, se = math.cos(elevation), math.sin(elevation)
    x, y, z = p[..., 0], p[..., 1], p[..., 2]
    return np.stack([x * ce + z * se, y, -x * se + z * ce], axis=-1)


def rotate_to_global(p, elevation: float) -> np.ndarray:
    """Inverse (transpose) of :func:`rotate_to_prime`."""
    p = np.asarray(p, dtype=float)
    ce, se = math.cos(elevation), math.sin(elevation)
    xp, yp, zp = p[..., 0], p[..., 1], p[..., 2]
    return np.stack([xp * ce - zp * se, yp, xp * se + zp * ce], axis=-1)


def direction_cosines(alpha, beta, elevation: float):
    """Unit direction ``(alpha, beta)`` expressed in the rotated frame."""
    cb = np.cos(beta)
    dx, dy, dz = np.cos(alpha) * cb, np.sin(alpha) * cb, np.sin(beta)
    ce, se = math.cos(elevation), math.sin(elevation)
    return dx * ce + dz * se, dy, -dx * se + dz * ce


def r_max(alpha, beta, axes: EllipsoidAxes, elevation: float):
    """Range from the receiver to the ellipsoid surface along ``(alpha, beta)``."""
    xp, yp, zp = direction_cosines(alpha, beta, elevation)
    q = (xp / axes.a) ** 2 + (yp / axes.b) ** 2 + (zp / axes.c) ** 2
    return 1.0 / np.sqrt(q)


def relative_delay(alpha, beta, r, elevation: float):
    """Excess delay of a single-bounce path through a scatterer at range ``r``."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ValueError("range r must be non-negative")
    cos_los = np.cos(alpha) * np.cos(beta) * math.cos(elevation) + np.sin(beta) * math.sin(elevation)
    return r * (1.0 - cos_los) / SPEED_OF_LIGHT


def _ground_extent(axes: EllipsoidAxes, elevation: float) -> float:
    # distance to the surface along the backward horizontal (alpha = pi, beta = 0)
    ce, se = math.cos(elevation), math.sin(elevation)
    return ((ce / axes.a) ** 2 + (se / axes.c) ** 2) ** -0.5


def x_prime_min(axes: EllipsoidAxes, elevation: float) -> float:
    """Smallest along-LoS coordinate over the semi-ellipsoid."""
    return -math.cos(elevation) * _ground_extent(axes, elevation)


def max_relative_delay(axes: EllipsoidAxes, elevation: float) -> float:
    """Excess delay of the backward ground-level surface point, in seconds.

    This is the extreme delay whenever that point is the farthest-delayed
    one. Near the zenith with ``b > c`` a cross-track ground point can exceed
    it slightly.
    """
    return (1.0 + math.cos(elevation)) * _ground_extent(axes, elevation) / SPEED_OF_LIGHT


def max_height(axes: EllipsoidAxes, elevation: float) -> float:
    return math.hypot(axes.a * math.sin(elevation), axes.c * math.cos(elevation))


def c_from_a(a: float, height: float, elevation: float) -> float:
    """Axis ``c`` that gives the semi-ellipsoid the maximum height ``height``."""
    if _is_zenith(elevation) or elevation > HALF_PI:
        raise DegenerateAngleError("c is undetermined at 90 degrees elevation; a = H there")
    s = a * math.sin(elevation)
    if s > height * (1 + 1e-12):
        raise InfeasibleGeometryError(
            f"a*sin(elevation) = {s:.6g} m exceeds the height {height:.6g} m"
        )
    return math.sqrt(max(height * height - s * s, 0.0)) / math.cos(elevation)


# ---------------------------------------------------------------------------
# axis solver


def _guarded(residual, x):
    try:
        value = residual(x)
    except ConsistencyError:
        return np.nan
    return value if np.isfinite(value) else np.nan


def _scan_brackets(residual: Callable[[float], float], lo: float, hi: float):
    grid = np.geomspace(lo, hi, _SCAN_POINTS)
    values = np.array([_guarded(residual, x) for x in grid])
    sign = np.sign(values)
    # NaN marks a geometry the coarse grid cannot resolve; never bracket across it
    changes = np.nonzero(sign[:-1] * sign[1:] <= 0)[0]
    return grid, values, [(grid[i], grid[i + 1], i) for i in changes]


def _refine_extremum(residual, lo, hi, flip):
    res = optimize.minimize_scalar(
        lambda x: -flip * residual(x), bounds=(lo, hi), method="bounded",
        options={"xatol": 1e-6 * hi},
    )
    return float(res.x), -flip * res.fun


def _peak_brackets(residual_full, residual_scan, grid, values):
    """Brackets around scan extrema whose residual crosses zero between nodes.

    Each extremum is located on the cheap residual first; only those within
    ``_PEAK_MARGIN`` of zero are refined at full resolution. Returns the
    brackets and the extreme residuals seen.
    """
    out, extremes = [], []
    for i in range(1, len(grid) - 1):
        left, mid, right = values[i - 1:i + 2]
        if not np.isfinite([left, mid, right]).all() or mid == 0:
            continue
        flip = 1.0 if mid < 0 else -1.0
        # a negative local maximum or a positive local minimum
        if flip * mid < flip * left or flip * mid < flip * right:
            continue
        lo, hi = grid[i - 1], grid[i + 1]
        peak, extreme = _refine_extremum(residual_scan, lo, hi, flip)
        if abs(extreme) < _PEAK_MARGIN or np.sign(extreme) != np.sign(mid):
            peak, extreme = _refine_extremum(residual_full, lo, hi, flip)
        extremes.append(extreme)
        if np.sign(extreme) != np.sign(mid):
            out += [(lo, peak), (peak, hi)]
    return out, extremes


def _best_root(residual_full, residual_scan, lo, hi, quality, tol, what):
    """Root of ``residual_full`` on ``[lo, hi]`` with the highest ``quality``.

    The bracket is scanned with a cheap residual. Every sign change, and
    every scan extremum that dips across zero between nodes, is solved with
    the full residual; the root of highest quality wins.
    """
    grid, values, changes = _scan_brackets(residual_scan, lo, hi)
    peaks, extremes = _peak_brackets(residual_full, residual_scan, grid, values)
    candidates = [(a, b) for a, b, _ in changes] + peaks
    roots = []
    for a, b in candidates:
        root = _root_in(residual_full, grid, a, b, tol)
        if root is not None:
            roots.append(root)
    if not roots:
        seen = np.append(values, extremes)
        seen = seen[np.isfinite(seen)] if np.isfinite(seen).any() else np.array([np.nan])
        raise UnreachableTargetError(
            f"no {what} in [{lo:.6g}, {hi:.6g}] m reaches the target; residual range "
            f"[{seen.min():.6g}, {seen.max():.6g}]",
            attainable=(float(seen.min()), float(seen.max())),
        )
    return max(roots, key=quality)


def _root_in(residual, grid, a, b, tol):
    # widen by one scan step per side when the cheap scan disagrees with the full residual
    for widen in range(3):
        ka = max(np.searchsorted(grid, a) - widen, 0)
        kb = min(np.searchsorted(grid, b) + widen, len(grid) - 1)
        lo = a if widen == 0 else grid[ka]
        hi = b if widen == 0 else grid[kb]
        try:
            return find_root(residual, Bracket(lo, hi), tol=tol * hi)
        except BracketError:
            continue
    return None


@contextmanager
def _report_in_seconds(target: float, quantity: str):
    # residuals are relative to the target; re-express the attainable span in seconds
    try:
        yield
    except UnreachableTargetError as exc:
        lo, hi = (target * (1 + r) for r in exc.attainable)
        raise UnreachableTargetError(
            f"target {quantity} {target * 1e9:.6g} ns is not attainable; scanned range "
            f"[{lo * 1e9:.6g}, {hi * 1e9:.6g}] ns ({exc})",
            attainable=(lo, hi),
        ) from None


def delay_closure_axes(spec: EnvironmentSpec, tol: float = 1e-9) -> tuple[float, float]:
    """Semi-axes ``(a, c)`` fixed by the height and maximum-delay constraints.

    At the zenith these are exactly ``a = H`` and ``c = c0 * max_delay``.
    """
    if spec.max_delay is None:
        raise ValueError("delay closure needs max_delay")
    elevation, _ = fold_elevation(spec.elevation)
    H = spec.height
    reach = SPEED_OF_LIGHT * spec.max_delay
    if _is_zenith(elevation):
        return H, reach
    ce, se = math.cos(elevation), math.sin(elevation)
    a_hi = (_UPPER_FACTOR * H if elevation == 0 else min(H / se, _UPPER_FACTOR * H)) * (1 - 1e-6)

    def c_of(a):
        return max(c_from_a(a, H, elevation), 1e-9 * H)

    def delay_residual(a):
        return ((1 + ce) * ((ce / a) ** 2 + (se / c_of(a)) ** 2) ** -0.5 - reach) / reach

    with _report_in_seconds(spec.max_delay, "maximum relative delay"):
        a = _best_root(delay_residual, delay_residual, _EPS_FRACTION * H, a_hi,
                       lambda v: min(v, c_of(v)) / max(v, c_of(v)), tol, "a")
    return a, c_of(a)


def solve_axes(spec: EnvironmentSpec, quadrature: QuadratureSpec | None = None,
               tol: float = 1e-9) -> EllipsoidAxes:
    """Solve the semi-axes that realise ``spec``.

    When the residual has several roots in the search bracket the root with
    the least eccentric ellipsoid (largest min/max axis ratio) is returned.

    Raises
    ------
    UnreachableTargetError
        The delay-spread (or maximum-delay) target is not attained anywhere in
        the bracket; ``attainable`` carries the residual range seen.
    """
    from .delay_stats import rms_delay_spread

    quadrature = quadrature or QuadratureSpec()
    elevation, _ = fold_elevation(spec.elevation)
    H = spec.height
    eps = _EPS_FRACTION * H
    upper = _UPPER_FACTOR * H
    target = spec.rms_delay

    def sigma_residual(qspec):
        def residual_for(axes):
            return (rms_delay_spread(axes, elevation, qspec) - target) / target
        return residual_for

    full, coarse = sigma_residual(quadrature), sigma_residual(_SCAN_SPEC)
    zenith = _is_zenith(elevation)
    a_hi = upper if elevation == 0 else min(H / math.sin(elevation), upper)
    a_hi *= 1 - 1e-6

    if spec.max_delay is None:
        ratio = spec.axis_ratio
        if zenith:
            def make(c):
                return EllipsoidAxes(H, ratio * H, c)
            lo, hi, what = eps, upper, "c"
        else:
            def make(a):
                return EllipsoidAxes(a, ratio * a, max(c_from_a(a, H, elevation), 1e-9 * H))
            lo, hi, what = eps, a_hi, "a"
        with _report_in_seconds(target, "rms delay spread"):
            x = _best_root(lambda v: full(make(v)), lambda v: coarse(make(v)), lo, hi,
                           lambda v: make(v).isotropy, tol, what)
        return make(x)

    a, c = delay_closure_axes(spec, tol)

    def make_b(b):
        return EllipsoidAxes(a, b, c)

    with _report_in_seconds(target, "rms delay spread"):
        b = _best_root(lambda v: full(make_b(v)), lambda v: coarse(make_b(v)), eps, upper,
                       lambda v: make_b(v).isotropy, tol, "b")
    return make_b(b)
