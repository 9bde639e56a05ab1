"""End-to-end helpers working in degrees: schedule lookup, axis solve, spectra.

Elevations past the zenith are folded here, in degrees, so that
``180 - (180 - x) == x`` exactly and the mirrored spectrum is a pure flip.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .angular_pdf import AzimuthSupport, JointAoaPdf
from .delay_stats import DEFAULT_SCHEDULE, DelaySpreadSchedule, delay_spread_target, rms_delay_spread
from .geometry import (
    DEFAULT_AXIS_RATIO,
    EllipsoidAxes,
    EnvironmentSpec,
    max_relative_delay,
    solve_axes,
)
from .numerics import QuadratureSpec
from .spectrum import DEFAULT_BINS, DopplerSpectrum, psd_binned, psd_delta

DEFAULT_HEIGHT = 65.0
METHODS = ("binned", "delta")


def fold_degrees(elevation_deg: float) -> tuple[float, int]:
    """Fold an elevation in [0, 180] degrees onto [0, 90] and return the Doppler sign."""
    elevation_deg = float(elevation_deg)
    if not 0.0 <= elevation_deg <= 180.0:
        raise ValueError(f"elevation must lie in [0, 180] degrees, got {elevation_deg!r}")
    if elevation_deg > 90.0:
        return 180.0 - elevation_deg, -1
    return elevation_deg, 1


@dataclass(frozen=True)
class SolvedGeometry:
    elevation_deg: float
    axes: EllipsoidAxes
    environment: EnvironmentSpec

    @property
    def elevation(self) -> float:
        return fold_degrees(self.elevation_deg)[0] * math.pi / 180.0

    def rms_delay_spread(self, quadrature: QuadratureSpec | None = None) -> float:
        return rms_delay_spread(self.axes, self.elevation, quadrature)

    def max_relative_delay(self) -> float:
        return max_relative_delay(self.axes, self.elevation)


def environment_for(elevation_deg: float, height: float = DEFAULT_HEIGHT,
                    schedule: DelaySpreadSchedule = DEFAULT_SCHEDULE,
                    rms_delay_ns: Optional[float] = None, max_delay_ns: Optional[float] = None,
                    axis_ratio: float = DEFAULT_AXIS_RATIO) -> EnvironmentSpec:
    """Build the solve inputs; the rms target defaults to the schedule value."""
    folded, _ = fold_degrees(elevation_deg)
    target = delay_spread_target(folded, schedule) if rms_delay_ns is None else rms_delay_ns
    return EnvironmentSpec(
        height=height,
        elevation=math.radians(folded),
        rms_delay=target * 1e-9,
        max_delay=None if max_delay_ns is None else max_delay_ns * 1e-9,
        axis_ratio=axis_ratio,
    )


def solve_elevation(elevation_deg: float, quadrature: QuadratureSpec | None = None,
                    **environment) -> SolvedGeometry:
    env = environment_for(elevation_deg, **environment)
    return SolvedGeometry(float(elevation_deg), solve_axes(env, quadrature), env)


def doppler_spectrum(axes: EllipsoidAxes, elevation_deg: float, method: str = "binned",
                     support: AzimuthSupport | None = None, n_bins: int = DEFAULT_BINS,
                     f_d: float = 1.0) -> DopplerSpectrum:
    """Doppler PSD at any elevation in [0, 180] degrees."""
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}, got {method!r}")
    folded, sign = fold_degrees(elevation_deg)
    pdf = JointAoaPdf(axes, math.radians(folded), support or AzimuthSupport.full())
    if method == "binned":
        return psd_binned(pdf, sign * f_d, n_bins=n_bins)
    return psd_delta(pdf, sign * f_d, n_freq=n_bins)
