"""Angle-of-arrival densities of scatterers uniform in the semi-ellipsoid."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import UnsupportedTransformError
from .geometry import EllipsoidAxes, fold_elevation, r_max
from .numerics import Bracket, QuadratureSpec, integrate_1d, integrate_2d

TWO_PI = 2.0 * math.pi
_TOL = 1e-12


def _canonical(intervals):
    """Merge intervals into sorted, disjoint pieces of [0, 2*pi]."""
    pieces = []
    for lo, hi in intervals:
        length = hi - lo
        if length >= TWO_PI - _TOL:
            return ((0.0, TWO_PI),)
        lo = lo % TWO_PI
        hi = lo + length
        if hi > TWO_PI:
            pieces += [(lo, TWO_PI), (0.0, hi - TWO_PI)]
        else:
            pieces.append((lo, hi))
    pieces.sort()
    merged = []
    for lo, hi in pieces:
        if merged and lo <= merged[-1][1] + _TOL:
            merged[-1] = (merged[-1][0], max(merged[-1][1], hi))
        else:
            merged.append((lo, hi))
    return tuple(merged)


@dataclass(frozen=True)
class AzimuthSupport:
    """Azimuth intervals (radians) where scatterers are allowed."""

    intervals: tuple = ((0.0, TWO_PI),)

    def __post_init__(self):
        raw = tuple((float(lo), float(hi)) for lo, hi in self.intervals)
        if not raw:
            raise ValueError("azimuth support needs at least one interval")
        for lo, hi in raw:
            if not (math.isfinite(lo) and math.isfinite(hi)) or not lo < hi:
                raise ValueError(f"azimuth interval needs lo < hi, got ({lo}, {hi})")
            if hi - lo > TWO_PI + _TOL:
                raise ValueError(f"azimuth interval ({lo}, {hi}) is longer than a full turn")
        total = sum(hi - lo for lo, hi in raw)
        merged = _canonical(raw)
        if abs(sum(hi - lo for lo, hi in merged) - total) > 1e-9:
            raise ValueError("azimuth intervals overlap")
        object.__setattr__(self, "intervals", merged)

    @classmethod
    def full(cls) -> "AzimuthSupport":
        return cls()

    @classmethod
    def from_degrees(cls, *intervals) -> "AzimuthSupport":
        return cls(tuple((math.radians(lo), math.radians(hi)) for lo, hi in intervals))

    @property
    def length(self) -> float:
        return sum(hi - lo for lo, hi in self.intervals)

    @property
    def is_full(self) -> bool:
        return self.length >= TWO_PI - 1e-9

    @property
    def is_symmetric(self) -> bool:
        """True when the support is invariant under alpha -> -alpha."""
        mirrored = _canonical(tuple((TWO_PI - hi, TWO_PI - lo) for lo, hi in self.intervals))
        if len(mirrored) != len(self.intervals):
            return False
        return all(abs(p - q) < 1e-9 for a, b in zip(mirrored, self.intervals) for p, q in zip(a, b))

    def contains(self, alpha):
        alpha = np.mod(np.asarray(alpha, dtype=float), TWO_PI)
        inside = np.zeros(alpha.shape, dtype=bool)
        for lo, hi in self.intervals:
            inside |= (alpha >= lo) & (alpha <= hi)
        return inside


@dataclass(frozen=True)
class JointAoaPdf:
    """Joint density of azimuth and elevation of arrival at one elevation.

    With a truncated support the density is renormalised by the support
    mass, which is kept in ``support_mass``.
    """

    axes: EllipsoidAxes
    elevation: float
    support: AzimuthSupport = field(default_factory=AzimuthSupport.full)
    quadrature: QuadratureSpec = field(default_factory=QuadratureSpec)
    support_mass: float = field(init=False)
    normalization: float = field(init=False)

    def __post_init__(self):
        folded, _ = fold_elevation(self.elevation)
        if folded != self.elevation:
            raise ValueError("JointAoaPdf expects a folded elevation in [0, pi/2]")
        if self.support.is_full:
            mass = 1.0
        else:
            mass = sum(
                integrate_2d(self._raw, Bracket(lo, hi), Bracket(0.0, 0.5 * math.pi), self.quadrature)
                for lo, hi in self.support.intervals
            )
        object.__setattr__(self, "support_mass", float(mass))
        object.__setattr__(self, "normalization", 1.0 / float(mass))

    def _raw(self, alpha, beta):
        ax = self.axes
        return r_max(alpha, beta, ax, self.elevation) ** 3 * np.cos(beta) / (TWO_PI * ax.a * ax.b * ax.c)

    def density(self, alpha, beta):
        """Density on the support, ignoring the support indicator (alpha assumed inside)."""
        return self.normalization * self._raw(alpha, beta)

    def __call__(self, alpha, beta):
        return joint_pdf(self, alpha, beta)


def joint_pdf(pdf: JointAoaPdf, alpha, beta):
    """p(alpha, beta) in 1/rad^2; zero outside the azimuth support."""
    beta = np.asarray(beta, dtype=float)
    if np.any((beta < -_TOL) | (beta > 0.5 * math.pi + _TOL)):
        raise ValueError("elevation of arrival must lie in [0, pi/2]")
    value = pdf.density(alpha, beta)
    if pdf.support.is_full:
        return value
    return np.where(pdf.support.contains(alpha), value, 0.0)


def marginal_azimuth(pdf: JointAoaPdf, alpha, spec: QuadratureSpec | None = None):
    """p(alpha): the joint density integrated over elevation of arrival."""
    spec = spec or pdf.quadrature
    alpha = np.asarray(alpha, dtype=float)
    out = integrate_1d(lambda b: joint_pdf(pdf, alpha[..., None], b), Bracket(0.0, 0.5 * math.pi), spec)
    return out


def marginal_elevation(pdf: JointAoaPdf, beta, spec: QuadratureSpec | None = None):
    """p(beta): the joint density integrated over the azimuth support."""
    spec = spec or pdf.quadrature
    beta = np.asarray(beta, dtype=float)
    return sum(
        integrate_1d(lambda a: pdf.density(a, beta[..., None]), Bracket(lo, hi), spec)
        for lo, hi in pdf.support.intervals
    )


def uv_pdf(pdf: JointAoaPdf, u, v):
    """Density of ``(cos alpha, cos beta)``.

    ``u = cos(alpha)`` is two-to-one over a full turn, so both preimages
    ``+-arccos(u)`` contribute.
    """
    if not pdf.support.is_symmetric:
        raise UnsupportedTransformError(
            "the (u, v) density needs an azimuth support symmetric under alpha -> -alpha; "
            "use spectrum.psd_binned for truncated supports"
        )
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    alpha = np.arccos(u)
    beta = np.arccos(v)
    both = joint_pdf(pdf, alpha, beta) + joint_pdf(pdf, -alpha, beta)
    return both / (np.sqrt(1.0 - u * u) * np.sqrt(1.0 - v * v))
