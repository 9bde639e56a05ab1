"""Doppler autocorrelation and power spectral density.

Frequencies are normalised by the Doppler magnitude ``|f_d|``; a negative
``f_d`` mirrors the spectrum about zero. Spectra are piecewise-constant
densities over ``edges`` with unit total power unless composed with a line.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .angular_pdf import TWO_PI, JointAoaPdf, uv_pdf
from .exceptions import UnsupportedTransformError
from .numerics import Bracket, QuadratureSpec, nodes_and_weights

HALF_PI = 0.5 * math.pi
DELTA_SPEC = QuadratureSpec(1000, "midpoint")
DEFAULT_BINS = 201
MIN_BINS = 8


@dataclass(frozen=True)
class SpectralLine:
    freq: float
    power: float

    def __post_init__(self):
        if not 0.0 <= self.power <= 1.0:
            raise ValueError(f"line power must lie in [0, 1], got {self.power!r}")


@dataclass(frozen=True)
class DopplerSpectrum:
    """Piecewise-constant PSD over normalised frequency ``f / |f_d|``."""

    edges: np.ndarray
    density: np.ndarray
    f_d: float = 1.0
    lines: tuple = ()
    continuous_power: float = 1.0
    support_mass: float = 1.0
    method: str = ""

    def __post_init__(self):
        edges = np.asarray(self.edges, dtype=float)
        density = np.asarray(self.density, dtype=float)
        if edges.ndim != 1 or density.shape != (edges.size - 1,):
            raise ValueError("density needs exactly one value per bin")
        if np.any(np.diff(edges) <= 0):
            raise ValueError("bin edges must increase strictly")
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "density", density)

    @property
    def freq_grid(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.edges)

    def mass(self) -> float:
        # exactly rounded, so the mass does not depend on bin order
        return math.fsum(self.density * self.widths)

    def masses(self) -> np.ndarray:
        return self.density * self.widths

    def signed_masses(self) -> tuple[float, float]:
        """Continuous power below and above zero (a straddling bin is split)."""
        lo, hi = self.edges[:-1], self.edges[1:]
        below = np.clip(np.minimum(hi, 0.0) - lo, 0.0, None)
        above = np.clip(hi - np.maximum(lo, 0.0), 0.0, None)
        return float(np.sum(self.density * below)), float(np.sum(self.density * above))

    def density_near_zero(self) -> tuple[float, float]:
        """Densities of the first bins lying strictly below and strictly above zero."""
        below = np.nonzero(self.edges[1:] <= 0.0)[0]
        above = np.nonzero(self.edges[:-1] >= 0.0)[0]
        if below.size == 0 or above.size == 0:
            raise ValueError("spectrum does not extend to both sides of zero")
        return float(self.density[below[-1]]), float(self.density[above[0]])


@dataclass(frozen=True)
class CorrelationTrace:
    lags: np.ndarray
    values: np.ndarray


def _orient(spectrum: DopplerSpectrum, f_d: float) -> DopplerSpectrum:
    spectrum = replace(spectrum, f_d=abs(f_d))
    return flip_spectrum(spectrum) if f_d < 0 else spectrum


def _check_f_d(f_d):
    if not (math.isfinite(f_d) and f_d != 0):
        raise ValueError(f"Doppler scale f_d must be finite and non-zero, got {f_d!r}")


def uniform_edges(n_bins: int) -> np.ndarray:
    return np.linspace(-1.0, 1.0, int(n_bins) + 1)


def autocorrelation(pdf: JointAoaPdf, f_d: float, lags, spec: QuadratureSpec | None = None) -> CorrelationTrace:
    """R(tau) = E[exp(j 2 pi f_d tau cos(alpha) cos(beta))] over the AoA density.

    The quadrature measure is divided by its own total so that R(0) = 1
    holds to rounding.
    """
    spec = spec or pdf.quadrature
    lags = np.atleast_1d(np.asarray(lags, dtype=float))
    weights, doppler = [], []
    for lo, hi in pdf.support.intervals:
        xa, wa = nodes_and_weights(Bracket(lo, hi), spec)
        xb, wb = nodes_and_weights(Bracket(0.0, HALF_PI), spec)
        A, B = np.meshgrid(xa, xb, indexing="ij")
        weights.append((np.outer(wa, wb) * pdf.density(A, B)).ravel())
        doppler.append((np.cos(A) * np.cos(B)).ravel())
    w = np.concatenate(weights)
    d = np.concatenate(doppler)
    total = np.sum(w)
    values = np.array([np.sum(w * np.exp(1j * (2 * math.pi * f_d * tau) * d)) for tau in lags]) / total
    return CorrelationTrace(lags, values)


def psd_delta(pdf: JointAoaPdf, f_d: float = 1.0, spec: QuadratureSpec = DELTA_SPEC,
              n_freq: int = 1000) -> DopplerSpectrum:
    """PSD by collapsing the Doppler delta onto a single integral over u = cos(alpha).

    For each normalised frequency ``nu`` the density is
    ``S(nu) = int p_uv(u, nu / u) / |u| du`` over the ``u`` for which
    ``v = nu / u`` lies in (0, 1). Values are sampled at the centres of
    ``n_freq`` equal cells of [-1, 1]; a centre exactly at zero takes the
    mean of its neighbours.
    """
    _check_f_d(f_d)
    if not pdf.support.is_symmetric:
        raise UnsupportedTransformError("psd_delta needs an alpha-symmetric support; use psd_binned")
    edges = uniform_edges(n_freq)
    nu = 0.5 * (edges[:-1] + edges[1:])
    t, w = nodes_and_weights(Bracket(0.0, 1.0), spec)
    lo = np.where(nu > 0, nu, -1.0)
    hi = np.where(nu > 0, 1.0, nu)
    span = (hi - lo)[:, None]
    u = lo[:, None] + span * t[None, :]
    v = nu[:, None] / u
    with np.errstate(divide="ignore", invalid="ignore"):
        integrand = uv_pdf(pdf, u, v) / np.abs(u)
    density = np.sum(integrand * (span * w[None, :]), axis=1)
    zero = np.nonzero(nu == 0.0)[0]
    for k in zero:
        density[k] = 0.5 * (density[k - 1] + density[k + 1])
    spectrum = DopplerSpectrum(edges, density, support_mass=pdf.support_mass, method="delta")
    return _orient(spectrum, f_d)


def _alpha_nodes(support, n_alpha):
    xs, ws = [], []
    for lo, hi in support.intervals:
        n = max(16, int(round(n_alpha * (hi - lo) / TWO_PI)))
        k = (np.arange(n) + 0.5) / n
        xs.append(lo + (hi - lo) * k)
        ws.append(np.full(n, (hi - lo) / n))
    return np.concatenate(xs), np.concatenate(ws)


def psd_binned(pdf: JointAoaPdf, f_d: float = 1.0, n_bins: int = DEFAULT_BINS,
               n_alpha: int = 4096, n_beta: int = 2049) -> DopplerSpectrum:
    """PSD as the AoA probability mass falling in each Doppler bin.

    Each azimuth slice is integrated in elevation once (cumulative
    trapezoid); because ``cos(alpha) cos(beta)`` is monotone in ``beta`` on a
    slice, the mass below any bin edge is read off the cumulative at the
    edge's elevation crossing. Works for any azimuth support.
    """
    _check_f_d(f_d)
    if int(n_bins) != n_bins or n_bins < MIN_BINS:
        raise ValueError(f"n_bins must be an integer >= {MIN_BINS}, got {n_bins!r}")
    edges = uniform_edges(n_bins)
    alpha, wa = _alpha_nodes(pdf.support, n_alpha)
    beta = np.linspace(0.0, HALF_PI, n_beta)
    step = beta[1] - beta[0]
    p = pdf.density(alpha[:, None], beta[None, :])
    cum = np.zeros_like(p)
    np.cumsum(0.5 * step * (p[:, 1:] + p[:, :-1]), axis=1, out=cum[:, 1:])
    total = cum[:, -1]

    ca = np.cos(alpha)[:, None]
    e = edges[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.clip(np.where(ca != 0, e / ca, 0.0), 0.0, 1.0)
    crossing = np.arccos(ratio) / step
    idx = np.minimum(crossing.astype(int), n_beta - 2)
    frac = crossing - idx
    rows = np.arange(alpha.size)[:, None]
    below_crossing = cum[rows, idx] * (1 - frac) + cum[rows, idx + 1] * frac
    # mass with doppler < edge, per slice
    below = np.where(ca > 0, total[:, None] - below_crossing,
                     np.where(ca < 0, below_crossing, np.where(e > 0, total[:, None], 0.0)))
    cdf = wa @ below
    masses = np.diff(cdf)
    density = masses / np.diff(edges)
    spectrum = DopplerSpectrum(edges, density, support_mass=pdf.support_mass, method="binned")
    return _orient(spectrum, f_d)


def compose_rician(nlos: DopplerSpectrum, k_factor: float, f_los: float) -> DopplerSpectrum:
    """Add a LOS spectral line carrying K/(K+1) of the power."""
    if not k_factor >= 0:
        raise ValueError(f"K-factor must be non-negative, got {k_factor!r}")
    if nlos.lines:
        raise ValueError("spectrum already carries spectral lines")
    if not math.isfinite(f_los):
        raise ValueError("f_los must be finite")
    scale = 1.0 / (k_factor + 1.0)
    return replace(
        nlos,
        density=nlos.density * scale,
        lines=(SpectralLine(float(f_los), k_factor / (k_factor + 1.0)),),
        continuous_power=nlos.continuous_power * scale,
    )


def flip_spectrum(s: DopplerSpectrum) -> DopplerSpectrum:
    """Mirror about zero frequency (satellite receding instead of approaching)."""
    return replace(
        s,
        edges=-s.edges[::-1],
        density=s.density[::-1].copy(),
        lines=tuple(SpectralLine(-ln.freq, ln.power) for ln in s.lines),
        f_d=-s.f_d,
    )


def rebin(s: DopplerSpectrum, edges) -> DopplerSpectrum:
    """Average a piecewise-constant density onto new bin edges (exact overlap)."""
    edges = np.asarray(edges, dtype=float)
    cum = np.concatenate([[0.0], np.cumsum(s.masses())])
    cdf = np.interp(edges, s.edges, cum, left=0.0, right=cum[-1])
    return replace(s, edges=edges, density=np.diff(cdf) / np.diff(edges))


def l1_distance(s1: DopplerSpectrum, s2: DopplerSpectrum) -> float:
    """Integrated absolute density difference on ``s1``'s bins."""
    if s2.edges.shape != s1.edges.shape or not np.array_equal(s2.edges, s1.edges):
        s2 = rebin(s2, s1.edges)
    return float(np.sum(np.abs(s1.density - s2.density) * s1.widths))


def mirrored_l1(s: DopplerSpectrum) -> float:
    return l1_distance(s, replace(flip_spectrum(s), f_d=s.f_d))


def correlation_from_spectrum(s: DopplerSpectrum, f_d: float, lags) -> CorrelationTrace:
    """Inverse transform of a binned spectrum (density uniform within each bin)."""
    lags = np.atleast_1d(np.asarray(lags, dtype=float))
    centers, widths, masses = s.freq_grid, s.widths, s.masses()
    scale = abs(f_d)
    values = []
    for tau in lags:
        x = scale * tau
        values.append(np.sum(masses * np.exp(2j * math.pi * x * centers) * np.sinc(x * widths))
                      + sum(ln.power * np.exp(2j * math.pi * x * ln.freq) for ln in s.lines))
    return CorrelationTrace(lags, np.array(values))
