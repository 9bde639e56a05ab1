"""Brute-force oracle: scatterers drawn uniformly in the semi-ellipsoid.

Sampling is split in fixed-size chunks; chunk ``k`` draws from its own
generator seeded by ``(seed, k)``, so any chunk can be produced
independently and the ensemble is identical however the chunks are
scheduled.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import signal

from .geometry import SPEED_OF_LIGHT, EllipsoidAxes, fold_elevation, rotate_to_global
from .spectrum import DopplerSpectrum

CHUNK = 1 << 16
TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class Ray:
    alpha: float
    beta: float
    r: float
    excess_delay: float
    doppler_norm: float
    amplitude: float
    phase: float


@dataclass(frozen=True)
class RayEnsemble:
    """Struct-of-arrays ray set; ``attempts`` counts candidates drawn."""

    alpha: np.ndarray
    beta: np.ndarray
    r: np.ndarray
    excess_delay: np.ndarray
    doppler_norm: np.ndarray
    amplitude: np.ndarray
    phase: np.ndarray
    x_prime: np.ndarray
    height: np.ndarray
    axes: EllipsoidAxes
    elevation: float
    seed: int
    attempts: int

    def __len__(self):
        return self.alpha.size

    def __getitem__(self, i) -> Ray:
        return Ray(*(float(getattr(self, f)[i]) for f in
                     ("alpha", "beta", "r", "excess_delay", "doppler_norm", "amplitude", "phase")))

    @property
    def acceptance(self) -> float:
        return len(self) / self.attempts


@dataclass(frozen=True)
class EmpiricalHistogram:
    edges: np.ndarray
    counts: np.ndarray

    @property
    def densities(self) -> np.ndarray:
        return self.counts / (self.counts.sum() * np.diff(self.edges))

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])

    def as_spectrum(self) -> DopplerSpectrum:
        return DopplerSpectrum(self.edges, self.densities, method="empirical")


def _sample_chunk(axes: EllipsoidAxes, elevation: float, n: int, seed: int, index: int):
    rng = np.random.default_rng([seed, index])
    scale = axes.as_array()
    accepted, attempts = [], 0
    need = n
    while need > 0:
        m = 2 * need + 64
        g = rng.standard_normal((m, 3))
        g /= np.linalg.norm(g, axis=1)[:, None]
        prime = g * (rng.random(m) ** (1.0 / 3.0))[:, None] * scale
        glob = rotate_to_global(prime, elevation)
        keep = np.nonzero(glob[:, 2] >= 0.0)[0][:need]
        # attempts stop at the last accepted candidate
        attempts += (keep[-1] + 1) if keep.size == need else m
        accepted.append((prime[keep], glob[keep]))
        need -= keep.size
    prime = np.concatenate([p for p, _ in accepted])
    glob = np.concatenate([q for _, q in accepted])
    phase = rng.random(n) * TWO_PI
    return prime, glob, phase, attempts


def sample_rays(axes: EllipsoidAxes, elevation: float, n: int, seed: int = 42) -> RayEnsemble:
    """Draw ``n`` scatterers uniformly in the semi-ellipsoid.

    Points come from the unit ball (normalised Gaussian direction, radius
    ``U**(1/3)``) scaled by the semi-axes in the rotated frame; those below
    ground are rejected and redrawn.
    """
    if int(n) != n or n < 1:
        raise ValueError(f"number of rays must be a positive integer, got {n!r}")
    elevation, _ = fold_elevation(elevation)
    n = int(n)
    parts = [_sample_chunk(axes, elevation, min(CHUNK, n - start), seed, k)
             for k, start in enumerate(range(0, n, CHUNK))]
    prime = np.concatenate([p[0] for p in parts])
    glob = np.concatenate([p[1] for p in parts])
    phase = np.concatenate([p[2] for p in parts])
    attempts = sum(p[3] for p in parts)

    x, y, z = glob.T
    r = np.linalg.norm(glob, axis=1)
    safe_r = np.where(r > 0, r, 1.0)
    return RayEnsemble(
        alpha=np.mod(np.arctan2(y, x), TWO_PI),
        beta=np.arctan2(z, np.hypot(x, y)),
        r=r,
        excess_delay=(r - prime[:, 0]) / SPEED_OF_LIGHT,
        doppler_norm=np.clip(x / safe_r, -1.0, 1.0),
        amplitude=np.full(n, 1.0 / math.sqrt(n)),
        phase=phase,
        x_prime=prime[:, 0],
        height=z,
        axes=axes,
        elevation=elevation,
        seed=int(seed),
        attempts=int(attempts),
    )


def _histogram(values, lo, hi, n_bins) -> EmpiricalHistogram:
    if int(n_bins) != n_bins or n_bins < 8:
        raise ValueError(f"n_bins must be an integer >= 8, got {n_bins!r}")
    counts, edges = np.histogram(values, bins=int(n_bins), range=(lo, hi))
    return EmpiricalHistogram(edges, counts)


def empirical_doppler(ensemble: RayEnsemble, n_bins: int = 101) -> EmpiricalHistogram:
    return _histogram(ensemble.doppler_norm, -1.0, 1.0, n_bins)


def empirical_marginals(ensemble: RayEnsemble, n_bins: int = 90):
    """Histograms of azimuth over [0, 2pi) and elevation over [0, pi/2]."""
    return (_histogram(ensemble.alpha, 0.0, TWO_PI, n_bins),
            _histogram(ensemble.beta, 0.0, 0.5 * math.pi, n_bins))


def empirical_delay_stats(ensemble: RayEnsemble) -> tuple[float, float, float]:
    """Sample mean, standard deviation and maximum of the excess delay (s)."""
    d = ensemble.excess_delay
    return float(d.mean()), float(d.std()), float(d.max())


def synthesize_waveform(ensemble: RayEnsemble, f_d: float, duration: float, sample_rate: float,
                        chunk: int = 512) -> np.ndarray:
    """Sum-of-rays field ``E(t) = sum A exp(-j(2 pi f_l (t - tau_l) + phi))``."""
    if not sample_rate > 4 * abs(f_d):
        raise ValueError(f"sample_rate {sample_rate} must exceed 4*|f_d| = {4 * abs(f_d)}")
    if not duration > 0:
        raise ValueError("duration must be positive")
    t = np.arange(int(round(duration * sample_rate))) / sample_rate
    field = np.zeros(t.size, dtype=complex)
    freq = f_d * ensemble.doppler_norm
    for start in range(0, len(ensemble), chunk):
        sl = slice(start, start + chunk)
        arg = 2 * math.pi * freq[sl, None] * (t[None, :] - ensemble.excess_delay[sl, None])
        arg += ensemble.phase[sl, None]
        field += ensemble.amplitude[sl] @ np.exp(-1j * arg)
    return field


def periodogram(series, segment_length: int, overlap_fraction: float, sample_rate: float,
                f_d: float, window: str = "hann") -> DopplerSpectrum:
    """Welch-averaged two-sided periodogram, unit total power, axis in f/|f_d|.

    The estimate follows the usual sign convention (a tone ``exp(+j 2 pi f0 t)``
    lands at ``+f0``).
    """
    series = np.asarray(series)
    segment_length = int(segment_length)
    if segment_length < 2 or segment_length > series.size:
        raise ValueError(f"segment_length must lie in [2, {series.size}], got {segment_length}")
    if not 0.0 <= overlap_fraction <= 0.9:
        raise ValueError(f"overlap_fraction must lie in [0, 0.9], got {overlap_fraction}")
    noverlap = int(round(overlap_fraction * segment_length))
    if noverlap >= segment_length:
        raise ValueError("overlap leaves no step between segments")
    freqs, pxx = signal.welch(series, fs=sample_rate, window=window, nperseg=segment_length,
                              noverlap=noverlap, detrend=False, return_onesided=False,
                              scaling="density")
    order = np.argsort(freqs)
    nu = freqs[order] / abs(f_d)
    step = sample_rate / segment_length / abs(f_d)
    edges = np.concatenate([nu - 0.5 * step, [nu[-1] + 0.5 * step]])
    power = pxx[order]
    density = power / (np.sum(power) * step)
    return DopplerSpectrum(edges, density, f_d=abs(f_d), method="periodogram")


def synthesized_psd(axes: EllipsoidAxes, elevation: float, f_d: float = 1.0, n_rays: int = 10_000,
                    duration: float = 200.0, sample_rate: float = 8.0, realizations: int = 32,
                    segment_length: int = 512, seed: int = 42) -> DopplerSpectrum:
    """Periodogram of synthesised fields averaged over independent ray ensembles.

    Each realisation draws a fresh ensemble (seed ``seed + i``). The field is
    conjugated before estimation so the result follows the channel's
    ``E[E(t) E*(t + tau)]`` convention, in which a ray at Doppler ``f_l`` sits
    at ``+f_l``.
    """
    acc = None
    for i in range(realizations):
        ens = sample_rays(axes, elevation, n_rays, seed + i)
        field = synthesize_waveform(ens, f_d, duration, sample_rate)
        est = periodogram(np.conj(field), segment_length, 0.5, sample_rate, f_d)
        acc = est.density if acc is None else acc + est.density
    return DopplerSpectrum(est.edges, acc / realizations, f_d=abs(f_d), method="synthesized")
