import math

import numpy as np
import pytest
from scipy import stats

from leoscatter import (
    SPEED_OF_LIGHT,
    EllipsoidAxes,
    JointAoaPdf,
    empirical_delay_stats,
    empirical_doppler,
    empirical_marginals,
    max_relative_delay,
    periodogram,
    psd_binned,
    r_max,
    rms_delay_spread,
    sample_rays,
    synthesize_waveform,
)
from leoscatter.geometry import rotate_to_prime
from leoscatter.montecarlo import CHUNK, EmpiricalHistogram
from leoscatter.spectrum import DopplerSpectrum, l1_distance

from conftest import radians, solved

GENERIC = (EllipsoidAxes(100.0, 60.0, 80.0), radians(20))


@pytest.fixture(scope="module")
def generic():
    axes, e = GENERIC
    return sample_rays(axes, e, 1_000_000, seed=42)


@pytest.fixture(scope="module")
def sphere_rays():
    return sample_rays(EllipsoidAxes(1.0, 1.0, 1.0), 0.0, 1_000_000, seed=42)


# -- sampling

def test_samples_inside_semi_ellipsoid(generic):
    axes, e = GENERIC
    # rebuild rotated coordinates from the arrival direction and range
    d = np.column_stack([np.cos(generic.alpha) * np.cos(generic.beta),
                         np.sin(generic.alpha) * np.cos(generic.beta), np.sin(generic.beta)])
    glob = d * generic.r[:, None]
    prime = rotate_to_prime(glob, e)
    q = (prime[:, 0] / axes.a) ** 2 + (prime[:, 1] / axes.b) ** 2 + (prime[:, 2] / axes.c) ** 2
    assert q.max() <= 1 + 1e-12
    assert generic.height.min() >= 0
    np.testing.assert_allclose(prime[:, 0], generic.x_prime, atol=1e-9)


def test_ray_invariants(generic):
    axes, e = GENERIC
    assert generic.beta.min() >= 0 and generic.beta.max() <= math.pi / 2
    assert np.all(generic.r <= r_max(generic.alpha, generic.beta, axes, e) * (1 + 1e-12))
    assert np.abs(generic.doppler_norm).max() <= 1
    assert generic.excess_delay.min() >= 0
    assert generic.excess_delay.max() <= max_relative_delay(axes, e)
    np.testing.assert_allclose(generic.amplitude, 1e-3)
    assert generic.phase.min() >= 0 and generic.phase.max() < 2 * math.pi


def test_acceptance_is_one_half(generic):
    sigma = math.sqrt(0.25 / generic.attempts)
    assert abs(generic.acceptance - 0.5) < 3 * sigma


def test_deterministic_and_chunk_stable():
    axes, e = GENERIC
    a = sample_rays(axes, e, CHUNK + 500, seed=9)
    b = sample_rays(axes, e, CHUNK + 500, seed=9)
    for name in ("alpha", "beta", "r", "excess_delay", "doppler_norm", "phase"):
        np.testing.assert_array_equal(getattr(a, name), getattr(b, name))
    head = sample_rays(axes, e, CHUNK, seed=9)
    np.testing.assert_array_equal(head.alpha, a.alpha[:CHUNK])
    assert not np.array_equal(sample_rays(axes, e, 100, seed=10).alpha, a.alpha[:100])


def test_single_ray_accessor(generic):
    ray = generic[3]
    assert ray.alpha == generic.alpha[3] and ray.doppler_norm == generic.doppler_norm[3]


def test_sample_count_validation():
    with pytest.raises(ValueError):
        sample_rays(*GENERIC, 0)


# -- histograms

def test_histogram_normalised(generic):
    h = empirical_doppler(generic, 64)
    assert np.sum(h.densities * np.diff(h.edges)) == pytest.approx(1, abs=1e-12)
    assert h.edges[0] == -1 and h.edges[-1] == 1
    assert h.counts.sum() == len(generic)
    with pytest.raises(ValueError):
        empirical_doppler(generic, 7)


def test_sphere_doppler_mirror_symmetric(sphere_rays):
    h = empirical_doppler(sphere_rays, 50)
    n, p = h.counts, h.counts / h.counts.sum()
    sigma = np.sqrt(len(sphere_rays) * 2 * p * (1 - p))
    assert np.all(np.abs(n - n[::-1]) <= 3 * sigma + 1)


@pytest.mark.parametrize("deg", [15, 30, 45, 60, 75])
def test_empirical_positive_skew(deg):
    g = solved(deg)
    ens = sample_rays(g.axes, g.elevation, 200_000, seed=deg)
    frac = np.mean(ens.doppler_norm > 0)
    assert frac > 0.5 + 3 * math.sqrt(0.25 / len(ens))


def test_empirical_horizon_is_balanced():
    g = solved(0)
    ens = sample_rays(g.axes, g.elevation, 1_000_000, seed=42)
    assert abs(np.mean(ens.doppler_norm > 0) - 0.5) < 3 * math.sqrt(0.25 / len(ens))


@pytest.mark.parametrize("deg", [0, 15, 30, 45, 60, 75, 90])
def test_empirical_doppler_matches_binned(deg):
    g = solved(deg)
    ens = sample_rays(g.axes, g.elevation, 1_000_000, seed=42)
    analytic = psd_binned(JointAoaPdf(g.axes, g.elevation), n_bins=101)
    assert l1_distance(analytic, empirical_doppler(ens, 101).as_spectrum()) < 0.02


def test_sphere_marginals(sphere_rays):
    az, el = empirical_marginals(sphere_rays, 90)
    uniform = DopplerSpectrum(az.edges, np.full(90, 1 / (2 * math.pi)))
    assert l1_distance(uniform, DopplerSpectrum(az.edges, az.densities)) < 0.02
    cos_avg = np.diff(np.sin(el.edges)) / np.diff(el.edges)
    assert l1_distance(DopplerSpectrum(el.edges, cos_avg), DopplerSpectrum(el.edges, el.densities)) < 0.02


def test_horizon_azimuth_modes():
    g = solved(0)
    az, _ = empirical_marginals(sample_rays(g.axes, g.elevation, 1_000_000, seed=1), 36)
    top = set(np.argsort(az.densities)[-4:])
    # bins adjacent to 0 (wrapping) and to pi
    assert top == {0, 35, 17, 18}


# -- delay statistics

def test_sphere_mean_delay(sphere_rays):
    mean, _, _ = empirical_delay_stats(sphere_rays)
    assert mean * SPEED_OF_LIGHT == pytest.approx(0.75, abs=2e-3)


@pytest.mark.parametrize("deg", [0, 30, 45, 60, 90])
def test_rms_delay_matches_quadrature(deg):
    g = solved(deg)
    _, rms, _ = empirical_delay_stats(sample_rays(g.axes, g.elevation, 1_000_000, seed=7))
    assert rms == pytest.approx(rms_delay_spread(g.axes, g.elevation), rel=1e-2)


@pytest.mark.parametrize("deg", [0, 30, 45, 60])
def test_max_delay_bounded(deg):
    g = solved(deg)
    _, _, peak = empirical_delay_stats(sample_rays(g.axes, g.elevation, 1_000_000, seed=7))
    assert peak <= max_relative_delay(g.axes, g.elevation)


def test_zenith_max_delay_can_exceed_backward_point():
    # with b > c the widest ground point is cross-track, not behind the receiver
    g = solved(90)
    assert g.axes.b > g.axes.c
    _, _, peak = empirical_delay_stats(sample_rays(g.axes, g.elevation, 1_000_000, seed=7))
    assert peak > max_relative_delay(g.axes, g.elevation)
    assert peak <= g.axes.b / SPEED_OF_LIGHT


# -- waveform synthesis

def test_mean_power_near_one():
    g = solved(30)
    ens = sample_rays(g.axes, g.elevation, 10_000, seed=3)
    field = synthesize_waveform(ens, 1.0, 200.0, 8.0)
    assert np.mean(np.abs(field) ** 2) == pytest.approx(1, abs=0.05)


def test_single_ray_has_unit_envelope():
    ens = sample_rays(*GENERIC, 1, seed=4)
    field = synthesize_waveform(ens, 50.0, 1.0, 1000.0)
    np.testing.assert_allclose(np.abs(field), 1.0, rtol=1e-12)


def test_oversampling_required():
    ens = sample_rays(*GENERIC, 10, seed=4)
    with pytest.raises(ValueError):
        synthesize_waveform(ens, 10.0, 1.0, 40.0)


# -- periodogram

def test_tone_lands_in_one_bin():
    fs, n, f0 = 64.0, 4096, 5.0
    t = np.arange(n) / fs
    s = periodogram(np.exp(2j * math.pi * f0 * t), 256, 0.5, fs, f_d=8.0, window="boxcar")
    k = np.argmax(s.masses())
    assert s.masses()[k] > 0.9
    assert s.freq_grid[k] == pytest.approx(f0 / 8.0)


def test_unit_total_power():
    x = np.random.default_rng(0).normal(size=5000) * 3 + 1j
    s = periodogram(x, 500, 0.5, 10.0, f_d=2.0)
    assert s.mass() == pytest.approx(1, abs=1e-9)


def test_white_noise_matches_variance_oracle():
    # 100 disjoint boxcar segments: each bin is a chi-square with 200 dof over 200,
    # so its relative spread is 1/sqrt(100) = 0.1
    rng = np.random.default_rng(1)
    m, k = 64, 100
    x = (rng.normal(size=m * k) + 1j * rng.normal(size=m * k)) / math.sqrt(2)
    s = periodogram(x, m, 0.0, 1.0, f_d=0.5, window="boxcar")
    rel = s.density / s.density.mean()
    assert rel.std() == pytest.approx(0.1, rel=0.25)
    within = np.mean(np.abs(rel - 1) <= 0.2)
    expected = stats.chi2.cdf(1.2 * 2 * k, 2 * k) - stats.chi2.cdf(0.8 * 2 * k, 2 * k)
    assert within == pytest.approx(expected, abs=3 * math.sqrt(expected * (1 - expected) / m))


@pytest.mark.parametrize("args", [(1, 0.5), (2000, 0.5), (64, 0.95), (64, -0.1)])
def test_periodogram_argument_errors(args):
    with pytest.raises(ValueError):
        periodogram(np.ones(1000, complex), args[0], args[1], 10.0, 1.0)


def test_empirical_histogram_plumbing():
    h = EmpiricalHistogram(np.array([0.0, 1.0, 3.0]), np.array([2, 2]))
    np.testing.assert_allclose(h.densities, [0.5, 0.25])
    np.testing.assert_allclose(h.centers, [0.5, 2.0])
