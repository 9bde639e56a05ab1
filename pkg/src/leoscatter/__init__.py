"""Semi-ellipsoid scatterer model of the LEO satellite-to-ground NLOS channel."""
from .angular_pdf import (
    AzimuthSupport,
    JointAoaPdf,
    joint_pdf,
    marginal_azimuth,
    marginal_elevation,
    uv_pdf,
)
from .delay_stats import (
    DEFAULT_SCHEDULE,
    DelaySpreadSchedule,
    delay_spread_target,
    excess_moments,
    mean_excess_distance,
    rms_delay_spread,
    second_moment_excess,
)
from .estimator import DopplerPSD, ScattererGeometry
from .exceptions import (
    BracketError,
    ChannelModelError,
    ConsistencyError,
    ConvergenceError,
    DegenerateAngleError,
    EvaluationError,
    InfeasibleGeometryError,
    UnreachableTargetError,
    UnsupportedTransformError,
)
from .geometry import (
    SPEED_OF_LIGHT,
    EllipsoidAxes,
    EnvironmentSpec,
    c_from_a,
    delay_closure_axes,
    max_height,
    max_relative_delay,
    r_max,
    relative_delay,
    solve_axes,
    x_prime_min,
)
from .montecarlo import (
    empirical_delay_stats,
    empirical_doppler,
    empirical_marginals,
    periodogram,
    sample_rays,
    synthesize_waveform,
    synthesized_psd,
)
from .numerics import Bracket, QuadratureSpec, find_root, integrate_1d, integrate_2d
from .pipeline import doppler_spectrum, fold_degrees, solve_elevation
from .spectrum import (
    DopplerSpectrum,
    SpectralLine,
    autocorrelation,
    compose_rician,
    correlation_from_spectrum,
    flip_spectrum,
    l1_distance,
    mirrored_l1,
    psd_binned,
    psd_delta,
    rebin,
)
