"""scikit-learn style wrappers around the elevation pipeline.

``ScattererGeometry`` maps elevations (degrees) to solved semi-axes;
``DopplerPSD`` maps elevations to Doppler spectra on a fixed bin grid. Both
follow the usual ``fit`` / ``transform`` / ``get_params`` contract so they can
sit inside a :class:`sklearn.pipeline.Pipeline`.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_elevations, check_positive, check_ratio
from .angular_pdf import AzimuthSupport
from .delay_stats import DEFAULT_SCHEDULE, DelaySpreadSchedule
from .geometry import DEFAULT_AXIS_RATIO, EllipsoidAxes
from .pipeline import DEFAULT_HEIGHT, METHODS, doppler_spectrum, solve_elevation
from .spectrum import DEFAULT_BINS, uniform_edges


class ScattererGeometry(TransformerMixin, BaseEstimator):
    """Solve the scatterer semi-axes for each elevation.

    Parameters
    ----------
    height : float
        Maximum scatterer height in meters.
    axis_ratio : float
        Cross-track to along-track axis ratio used by the ratio closure.
    max_delay_ns : float, optional
        Maximum relative delay; switches to the delay closure when set.
    schedule : DelaySpreadSchedule, optional
        RMS delay spread targets; the built-in table when omitted.

    Notes
    -----
    ``fit(X, y)`` with ``y`` given (ns) replaces the schedule by the knots
    ``(X, y)``, which must then span 0 to 90 degrees.
    """

    def __init__(self, height=DEFAULT_HEIGHT, axis_ratio=DEFAULT_AXIS_RATIO, max_delay_ns=None,
                 schedule=None):
        self.height = height
        self.axis_ratio = axis_ratio
        self.max_delay_ns = max_delay_ns
        self.schedule = schedule

    def fit(self, X, y=None):
        check_positive(self.height, "height")
        check_ratio(self.axis_ratio)
        if self.max_delay_ns is not None:
            check_positive(self.max_delay_ns, "max_delay_ns")
        if y is None:
            self.schedule_ = self.schedule or DEFAULT_SCHEDULE
        else:
            elev = check_elevations(X, upper=90.0)
            order = np.argsort(elev)
            self.schedule_ = DelaySpreadSchedule(tuple(zip(elev[order], np.asarray(y, float)[order])))
        self.n_features_in_ = 1
        return self

    def _solve(self, elevation):
        return solve_elevation(elevation, height=self.height, schedule=self.schedule_,
                               max_delay_ns=self.max_delay_ns, axis_ratio=self.axis_ratio)

    def transform(self, X):
        """Semi-axes ``[a, b, c]`` in meters, one row per elevation."""
        check_is_fitted(self, "schedule_")
        return np.array([self._solve(e).axes.as_array() for e in check_elevations(X)]).reshape(-1, 3)

    def predict(self, X):
        """RMS delay spread (ns) realised by the solved geometry."""
        check_is_fitted(self, "schedule_")
        return np.array([self._solve(e).rms_delay_spread() * 1e9 for e in check_elevations(X)])


class DopplerPSD(TransformerMixin, BaseEstimator):
    """Doppler PSD densities for rows ``[elevation_deg, a, b, c]``.

    Parameters
    ----------
    method : {"binned", "delta"}
    n_bins : int
        Number of equal bins on [-1, 1] (normalised frequency).
    support : sequence of (lo, hi) degree pairs, optional
        Azimuth support; the full circle when omitted.
    """

    def __init__(self, method="binned", n_bins=DEFAULT_BINS, support=None):
        self.method = method
        self.n_bins = n_bins
        self.support = support

    def fit(self, X=None, y=None):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        self.support_ = (AzimuthSupport.full() if self.support is None
                         else AzimuthSupport.from_degrees(*self.support))
        self.edges_ = uniform_edges(self.n_bins)
        self.n_features_in_ = 4
        return self

    def transform(self, X):
        check_is_fitted(self, "edges_")
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != 4:
            raise ValueError("rows must be [elevation_deg, a, b, c]")
        check_elevations(X[:, 0])
        rows = [doppler_spectrum(EllipsoidAxes(*row[1:]), row[0], self.method, self.support_,
                                 self.n_bins).density for row in X]
        return np.array(rows)
