"""Quadrature and root-finding kernels.

All integrands are evaluated vectorised: ``f`` receives numpy arrays of nodes
and must return an array of the same shape. Sums use numpy's pairwise
reduction over contiguous arrays, so results are bit-reproducible.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy import optimize

from .exceptions import BracketError, ConvergenceError, EvaluationError

RULES = ("trapezoid", "midpoint")
MAX_DOUBLINGS = 5


@dataclass(frozen=True)
class QuadratureSpec:
    """Composite-rule settings.

    ``midpoint`` is an open rule evaluated at the midpoints of an
    equal-angle partition ``x = lo + (hi - lo) * (1 - cos t) / 2``; nodes
    cluster toward both ends, which absorbs inverse-square-root endpoint
    singularities exactly. ``trapezoid`` is the plain uniform closed rule.
    """

    points_per_axis: int = 1000
    rule: str = "trapezoid"
    refinement_tolerance: float = 1e-4
    refine: bool = False

    def __post_init__(self):
        if int(self.points_per_axis) != self.points_per_axis or self.points_per_axis < 2:
            raise ValueError(f"points_per_axis must be an integer >= 2, got {self.points_per_axis!r}")
        if self.rule not in RULES:
            raise ValueError(f"rule must be one of {RULES}, got {self.rule!r}")
        if not self.refinement_tolerance > 0:
            raise ValueError("refinement_tolerance must be positive")

    def doubled(self) -> "QuadratureSpec":
        return QuadratureSpec(2 * self.points_per_axis, self.rule, self.refinement_tolerance, self.refine)


@dataclass(frozen=True)
class Bracket:
    lo: float
    hi: float

    def __post_init__(self):
        if not (np.isfinite(self.lo) and np.isfinite(self.hi)):
            raise ValueError(f"bracket bounds must be finite, got [{self.lo}, {self.hi}]")
        if not self.lo < self.hi:
            raise ValueError(f"bracket requires lo < hi, got [{self.lo}, {self.hi}]")

    @property
    def width(self) -> float:
        return self.hi - self.lo


DEFAULT_SPEC = QuadratureSpec()


@lru_cache(maxsize=64)
def _unit_rule(n: int, rule: str) -> tuple[np.ndarray, np.ndarray]:
    # nodes on [0, 1] and weights summing to 1 (read-only, shared through the cache)
    if rule == "trapezoid":
        x = np.linspace(0.0, 1.0, n)
        w = np.full(n, 1.0 / (n - 1))
        w[0] = w[-1] = 0.5 / (n - 1)
    else:
        t = (np.arange(n) + 0.5) * np.pi / n
        x = 0.5 * (1.0 - np.cos(t))
        w = 0.5 * np.sin(t) * np.pi / n
    x.flags.writeable = False
    w.flags.writeable = False
    return x, w


def nodes_and_weights(bracket: Bracket, spec: QuadratureSpec = DEFAULT_SPEC):
    """Return ``(nodes, weights)`` of ``spec`` mapped onto ``bracket``."""
    x, w = _unit_rule(int(spec.points_per_axis), spec.rule)
    return bracket.lo + bracket.width * x, bracket.width * w


def _check_finite(values, *nodes):
    bad = ~np.isfinite(values)
    if bad.any():
        idx = tuple(np.argwhere(bad)[0])
        where = tuple(float(np.asarray(n)[idx]) for n in nodes)
        raise EvaluationError(where[0] if len(where) == 1 else where, complex(values[idx]) if np.iscomplexobj(values) else float(values[idx]))


def refine_estimate(estimate: Callable[[QuadratureSpec], complex], spec: QuadratureSpec):
    """Evaluate ``estimate(spec)``, doubling the grid while ``spec.refine`` demands it."""
    previous = estimate(spec)
    if not spec.refine:
        return previous
    current_spec = spec
    for _ in range(MAX_DOUBLINGS):
        current_spec = current_spec.doubled()
        current = estimate(current_spec)
        scale = max(np.max(np.abs(current)), np.finfo(float).tiny)
        if np.max(np.abs(current - previous)) < spec.refinement_tolerance * scale:
            return current
        previous_pair = (previous, current)
        previous = current
    raise ConvergenceError(
        f"quadrature did not converge to relative {spec.refinement_tolerance} after "
        f"{MAX_DOUBLINGS} doublings",
        estimates=previous_pair,
    )


def integrate_1d(f, bracket: Bracket, spec: QuadratureSpec = DEFAULT_SPEC):
    """Composite-rule estimate of the integral of ``f`` over ``bracket``.

    ``f`` may return shape ``(..., n)`` for ``n`` nodes; the rule is applied
    along the last axis, giving one integral per leading index.

    Raises
    ------
    EvaluationError
        ``f`` is not finite at some node (the node is reported).
    ConvergenceError
        ``spec.refine`` is set and five doublings did not reach the tolerance.
    """

    def estimate(s):
        x, w = nodes_and_weights(bracket, s)
        y = np.asarray(f(x))
        _check_finite(y, np.broadcast_to(x, y.shape))
        return np.sum(w * y, axis=-1)

    return refine_estimate(estimate, spec)


def integrate_2d(f, alpha_bracket: Bracket, beta_bracket: Bracket, spec: QuadratureSpec = DEFAULT_SPEC):
    """Tensor-product composite rule of ``f(alpha, beta)`` over a rectangle."""

    def estimate(s):
        xa, wa = nodes_and_weights(alpha_bracket, s)
        xb, wb = nodes_and_weights(beta_bracket, s)
        A, B = np.meshgrid(xa, xb, indexing="ij")
        y = np.asarray(f(A, B))
        _check_finite(y, A, B)
        # iterated sums keep constants exact, like the 1-D rule
        return np.sum(wa * np.sum(wb * y, axis=-1))

    return refine_estimate(estimate, spec)


def find_root(g: Callable[[float], float], bracket: Bracket, tol: float = 1e-9, accelerate: bool = True) -> float:
    """Bracketed root of a scalar function.

    With ``accelerate`` the search uses Brent's method (secant and inverse
    quadratic steps guarded by bisection); otherwise plain bisection. Both
    are deterministic and return a point within ``tol`` of a sign change.
    """
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol!r}")
    lo, hi = bracket.lo, bracket.hi
    glo, ghi = g(lo), g(hi)
    if glo == 0:
        return lo
    if ghi == 0:
        return hi
    if np.sign(glo) == np.sign(ghi):
        raise BracketError(f"no sign change over [{lo}, {hi}]: g(lo)={glo:.6g}, g(hi)={ghi:.6g}")
    if accelerate:
        return optimize.brentq(g, lo, hi, xtol=tol, rtol=4 * np.finfo(float).eps, maxiter=500)
    while hi - lo >= tol:
        mid = lo + 0.5 * (hi - lo)
        if mid <= lo or mid >= hi:
            break
        gm = g(mid)
        if gm == 0:
            return mid
        if np.sign(gm) == np.sign(glo):
            lo, glo = mid, gm
        else:
            hi = mid
    return lo + 0.5 * (hi - lo)
