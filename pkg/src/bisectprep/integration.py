"""Pluggable backends for the mass of a subinterval.

Three methods are available:

``analytic-cdf``
    closed-form CDF differences from the distribution itself.
``adaptive-quadrature``
    interval-halving Simpson rule with an absolute error target.
``monte-carlo``
    uniform sampling of the density on ``[lo, hi]``.  The generator is seeded
    from ``(seed, lo, hi)`` so each interval always sees the same random bits,
    whatever order intervals are evaluated in.
"""
from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .distributions import Distribution, Region
from .errors import DomainError, IntegrationError

__all__ = [
    "IntegrationBackend", "IntegrationResult", "integrate", "integrate_with_error",
    "adaptive_simpson", "left_fraction", "left_fraction_with_error",
    "ANALYTIC", "ZERO_MASS_THRESHOLD", "METHODS",
]

METHODS = ("analytic-cdf", "adaptive-quadrature", "monte-carlo")
ZERO_MASS_THRESHOLD = 1e-15
MAX_DEPTH = 40


@dataclass(frozen=True)
class IntegrationBackend:
    method: str = "analytic-cdf"
    tolerance: float = 1e-12
    sample_count: int = 4096
    seed: int = 0

    def __post_init__(self):
        if self.method not in METHODS:
            raise DomainError(f"unknown integration method {self.method!r}; expected one of {METHODS}")
        if not self.tolerance > 0:
            raise DomainError(f"tolerance must be > 0, got {self.tolerance}")
        if int(self.sample_count) < 1:
            raise DomainError(f"sample_count must be >= 1, got {self.sample_count}")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise DomainError("seed must fit in an unsigned 64-bit integer")

    def to_dict(self):
        out = {"method": self.method, "tolerance": self.tolerance}
        if self.method == "monte-carlo":
            out.update(sample_count=self.sample_count, seed=self.seed)
        return out


ANALYTIC = IntegrationBackend()


class IntegrationResult(NamedTuple):
    mass: float
    error: float  # standard error for monte-carlo, error estimate otherwise


def adaptive_simpson(func, lo: float, hi: float, tolerance: float,
                     max_depth: int = MAX_DEPTH) -> IntegrationResult:
    """Integrate a scalar function by recursive interval-halving Simpson.

    An interval is accepted once the two-half estimate differs from the
    whole-interval estimate by at most ``15 * tol`` (Richardson-corrected),
    with ``tol`` halved at each split.  Raises ``IntegrationError`` if some
    interval is still unresolved at ``max_depth``.
    """
    if hi == lo:
        return IntegrationResult(0.0, 0.0)
    f_lo, f_mid, f_hi = func(lo), func(0.5 * (lo + hi)), func(hi)
    whole = (hi - lo) / 6.0 * (f_lo + 4.0 * f_mid + f_hi)
    total = 0.0
    err_total = 0.0
    unresolved = 0.0
    stack = [(lo, hi, f_lo, f_mid, f_hi, whole, tolerance, 0)]
    eps = np.finfo(float).eps
    while stack:
        a, b, fa, fm, fb, s, tol, depth = stack.pop()
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = func(lm), func(rm)
        left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
        right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
        delta = left + right - s
        # below ~eps * |S| the comparison only measures rounding
        floor = 64.0 * eps * (abs(left) + abs(right))
        if abs(delta) <= 15.0 * max(tol, floor):
            total += left + right + delta / 15.0
            err_total += abs(delta) / 15.0
        elif depth >= max_depth:
            total += left + right
            unresolved += abs(delta) / 15.0
        else:
            stack.append((a, m, fa, flm, fm, left, 0.5 * tol, depth + 1))
            stack.append((m, b, fm, frm, fb, right, 0.5 * tol, depth + 1))
    if unresolved > 0.0 and err_total + unresolved > tolerance:
        raise IntegrationError(
            f"adaptive Simpson did not reach tolerance {tolerance:g} on [{lo}, {hi}] "
            f"within depth {max_depth}", error_estimate=err_total + unresolved)
    return IntegrationResult(total, err_total + unresolved)


def _interval_seed(seed: int, lo: float, hi: float) -> np.random.SeedSequence:
    lo_bits, hi_bits = struct.unpack("<QQ", struct.pack("<dd", lo, hi))
    return np.random.SeedSequence([int(seed), lo_bits, hi_bits])


def _monte_carlo(dist: Distribution, lo: float, hi: float, count: int, seed: int) -> IntegrationResult:
    rng = np.random.default_rng(_interval_seed(seed, lo, hi))
    width = hi - lo
    values = dist.pdf(lo + width * rng.random(count))
    mass = width * float(np.mean(values))
    if count > 1:
        stderr = width * float(np.std(values, ddof=1)) / math.sqrt(count)
    else:
        stderr = abs(mass)
    return IntegrationResult(mass, stderr)


def integrate_with_error(dist: Distribution, lo: float, hi: float,
                         backend: IntegrationBackend = ANALYTIC) -> IntegrationResult:
    """Mass of ``[lo, hi]`` together with the backend's error estimate."""
    a, b = dist.support
    if not (a <= lo <= hi <= b):
        raise DomainError(f"[{lo}, {hi}] is not inside the support [{a}, {b}]")
    if backend.method == "analytic-cdf":
        if not dist.cdf_available:
            raise DomainError(f"analytic-cdf backend needs a CDF; {dist.kind} has none")
        mass, err = dist.mass(lo, hi), 0.0
    elif backend.method == "adaptive-quadrature":
        mass, err = adaptive_simpson(dist.pdf, lo, hi, backend.tolerance)
    else:
        mass, err = _monte_carlo(dist, lo, hi, int(backend.sample_count), backend.seed)
    return IntegrationResult(min(max(mass, 0.0), 1.0), err)


def integrate(dist: Distribution, lo: float, hi: float,
              backend: IntegrationBackend = ANALYTIC) -> float:
    """Probability mass of ``[lo, hi]`` under ``dist``, clamped to [0, 1]."""
    return integrate_with_error(dist, lo, hi, backend).mass


def left_fraction_with_error(dist: Distribution, region: Region,
                             backend: IntegrationBackend = ANALYTIC) -> tuple[float, float]:
    """Return ``(f, var_f)``: the left-half share of ``region`` and its variance.

    The region mass is taken as the sum of the two half masses, which keeps
    ``f`` inside [0, 1] by construction.  Regions lighter than
    ``ZERO_MASS_THRESHOLD`` get ``f = 1/2``.
    """
    mid = region.midpoint
    left, s_left = integrate_with_error(dist, region.left, mid, backend)
    right, s_right = integrate_with_error(dist, mid, region.right, backend)
    total = left + right
    if total < ZERO_MASS_THRESHOLD:
        return 0.5, 0.0
    f = left / total
    var = (right * right * s_left * s_left + left * left * s_right * s_right) / total ** 4
    return min(max(f, 0.0), 1.0), var


def left_fraction(dist: Distribution, region: Region,
                  backend: IntegrationBackend = ANALYTIC) -> float:
    """Conditional probability that x lies in the left half of ``region``."""
    return left_fraction_with_error(dist, region, backend)[0]
