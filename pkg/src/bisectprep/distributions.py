"""Probability densities on a finite interval.

Every family is carried truncated to a closed support ``[a, b]`` and
renormalized there, so ``mass(a, b) == 1``.  Families with a closed-form CDF
expose a numerically stable ``mass(lo, hi)`` used by the analytic backend.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DegenerateInputError, DomainError

__all__ = [
    "Distribution", "Uniform", "Exponential", "Gaussian", "GaussianMixture",
    "Tabulated", "Region", "region_bounds", "LogConcavityReport",
    "check_log_concavity", "distribution_from_dict", "load_distribution",
    "GAUSSIAN_TRUNCATION", "POSITIVITY_THRESHOLD", "CONCAVITY_TOLERANCE",
]

GAUSSIAN_TRUNCATION = 5.0  # default support half-width, in standard deviations
EXPONENTIAL_TRUNCATION = 10.0  # default support length, in units of 1/rate
POSITIVITY_THRESHOLD = 1e-15
CONCAVITY_TOLERANCE = 1e-9

_SQRT2 = math.sqrt(2.0)


def _check_support(support) -> tuple[float, float]:
    try:
        a, b = (float(v) for v in support)
    except (TypeError, ValueError):
        raise DomainError(f"support must be a pair of reals, got {support!r}")
    if not (math.isfinite(a) and math.isfinite(b)) or not a < b:
        raise DomainError(f"support must satisfy a < b with finite ends, got [{a}, {b}]")
    return a, b


def _std_normal_mass(z_lo: float, z_hi: float) -> float:
    """P(z_lo <= Z <= z_hi) for a standard normal, without tail cancellation."""
    if z_lo >= 0.0:
        return 0.5 * (math.erfc(z_lo / _SQRT2) - math.erfc(z_hi / _SQRT2))
    if z_hi <= 0.0:
        return 0.5 * (math.erfc(-z_hi / _SQRT2) - math.erfc(-z_lo / _SQRT2))
    return 1.0 - 0.5 * math.erfc(-z_lo / _SQRT2) - 0.5 * math.erfc(z_hi / _SQRT2)


class Distribution:
    """Base class for a normalized density on ``support``.

    Subclasses implement ``_density`` (unnormalized is fine when ``_norm``
    accounts for it) and, when a closed form exists, ``_raw_mass``.
    """

    kind: str = "abstract"
    support: tuple[float, float]

    @property
    def cdf_available(self) -> bool:
        return type(self)._raw_mass is not Distribution._raw_mass

    @property
    def params(self) -> dict:
        return {}

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        a, b = self.support
        inside = (x >= a) & (x <= b)
        with np.errstate(over="ignore", under="ignore"):
            vals = np.where(inside, self._density(np.clip(x, a, b)), 0.0)
        return vals / self._norm if vals.ndim else float(vals) / self._norm

    def mass(self, lo: float, hi: float) -> float:
        """Closed-form probability of ``[lo, hi]``."""
        if not self.cdf_available:
            raise DomainError(f"{self.kind} distribution has no closed-form CDF")
        a, b = self.support
        lo, hi = max(lo, a), min(hi, b)
        if hi <= lo:
            return 0.0
        return min(max(self._raw_mass(lo, hi) / self._norm, 0.0), 1.0)

    def cdf(self, x: float) -> float:
        return self.mass(self.support[0], x)

    def to_dict(self) -> dict:
        return {"family": self.kind, "params": self.params, "support": list(self.support)}

    def _density(self, x):
        raise NotImplementedError

    def _raw_mass(self, lo, hi):
        raise NotImplementedError

    _norm: float = 1.0


@dataclass(frozen=True)
class Uniform(Distribution):
    support: tuple[float, float] = (0.0, 1.0)
    kind = "uniform"

    def __post_init__(self):
        object.__setattr__(self, "support", _check_support(self.support))
        object.__setattr__(self, "_norm", self.support[1] - self.support[0])

    def _density(self, x):
        return np.ones_like(x)

    def _raw_mass(self, lo, hi):
        return hi - lo


@dataclass(frozen=True)
class Exponential(Distribution):
    rate: float = 1.0
    support: tuple[float, float] | None = None
    kind = "exponential"

    def __post_init__(self):
        if not self.rate > 0:
            raise DomainError(f"rate must be positive, got {self.rate}")
        support = self.support
        if support is None:
            support = (0.0, EXPONENTIAL_TRUNCATION / self.rate)
        object.__setattr__(self, "support", _check_support(support))
        a, b = self.support
        object.__setattr__(self, "_norm", -math.expm1(-self.rate * (b - a)))

    @property
    def params(self):
        return {"rate": self.rate}

    def _density(self, x):
        return self.rate * np.exp(-self.rate * (x - self.support[0]))

    def _raw_mass(self, lo, hi):
        a = self.support[0]
        return math.exp(-self.rate * (lo - a)) * -math.expm1(-self.rate * (hi - lo))


@dataclass(frozen=True)
class Gaussian(Distribution):
    """Normal density truncated to ``support`` (default mean +/- 5 sd)."""

    mean: float = 0.0
    stddev: float = 1.0
    support: tuple[float, float] | None = None
    kind = "gaussian"

    def __post_init__(self):
        if not self.stddev > 0:
            raise DomainError(f"stddev must be positive, got {self.stddev}")
        support = self.support
        if support is None:
            half = GAUSSIAN_TRUNCATION * self.stddev
            support = (self.mean - half, self.mean + half)
        object.__setattr__(self, "support", _check_support(support))
        a, b = self.support
        object.__setattr__(self, "_norm", self._raw_mass(a, b))

    @property
    def params(self):
        return {"mean": self.mean, "stddev": self.stddev}

    def _density(self, x):
        z = (x - self.mean) / self.stddev
        return np.exp(-0.5 * z * z) / (self.stddev * math.sqrt(2 * math.pi))

    def _raw_mass(self, lo, hi):
        return _std_normal_mass((lo - self.mean) / self.stddev, (hi - self.mean) / self.stddev)


@dataclass(frozen=True)
class GaussianMixture(Distribution):
    weights: tuple[float, ...] = (0.5, 0.5)
    means: tuple[float, ...] = (-3.0, 3.0)
    stddevs: tuple[float, ...] = (1.0, 1.0)
    support: tuple[float, float] | None = None
    kind = "mixture"

    def __post_init__(self):
        w = tuple(float(v) for v in self.weights)
        mu = tuple(float(v) for v in self.means)
        sd = tuple(float(v) for v in self.stddevs)
        if not (len(w) == len(mu) == len(sd)) or not w:
            raise DomainError("mixture needs equally many weights, means and stddevs")
        if any(v < 0 for v in w) or sum(w) <= 0 or any(not s > 0 for s in sd):
            raise DomainError("mixture weights must be >= 0 (not all zero) and stddevs > 0")
        total = sum(w)
        object.__setattr__(self, "weights", tuple(v / total for v in w))
        object.__setattr__(self, "means", mu)
        object.__setattr__(self, "stddevs", sd)
        support = self.support
        if support is None:
            support = (min(m - GAUSSIAN_TRUNCATION * s for m, s in zip(mu, sd)),
                       max(m + GAUSSIAN_TRUNCATION * s for m, s in zip(mu, sd)))
        object.__setattr__(self, "support", _check_support(support))
        object.__setattr__(self, "_norm", self._raw_mass(*self.support))

    @property
    def params(self):
        return {"components": [{"weight": w, "mean": m, "stddev": s}
                               for w, m, s in zip(self.weights, self.means, self.stddevs)]}

    def _density(self, x):
        out = np.zeros_like(x)
        for w, m, s in zip(self.weights, self.means, self.stddevs):
            z = (x - m) / s
            out = out + w * np.exp(-0.5 * z * z) / (s * math.sqrt(2 * math.pi))
        return out

    def _raw_mass(self, lo, hi):
        return sum(w * _std_normal_mass((lo - m) / s, (hi - m) / s)
                   for w, m, s in zip(self.weights, self.means, self.stddevs))


@dataclass(frozen=True)
class Tabulated(Distribution):
    """Piecewise-linear density through the knots ``(xs, ps)``.

    The support is ``[xs[0], xs[-1]]`` and the table is rescaled so the area
    under the interpolant is one.
    """

    xs: tuple[float, ...] = ()
    ps: tuple[float, ...] = ()
    kind = "tabulated"
    _cum: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=float)
        ps = np.asarray(self.ps, dtype=float)
        if xs.ndim != 1 or xs.shape != ps.shape or xs.size < 2:
            raise DomainError("tabulated density needs matching xs/ps with at least 2 knots")
        if not np.all(np.diff(xs) > 0):
            raise DomainError("tabulated xs must be strictly increasing")
        if np.any(ps < 0) or not np.all(np.isfinite(ps)):
            raise DomainError("tabulated ps must be finite and nonnegative")
        cum = np.concatenate([[0.0], np.cumsum(0.5 * (ps[1:] + ps[:-1]) * np.diff(xs))])
        if cum[-1] <= 0:
            raise DomainError("tabulated density has zero total mass")
        object.__setattr__(self, "xs", tuple(xs.tolist()))
        object.__setattr__(self, "ps", tuple(ps.tolist()))
        object.__setattr__(self, "support", (float(xs[0]), float(xs[-1])))
        object.__setattr__(self, "_cum", cum)
        object.__setattr__(self, "_norm", float(cum[-1]))

    def to_dict(self):
        return {"family": self.kind, "xs": list(self.xs), "ps": list(self.ps)}

    def _density(self, x):
        return np.interp(x, self.xs, self.ps)

    def _primitive(self, x: float) -> float:
        xs, ps = self.xs, self.ps
        k = min(int(np.searchsorted(xs, x, side="right")) - 1, len(xs) - 2)
        t = x - xs[k]
        slope = (ps[k + 1] - ps[k]) / (xs[k + 1] - xs[k])
        return float(self._cum[k]) + ps[k] * t + 0.5 * slope * t * t

    def _raw_mass(self, lo, hi):
        return self._primitive(hi) - self._primitive(lo)


@dataclass(frozen=True)
class Region:
    level: int
    index: int
    left: float
    right: float

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.left + self.right)


def region_bounds(level: int, index: int, support: Sequence[float]) -> Region:
    """Return the ``index``-th of the ``2**level`` equal-width regions tiling ``support``.

    Regions are ordered left to right, so region ``i`` corresponds to basis
    state ``|i>`` read most-significant-qubit first.
    """
    if level < 0:
        raise DomainError(f"level must be >= 0, got {level}")
    if not 0 <= index < 2 ** level:
        raise DomainError(f"index {index} out of range for level {level}")
    a, b = _check_support(support)
    count = 2 ** level
    width = (b - a) / count
    left = a + index * width
    right = b if index == count - 1 else a + (index + 1) * width
    return Region(level, index, left, right)


@dataclass(frozen=True)
class LogConcavityReport:
    passes: bool
    worst_point: float
    worst_value: float
    evaluated: int
    skipped: int
    gaps: int = 0

    def to_dict(self):
        return {"passes": self.passes, "worst_point": self.worst_point,
                "worst_value": self.worst_value, "evaluated": self.evaluated,
                "skipped": self.skipped, "gaps": self.gaps}


def check_log_concavity(dist: Distribution, grid_points: int = 101,
                        tolerance: float = CONCAVITY_TOLERANCE,
                        positivity_threshold: float = POSITIVITY_THRESHOLD) -> LogConcavityReport:
    """Check ``d^2/dx^2 log p <= tolerance`` by central differences on a uniform grid.

    The grid has ``grid_points`` nodes spanning the support; the second
    difference is taken at every interior node whose stencil has density at
    or above ``positivity_threshold``.  Other interior nodes are skipped.

    A skipped node lying between two positive nodes is a gap in the support;
    log-concave densities have interval support, so any gap fails the check
    and is reported with ``worst_value = inf``.
    """
    if grid_points < 3:
        raise DegenerateInputError(f"grid_points must be >= 3, got {grid_points}")
    a, b = dist.support
    h = (b - a) / (grid_points - 1)
    xs = a + h * np.arange(grid_points)
    xs[-1] = b
    ps = np.asarray(dist.pdf(xs), dtype=float)
    positive = ps >= positivity_threshold
    if np.count_nonzero(positive) < 3:
        raise DegenerateInputError("fewer than 3 grid points with positive density")
    usable = positive[:-2] & positive[1:-1] & positive[2:]
    skipped = int(grid_points - 2 - np.count_nonzero(usable))
    pos_idx = np.nonzero(positive)[0]
    gap_idx = np.nonzero(~positive[pos_idx[0]:pos_idx[-1] + 1])[0] + pos_idx[0]
    if gap_idx.size:
        return LogConcavityReport(False, float(xs[gap_idx[0]]), math.inf,
                                  int(np.count_nonzero(usable)), skipped, int(gap_idx.size))
    if not usable.any():
        raise DegenerateInputError("no interior grid point has a positive stencil")
    logp = np.log(np.where(positive, ps, 1.0))
    second = (logp[2:] - 2.0 * logp[1:-1] + logp[:-2]) / (h * h)
    second = np.where(usable, second, -np.inf)
    worst = int(np.argmax(second))
    worst_value = float(second[worst])
    return LogConcavityReport(worst_value <= tolerance, float(xs[worst + 1]), worst_value,
                              int(np.count_nonzero(usable)), skipped)


def distribution_from_dict(spec: dict) -> Distribution:
    """Build a distribution from its JSON form.

    Accepted shapes::

        {"family": "gaussian", "params": {"mean": 0, "stddev": 1}, "support": [-5, 5]}
        {"family": "exponential", "params": {"rate": 1}, "support": [0, 10]}
        {"family": "mixture", "params": {"components": [{"weight": .5, "mean": -3, "stddev": 1}, ...]}}
        {"family": "tabulated", "xs": [...], "ps": [...]}
    """
    if not isinstance(spec, dict) or "family" not in spec:
        raise DomainError("distribution spec must be an object with a 'family' key")
    family = spec["family"]
    params = dict(spec.get("params") or {})
    support = spec.get("support")
    support = tuple(support) if support is not None else None
    try:
        if family == "uniform":
            return Uniform(support if support is not None else (0.0, 1.0))
        if family == "exponential":
            return Exponential(float(params.pop("rate", 1.0)), support)
        if family in ("gaussian", "truncated-gaussian", "normal"):
            if family == "truncated-gaussian" and support is None:
                raise DomainError("truncated-gaussian requires an explicit support")
            return Gaussian(float(params.pop("mean", 0.0)), float(params.pop("stddev", 1.0)), support)
        if family == "mixture":
            comps = params.pop("components")
            return GaussianMixture(tuple(c.get("weight", 1.0) for c in comps),
                                   tuple(c["mean"] for c in comps),
                                   tuple(c.get("stddev", 1.0) for c in comps), support)
        if family == "tabulated":
            return Tabulated(tuple(spec["xs"]), tuple(spec["ps"]))
    except (KeyError, TypeError) as exc:
        raise DomainError(f"malformed {family} spec: {exc}") from exc
    raise DomainError(f"unknown distribution family {family!r}")


def load_distribution(text_or_path: str) -> Distribution:
    """Parse inline JSON, or read JSON from a file path."""
    text = text_or_path.strip()
    if not text.startswith("{"):
        with open(text_or_path) as fh:
            text = fh.read()
    try:
        spec = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DomainError(f"invalid distribution JSON: {exc}") from exc
    return distribution_from_dict(spec)
