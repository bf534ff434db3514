import mpmath
import numpy as np
import pytest

from bisectprep import Exponential, Gaussian, GaussianMixture, Tabulated, Uniform

mpmath.mp.dps = 40


def _mp_exact_mass(dist, lo, hi):
    """High-precision region mass, independent of the package's CDF code."""
    a, b = dist.support
    lo, hi = mpmath.mpf(lo), mpmath.mpf(hi)
    if dist.kind == "uniform":
        return (hi - lo) / (mpmath.mpf(b) - mpmath.mpf(a))
    if dist.kind == "exponential":
        lam = mpmath.mpf(dist.rate)
        F = lambda x: -mpmath.exp(-lam * (x - a))
        return (F(hi) - F(lo)) / (F(mpmath.mpf(b)) - F(mpmath.mpf(a)))
    if dist.kind == "gaussian":
        F = lambda x: mpmath.ncdf(x, dist.mean, dist.stddev)
        return (F(hi) - F(lo)) / (F(mpmath.mpf(b)) - F(mpmath.mpf(a)))
    if dist.kind == "mixture":
        F = lambda x: sum(w * mpmath.ncdf(x, m, s)
                          for w, m, s in zip(dist.weights, dist.means, dist.stddevs))
        return (F(hi) - F(lo)) / (F(mpmath.mpf(b)) - F(mpmath.mpf(a)))
    if dist.kind == "tabulated":
        pdf = lambda x: mpmath.mpf(float(np.interp(float(x), dist.xs, dist.ps)))
        knots = [lo] + [mpmath.mpf(x) for x in dist.xs if lo < x < hi] + [hi]
        raw = lambda u, v: mpmath.quad(pdf, [u, v])
        total = mpmath.fsum(raw(mpmath.mpf(u), mpmath.mpf(v)) for u, v in zip(dist.xs[:-1], dist.xs[1:]))
        return mpmath.fsum(raw(u, v) for u, v in zip(knots[:-1], knots[1:])) / total
    raise ValueError(dist.kind)


def mp_masses(dist, n):
    a, b = dist.support
    width = (mpmath.mpf(b) - mpmath.mpf(a)) / 2 ** n
    return np.array([float(_mp_exact_mass(dist, a + i * width, a + (i + 1) * width))
                     for i in range(2 ** n)])


@pytest.fixture
def mp_region_masses():
    return mp_masses


FAMILIES = {
    "uniform": Uniform((0.0, 1.0)),
    "exponential": Exponential(1.0, (0.0, 10.0)),
    "gaussian": Gaussian(0.0, 1.0, (-5.0, 5.0)),
    "mixture": GaussianMixture((0.5, 0.5), (-3.0, 3.0), (1.0, 1.0), (-6.0, 6.0)),
    "tabulated": Tabulated((0.0, 0.3, 0.5, 0.9, 1.0), (0.2, 1.0, 0.4, 0.6, 0.1)),
}


@pytest.fixture(params=sorted(FAMILIES))
def family(request):
    return FAMILIES[request.param]


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
