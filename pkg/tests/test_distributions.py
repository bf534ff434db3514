import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bisectprep import (DegenerateInputError, DomainError, Exponential, Gaussian,
                        GaussianMixture, IntegrationBackend, IntegrationError, Tabulated,
                        Uniform, check_log_concavity, distribution_from_dict, integrate,
                        left_fraction, load_distribution, region_bounds)
from bisectprep.integration import adaptive_simpson, integrate_with_error

from conftest import FAMILIES, _mp_exact_mass

QUAD = IntegrationBackend("adaptive-quadrature", 1e-10)
MC = IntegrationBackend("monte-carlo", 1e-3, 20000, 1234)


class TestRegionBounds:
    @pytest.mark.parametrize("level,index,support,expected", [
        (1, 0, (0, 1), (0.0, 0.5)),
        (2, 3, (0, 8), (6.0, 8.0)),
        (0, 0, (-4, 4), (-4.0, 4.0)),
    ])
    def test_examples(self, level, index, support, expected):
        r = region_bounds(level, index, support)
        assert (r.left, r.right) == expected

    @pytest.mark.parametrize("level,index", [(1, 2), (0, 1), (3, -1)])
    def test_index_out_of_range(self, level, index):
        with pytest.raises(DomainError):
            region_bounds(level, index, (0, 1))

    @given(st.integers(0, 10), st.floats(-50, 50), st.floats(0.1, 100))
    def test_regions_tile_support(self, level, a, width):
        b = a + width
        regions = [region_bounds(level, i, (a, b)) for i in range(2 ** level)]
        assert regions[0].left == a and regions[-1].right == b
        for r, s in zip(regions, regions[1:]):
            assert r.right == s.left
        widths = np.array([r.right - r.left for r in regions])
        np.testing.assert_allclose(widths, width / 2 ** level, rtol=1e-9)


class TestIntegrate:
    def test_uniform_width(self):
        assert integrate(Uniform((0, 1)), 0.2, 0.5) == pytest.approx(0.3, abs=1e-15)

    @pytest.mark.parametrize("backend", [IntegrationBackend(), QUAD])
    def test_truncated_exponential(self, backend):
        # mpmath: (1 - e^-1) / (1 - e^-10)
        assert integrate(Exponential(1.0, (0, 10)), 0, 1, backend) == pytest.approx(
            0.632149258360486651, abs=2e-10)

    @pytest.mark.parametrize("backend", [IntegrationBackend(), QUAD])
    def test_truncated_normal_one_sigma(self, backend):
        # mpmath: (Phi(1) - Phi(-1)) / (Phi(5) - Phi(-5))
        assert integrate(Gaussian(0, 1, (-5, 5)), -1, 1, backend) == pytest.approx(
            0.682689883525342334, abs=2e-10)

    def test_full_support_has_unit_mass(self, family):
        a, b = family.support
        assert integrate(family, a, b) == pytest.approx(1.0, abs=1e-14)
        assert integrate(family, a, b, QUAD) == pytest.approx(1.0, abs=1e-9)

    def test_outside_support_rejected(self):
        with pytest.raises(DomainError):
            integrate(Uniform((0, 1)), -0.1, 0.5)

    @pytest.mark.parametrize("name", sorted(FAMILIES))
    def test_analytic_matches_high_precision(self, name):
        dist = FAMILIES[name]
        a, b = dist.support
        rng = np.random.default_rng(5)
        for lo, hi in np.sort(rng.uniform(a, b, size=(20, 2)), axis=1):
            assert integrate(dist, lo, hi) == pytest.approx(float(_mp_exact_mass(dist, lo, hi)),
                                                            abs=1e-15, rel=1e-12)

    def test_backend_agreement(self, family):
        a, b = family.support
        rng = np.random.default_rng(11)
        for lo, hi in np.sort(rng.uniform(a, b, size=(10, 2)), axis=1):
            exact = integrate(family, lo, hi)
            assert abs(integrate(family, lo, hi, QUAD) - exact) <= 1e-10 + 1e-12
            mass, se = integrate_with_error(family, lo, hi, MC)
            assert abs(mass - exact) <= 5 * se + 1e-15

    def test_monte_carlo_deterministic(self):
        dist = FAMILIES["gaussian"]
        first = integrate_with_error(dist, -1.0, 2.0, MC)
        assert integrate_with_error(dist, -1.0, 2.0, MC) == first
        other = IntegrationBackend("monte-carlo", 1e-3, 20000, 1235)
        assert integrate_with_error(dist, -1.0, 2.0, other) != first

    def test_clamped(self):
        assert 0.0 <= integrate(FAMILIES["mixture"], -6, 6, MC) <= 1.0

    def test_simpson_failure_reports_error(self):
        # a jump is resolved only down to the depth cap
        step = lambda x: 1.0 if x > 1 / 3 else 0.0
        with pytest.raises(IntegrationError) as info:
            adaptive_simpson(step, 0.0, 1.0, 1e-30, max_depth=8)
        assert info.value.error_estimate > 1e-30

    def test_simpson_polynomial_exact(self):
        res = adaptive_simpson(lambda x: x ** 3 - 2 * x, 0.0, 2.0, 1e-12)
        assert res.mass == pytest.approx(0.0, abs=1e-13)

    @settings(max_examples=40, deadline=None)
    @given(st.sampled_from(sorted(FAMILIES)), st.integers(0, 6), st.data())
    def test_additivity(self, name, level, data):
        dist = FAMILIES[name]
        region = region_bounds(level, data.draw(st.integers(0, 2 ** level - 1)), dist.support)
        for backend in (IntegrationBackend(), QUAD):
            whole = integrate(dist, region.left, region.right, backend)
            halves = (integrate(dist, region.left, region.midpoint, backend)
                      + integrate(dist, region.midpoint, region.right, backend))
            assert abs(whole - halves) <= 2 * backend.tolerance


class TestBackend:
    @pytest.mark.parametrize("kwargs", [
        {"method": "simpson"}, {"tolerance": 0.0}, {"sample_count": 0}, {"seed": -1},
    ])
    def test_invalid(self, kwargs):
        with pytest.raises(DomainError):
            IntegrationBackend(**kwargs)


class TestLeftFraction:
    @given(st.integers(0, 8), st.data())
    def test_uniform_is_half(self, level, data):
        region = region_bounds(level, data.draw(st.integers(0, 2 ** level - 1)), (0, 1))
        assert left_fraction(Uniform((0, 1)), region) == 0.5

    def test_exponential_first_unit(self):
        region = region_bounds(0, 0, (0, 1))
        dist = Exponential(1.0, (0, 10))
        # this region is not on the (0, 10) grid; left_fraction only needs it inside the support
        assert left_fraction(dist, region) == pytest.approx(0.622459331201854565, abs=1e-14)

    def test_zero_mass_region(self):
        dist = Tabulated((0.0, 0.1, 0.11, 1.0), (1.0, 1.0, 0.0, 0.0))
        region = region_bounds(2, 3, dist.support)
        assert left_fraction(dist, region) == 0.5

    @settings(max_examples=30, deadline=None)
    @given(st.sampled_from(sorted(FAMILIES)), st.integers(0, 10), st.data())
    def test_in_unit_interval(self, name, level, data):
        dist = FAMILIES[name]
        region = region_bounds(level, data.draw(st.integers(0, 2 ** level - 1)), dist.support)
        for backend in (IntegrationBackend(), QUAD, MC):
            assert 0.0 <= left_fraction(dist, region, backend) <= 1.0


class TestLogConcavity:
    def test_standard_normal(self):
        report = check_log_concavity(Gaussian(0, 1), 101)
        assert report.passes
        # log p'' = -1 exactly for a quadratic log density
        assert report.worst_value == pytest.approx(-1.0, abs=1e-9)

    def test_exponential_is_boundary_case(self):
        report = check_log_concavity(Exponential(1.0, (0, 10)), 101)
        assert report.passes
        assert abs(report.worst_value) < 1e-9

    def test_bimodal_mixture_fails_at_centre(self):
        report = check_log_concavity(GaussianMixture((0.5, 0.5), (-3, 3), (1, 1), (-6, 6)), 201)
        assert not report.passes
        assert abs(report.worst_point) < 0.1
        # independent oracle: second difference of the mixture log density at 0
        h = 12 / 200
        logp = lambda x: math.log(math.exp(-(x - 3) ** 2 / 2) + math.exp(-(x + 3) ** 2 / 2))
        expected = (logp(h) - 2 * logp(0) + logp(-h)) / h ** 2
        assert report.worst_value == pytest.approx(expected, rel=1e-6)

    def test_deterministic(self):
        dist = FAMILIES["mixture"]
        assert check_log_concavity(dist, 201) == check_log_concavity(dist, 201)

    def test_support_gap_fails(self):
        dist = Tabulated((0, 1, 2, 3, 4), (1.0, 1.0, 0.0, 1.0, 1.0))
        report = check_log_concavity(dist, 5)
        assert not report.passes and report.gaps == 1 and report.worst_point == 2.0

    def test_zero_tails_are_skipped_not_gaps(self):
        dist = Tabulated((0, 1, 2, 3, 4, 5, 6), (0.0, 0.0, 1.0, 1.0, 1.0, 0.0, 0.0))
        report = check_log_concavity(dist, 7)
        assert report.gaps == 0 and report.evaluated == 1 and report.skipped == 4
        assert report.passes and report.worst_point == 3.0

    def test_degenerate(self):
        with pytest.raises(DegenerateInputError):
            check_log_concavity(Gaussian(0, 1), 2)
        with pytest.raises(DegenerateInputError):
            check_log_concavity(Tabulated((0, 1, 2, 3), (0.0, 1.0, 0.0, 0.0)), 4)


class TestFamilies:
    def test_defaults(self):
        assert Gaussian(2.0, 0.5).support == (-0.5, 4.5)
        assert Exponential(2.0).support == (0.0, 5.0)

    @pytest.mark.parametrize("bad", [
        lambda: Uniform((1, 0)), lambda: Gaussian(0, -1), lambda: Exponential(0.0),
        lambda: Tabulated((0, 0), (1, 1)), lambda: Tabulated((0, 1), (-1, 1)),
        lambda: GaussianMixture((1.0,), (0.0, 1.0), (1.0,)),
    ])
    def test_invalid(self, bad):
        with pytest.raises(DomainError):
            bad()

    def test_pdf_nonnegative_and_zero_outside(self, family):
        a, b = family.support
        xs = np.linspace(a - 1, b + 1, 500)
        ps = family.pdf(xs)
        assert np.all(ps >= 0)
        assert np.all(ps[(xs < a) | (xs > b)] == 0)

    def test_tabulated_normalized(self):
        dist = Tabulated((0.0, 1.0, 2.0), (1.0, 3.0, 1.0))
        assert dist.mass(0.0, 2.0) == pytest.approx(1.0)
        assert dist.mass(0.0, 1.0) == pytest.approx(0.5)
        assert dist.pdf(1.0) == pytest.approx(3.0 / 4.0)


class TestJson:
    def test_gaussian(self):
        d = distribution_from_dict({"family": "gaussian", "params": {"mean": 0, "stddev": 1},
                                    "support": [-5, 5]})
        assert isinstance(d, Gaussian) and d.support == (-5.0, 5.0)

    def test_tabulated(self):
        d = load_distribution('{"family": "tabulated", "xs": [0, 1, 2], "ps": [0, 1, 0]}')
        assert isinstance(d, Tabulated) and d.mass(0, 1) == pytest.approx(0.5)

    def test_mixture_from_file(self, tmp_path):
        spec = {"family": "mixture", "params": {"components": [
            {"weight": 1, "mean": -3, "stddev": 1}, {"weight": 1, "mean": 3, "stddev": 1}]},
            "support": [-6, 6]}
        path = tmp_path / "mix.json"
        path.write_text(json.dumps(spec))
        d = load_distribution(str(path))
        assert d.weights == (0.5, 0.5)

    def test_round_trip(self, family):
        again = distribution_from_dict(json.loads(json.dumps(family.to_dict())))
        a, b = family.support
        xs = np.linspace(a, b, 33)
        np.testing.assert_allclose(again.pdf(xs), family.pdf(xs), rtol=1e-14)

    @pytest.mark.parametrize("spec", [
        {"family": "cauchy"}, {"params": {}}, {"family": "truncated-gaussian"},
        {"family": "tabulated", "xs": [0, 1]},
    ])
    def test_rejects(self, spec):
        with pytest.raises(DomainError):
            distribution_from_dict(spec)
