import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import invgamma, multivariate_normal

from tmax_spacetime.exceptions import FactorizationError, TmaxModelError
from tmax_spacetime.models import SiteMeta
from tmax_spacetime.spatial.gaussian import (
    combine_normals,
    combine_precisions,
    inverse_gamma_logpdf,
    mvn_logpdf_centered,
)
from tmax_spacetime.spatial.kernels import CorrelationCache, default_phi, exp_correlation, phi_support


def make_sites(points):
    return [SiteMeta(id=f"S{k}", x=float(x), y=float(y), elevation=0.0) for k, (x, y) in enumerate(points)]


TRIANGLE = make_sites([(0.0, 0.0), (30.0, 0.0), (0.0, 40.0)])


class TestCorrelation:
    def test_exponential_entries(self):
        corr = exp_correlation(TRIANGLE, 0.02)
        assert corr.matrix[0, 1] == pytest.approx(np.exp(-0.6))
        assert corr.matrix[1, 2] == pytest.approx(np.exp(-1.0))
        np.testing.assert_allclose(np.diag(corr.matrix), 1.0)
        assert corr.log_det == pytest.approx(np.log(np.linalg.det(corr.matrix)))
        np.testing.assert_allclose(corr.precision @ corr.matrix, np.eye(3), atol=1e-10)

    @settings(max_examples=30)
    @given(st.floats(min_value=1e-3, max_value=0.2), st.floats(min_value=1.01, max_value=3.0))
    def test_correlation_decreases_with_decay(self, phi, factor):
        weak = exp_correlation(TRIANGLE, phi).matrix
        strong = exp_correlation(TRIANGLE, phi * factor).matrix
        off = ~np.eye(3, dtype=bool)
        assert np.all(strong[off] < weak[off])

    @given(st.permutations([0, 1, 2]))
    def test_permuting_sites_permutes_the_matrix(self, order):
        base = exp_correlation(TRIANGLE, 0.05).matrix
        permuted = exp_correlation([TRIANGLE[k] for k in order], 0.05).matrix
        np.testing.assert_allclose(permuted, base[np.ix_(order, order)])

    def test_duplicate_locations_name_the_pair(self):
        sites = make_sites([(0.0, 0.0), (5.0, 5.0), (5.0, 5.0)])
        with pytest.raises(FactorizationError) as info:
            exp_correlation(sites, 0.1)
        assert info.value.pair == ("S1", "S2")

    def test_decay_must_be_positive(self):
        with pytest.raises(ValueError):
            exp_correlation(TRIANGLE, 0.0)

    def test_cache_reuses_matrices(self):
        cache = CorrelationCache(TRIANGLE)
        assert cache.get(0.1) is cache.get(0.1)
        assert len(cache.precompute([0.1, 0.2])) == 2


class TestDecay:
    def test_default_decay_reaches_exp_minus_three(self):
        assert default_phi(TRIANGLE) == pytest.approx(3.0 / 50.0)

    def test_single_location(self):
        with pytest.raises(TmaxModelError):
            default_phi(TRIANGLE[:1])

    def test_grid_support(self):
        grid = phi_support(TRIANGLE, 4)
        np.testing.assert_allclose(grid, 3.0 / (50.0 * np.array([0.1, 0.4, 0.7, 1.0])))
        assert phi_support(TRIANGLE, 1, fixed=0.3).tolist() == [0.3]
        assert phi_support(TRIANGLE[:1], 5).tolist() == [1.0]


class TestGaussian:
    def test_combine_two_normals(self):
        mean, variance = combine_normals([(0.0, 1.0), (2.0, 1.0)])
        assert (mean, variance) == (1.0, 0.5)

    @given(st.lists(st.tuples(st.floats(-10, 10), st.floats(0.1, 10)), min_size=1, max_size=6))
    def test_combined_variance_is_below_every_term(self, terms):
        mean, variance = combine_normals(terms)
        assert variance <= min(v for _, v in terms) + 1e-12
        assert min(m for m, _ in terms) - 1e-9 <= mean <= max(m for m, _ in terms) + 1e-9

    def test_combine_rejects_bad_terms(self):
        with pytest.raises(ValueError):
            combine_normals([])
        with pytest.raises(ValueError):
            combine_normals([(0.0, 0.0)])

    def test_precision_form_is_elementwise(self):
        mean, variance = combine_precisions(np.array([2.0, 4.0]), np.array([1.0, 2.0]))
        np.testing.assert_allclose(mean, [0.5, 0.5])
        np.testing.assert_allclose(variance, [0.5, 0.25])

    def test_mvn_matches_scipy(self):
        corr = exp_correlation(TRIANGLE, 0.03)
        x = np.array([1.0, -0.5, 2.0])
        expected = multivariate_normal(mean=np.full(3, 0.4), cov=2.5 * corr.matrix).logpdf(x)
        assert mvn_logpdf_centered(x, 0.4, 2.5, corr) == pytest.approx(expected)

    def test_mvn_checks_its_inputs(self):
        corr = exp_correlation(TRIANGLE, 0.03)
        with pytest.raises(ValueError):
            mvn_logpdf_centered(np.zeros(2), 0.0, 1.0, corr)
        with pytest.raises(ValueError):
            mvn_logpdf_centered(np.zeros(3), 0.0, 0.0, corr)

    def test_inverse_gamma_matches_scipy(self):
        assert inverse_gamma_logpdf(0.7, 2.0, 1.0) == pytest.approx(invgamma(2.0, scale=1.0).logpdf(0.7))
