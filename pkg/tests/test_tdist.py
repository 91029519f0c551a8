import math

import numpy as np
import pytest
from scipy import integrate, stats

from tsubspace.errors import NumericInputError, ShapeError
from tsubspace.tdist import (
    MixtureParams,
    TParams,
    mixture_log_likelihood,
    mixture_sample,
    t_log_density,
    t_sample,
)

from conftest import random_orthogonal


def mpmath_log_density(x, mu, sigma, nu):
    """High-precision reference: exact rational quadratic form via sympy,
    50-digit special functions via mpmath."""
    import mpmath as mp
    import sympy

    mp.mp.dps = 50
    p = len(mu)
    sig = sympy.Matrix([[sympy.Rational(v) for v in row] for row in sigma])
    diff = sympy.Matrix([sympy.Rational(v) for v in (np.asarray(x) - np.asarray(mu))])
    delta = (diff.T * sig.inv() * diff)[0, 0]
    det = sig.det()
    nu_mp = mp.mpf(nu)
    val = (
        mp.loggamma((nu_mp + p) / 2)
        - mp.loggamma(nu_mp / 2)
        - mp.mpf(p) / 2 * mp.log(mp.pi * nu_mp)
        - mp.log(mp.mpf(str(det))) / 2
        - (nu_mp + p) / 2 * mp.log(1 + mp.mpf(str(delta)) / nu_mp)
    )
    return float(val)


class TestTLogDensity:
    def test_standard_cauchy_mode(self):
        params = TParams(mu=np.zeros(1), sigma=np.eye(1), nu=1.0)
        assert t_log_density(np.zeros(1), params) == pytest.approx(math.log(1 / math.pi), rel=1e-12)

    def test_bivariate_nu2_at_mode(self):
        params = TParams(mu=np.zeros(2), sigma=np.eye(2), nu=2.0)
        assert t_log_density(np.zeros(2), params) == pytest.approx(
            math.log(1 / (2 * math.pi)), rel=1e-12
        )

    def test_against_high_precision_reference(self):
        rng = np.random.default_rng(99)
        for _ in range(5):
            a = rng.integers(-3, 4, size=(4, 4)).astype(float) / 2
            sigma = a @ a.T + 4 * np.eye(4)
            mu = rng.integers(-4, 5, size=4).astype(float) / 4
            x = rng.integers(-8, 9, size=4).astype(float) / 2
            nu = float(rng.integers(1, 12))
            params = TParams(mu=mu, sigma=sigma, nu=nu)
            ref = mpmath_log_density(x, mu, sigma, nu)
            assert t_log_density(x, params) == pytest.approx(ref, abs=1e-10)

    @pytest.mark.parametrize("nu", [1.0, 3.0, 30.0])
    def test_integrates_to_one_univariate(self, nu):
        params = TParams(mu=np.zeros(1), sigma=np.eye(1), nu=nu)
        total, err = integrate.quad(
            lambda v: math.exp(t_log_density(np.array([v]), params)),
            -np.inf,
            np.inf,
        )
        assert total == pytest.approx(1.0, abs=1e-6)

    def test_maximized_at_mode(self, rng):
        params = TParams(mu=rng.standard_normal(3), sigma=np.eye(3) * 2.0, nu=4.0)
        at_mode = t_log_density(params.mu, params)
        for _ in range(20):
            v = rng.standard_normal(3)
            v /= np.linalg.norm(v)
            assert at_mode >= t_log_density(params.mu + 1e-3 * v, params)

    def test_singular_sigma_rejected(self):
        from tsubspace.errors import SingularMatrixError

        with pytest.raises(SingularMatrixError):
            TParams(mu=np.zeros(2), sigma=np.ones((2, 2)), nu=3.0)


class TestMixtureLogLikelihood:
    def test_single_component_matches_sum(self, rng):
        params = TParams(mu=np.zeros(3), sigma=np.eye(3), nu=5.0)
        mix = MixtureParams(proportions=[1.0], components=[params])
        x = rng.standard_normal((8, 3))
        direct = sum(t_log_density(row, params) for row in x)
        assert mixture_log_likelihood(x, mix) == pytest.approx(direct, rel=1e-12)

    def test_duplicate_components_collapse(self, rng):
        comp = TParams(mu=np.ones(2), sigma=np.eye(2), nu=3.0)
        single = MixtureParams(proportions=[1.0], components=[comp])
        double = MixtureParams(proportions=[0.3, 0.7], components=[comp, comp])
        x = rng.standard_normal((10, 2))
        assert mixture_log_likelihood(x, double) == pytest.approx(
            mixture_log_likelihood(x, single), rel=1e-12
        )

    def test_matches_naive_summation(self, rng):
        comps = [
            TParams(mu=rng.standard_normal(3), sigma=np.eye(3), nu=4.0),
            TParams(mu=rng.standard_normal(3), sigma=2 * np.eye(3), nu=7.0),
        ]
        mix = MixtureParams(proportions=[0.4, 0.6], components=comps)
        x = rng.standard_normal((10, 3))
        naive = sum(
            math.log(
                0.4 * math.exp(t_log_density(row, comps[0]))
                + 0.6 * math.exp(t_log_density(row, comps[1]))
            )
            for row in x
        )
        assert mixture_log_likelihood(x, mix) == pytest.approx(naive, abs=1e-9)

    def test_permutation_invariance(self, rng):
        comps = [
            TParams(mu=np.zeros(2), sigma=np.eye(2), nu=3.0),
            TParams(mu=np.ones(2), sigma=np.eye(2), nu=9.0),
        ]
        x = rng.standard_normal((6, 2))
        fwd = MixtureParams(proportions=[0.25, 0.75], components=comps)
        rev = MixtureParams(proportions=[0.75, 0.25], components=comps[::-1])
        assert mixture_log_likelihood(x, fwd) == mixture_log_likelihood(x, rev)

    def test_dimension_mismatch(self):
        mix = MixtureParams(
            proportions=[1.0],
            components=[TParams(mu=np.zeros(3), sigma=np.eye(3), nu=2.0)],
        )
        with pytest.raises(ShapeError):
            mixture_log_likelihood(np.zeros((4, 2)), mix)

    def test_bad_proportions_rejected(self):
        comp = TParams(mu=np.zeros(2), sigma=np.eye(2), nu=3.0)
        with pytest.raises(NumericInputError):
            MixtureParams(proportions=[0.5, 0.6], components=[comp, comp])


class TestSampling:
    def test_seed_determinism(self):
        params = TParams(mu=np.zeros(3), sigma=np.eye(3), nu=4.0)
        np.testing.assert_array_equal(t_sample(params, 50, seed=11), t_sample(params, 50, seed=11))

    def test_gaussian_limit_covariance(self):
        params = TParams(mu=np.zeros(3), sigma=np.eye(3), nu=1e6)
        x = t_sample(params, 10_000, seed=5)
        cov = np.cov(x.T)
        assert np.max(np.abs(cov - np.eye(3))) < 0.1

    def test_mahalanobis_follows_f(self):
        # delta(x, mu | sigma) / p is F(p, nu) distributed.
        p, nu = 2, 3.0
        params = TParams(mu=np.zeros(p), sigma=np.eye(p), nu=nu)
        x = t_sample(params, 10_000, seed=17)
        delta = np.sum(x * x, axis=1)
        emp_median = np.median(delta / p)
        f_median = stats.f.median(p, nu)
        assert abs(emp_median - f_median) / f_median < 0.10

    def test_mixture_sample_single_component(self):
        comp = TParams(mu=np.zeros(2), sigma=np.eye(2), nu=3.0)
        mix = MixtureParams(proportions=[1.0], components=[comp])
        _, labels = mixture_sample(mix, 100, seed=3)
        assert np.all(labels == 0)

    def test_mixture_sample_label_concentration(self):
        comp = TParams(mu=np.zeros(2), sigma=np.eye(2), nu=3.0)
        mix = MixtureParams(proportions=[0.5, 0.5], components=[comp, comp])
        n = 10_000
        _, labels = mixture_sample(mix, n, seed=23)
        count = np.sum(labels == 0)
        assert abs(count - n / 2) <= 3 * math.sqrt(n / 4)

    def test_mixture_sample_determinism(self):
        comps = [
            TParams(mu=np.zeros(2), sigma=np.eye(2), nu=2.0),
            TParams(mu=np.ones(2) * 4, sigma=np.eye(2), nu=3.0),
        ]
        mix = MixtureParams(proportions=[0.5, 0.5], components=comps)
        x1, l1 = mixture_sample(mix, 200, seed=9)
        x2, l2 = mixture_sample(mix, 200, seed=9)
        np.testing.assert_array_equal(x1, x2)
        np.testing.assert_array_equal(l1, l2)

    def test_rotated_scale_sampling(self, rng):
        q = random_orthogonal(rng, 2)
        sigma = q @ np.diag([4.0, 0.25]) @ q.T
        params = TParams(mu=np.array([1.0, -1.0]), sigma=sigma, nu=50.0)
        x = t_sample(params, 20_000, seed=2)
        cov = np.cov(x.T)
        scale = 50.0 / 48.0  # nu / (nu - 2)
        assert np.max(np.abs(cov - scale * sigma)) < 0.15
