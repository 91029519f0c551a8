import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tsubspace.errors import (
    DegenerateComponentError,
    DomainError,
    NumericInputError,
    SingularMatrixError,
)
from tsubspace.numerics import (
    digamma,
    log_gamma,
    mahalanobis,
    sym_eigen,
    weighted_scatter,
)

from conftest import random_orthogonal


class TestSymEigen:
    def test_identity(self):
        pair = sym_eigen(np.eye(3))
        np.testing.assert_allclose(pair.values, np.ones(3), atol=1e-12)

    def test_diagonal(self):
        pair = sym_eigen(np.diag([3.0, 1.0]))
        np.testing.assert_allclose(pair.values, [3.0, 1.0], atol=1e-12)
        np.testing.assert_allclose(np.abs(pair.vectors), np.eye(2), atol=1e-12)

    def test_random_reconstruction(self, rng):
        a = rng.standard_normal((5, 5))
        m = a + a.T
        pair = sym_eigen(m)
        recon = pair.vectors @ np.diag(pair.values) @ pair.vectors.T
        np.testing.assert_allclose(recon, m, atol=1e-8 * (1 + abs(pair.values[0])))

    def test_descending_orthonormal_signed(self, rng):
        for _ in range(20):
            a = rng.standard_normal((6, 6))
            pair = sym_eigen(a + a.T)
            assert np.all(np.diff(pair.values) <= 1e-12)
            gram = pair.vectors.T @ pair.vectors
            assert np.max(np.abs(gram - np.eye(6))) < 1e-10
            anchors = np.abs(pair.vectors).argmax(axis=0)
            assert np.all(pair.vectors[anchors, np.arange(6)] >= 0)

    def test_sign_deterministic(self, rng):
        a = rng.standard_normal((4, 4))
        m = a + a.T
        p1, p2 = sym_eigen(m), sym_eigen(m.copy())
        np.testing.assert_array_equal(p1.vectors, p2.vectors)

    def test_non_finite_rejected(self):
        m = np.eye(3)
        m[0, 0] = np.nan
        with pytest.raises(NumericInputError):
            sym_eigen(m)

    def test_asymmetric_rejected(self):
        m = np.array([[1.0, 2.0], [0.0, 1.0]])
        with pytest.raises(NumericInputError):
            sym_eigen(m)


class TestLogGamma:
    def test_known_values(self):
        assert log_gamma(1.0) == pytest.approx(0.0, abs=1e-15)
        assert log_gamma(0.5) == pytest.approx(0.5 * math.log(math.pi), rel=1e-14)
        assert log_gamma(10.0) == pytest.approx(math.log(362880.0), rel=1e-14)

    def test_domain(self):
        with pytest.raises(DomainError):
            log_gamma(0.0)
        with pytest.raises(DomainError):
            log_gamma(-1.5)

    @given(st.floats(min_value=0.5, max_value=500.0))
    def test_recurrence(self, x):
        # Gamma(x+1) = x Gamma(x)
        assert log_gamma(x + 1.0) == pytest.approx(log_gamma(x) + math.log(x), rel=1e-12)


class TestDigamma:
    def test_euler_mascheroni(self):
        assert digamma(1.0) == pytest.approx(-0.5772156649015329, abs=1e-12)

    def test_recurrence_at_two(self):
        assert digamma(2.0) == pytest.approx(1.0 - 0.5772156649015329, abs=1e-12)

    def test_finite_difference_single(self):
        h = 1e-6
        fd = (log_gamma(7.3 + h) - log_gamma(7.3 - h)) / (2 * h)
        assert digamma(7.3) == pytest.approx(fd, abs=1e-6)

    def test_finite_difference_grid(self):
        h = 1e-6
        for x in np.arange(0.6, 50.0, 0.5):
            fd = (log_gamma(x + h) - log_gamma(x - h)) / (2 * h)
            assert abs(digamma(x) - fd) < 1e-6

    def test_domain(self):
        with pytest.raises(DomainError):
            digamma(0.0)


class TestMahalanobis:
    def test_euclidean_with_identity(self):
        assert mahalanobis([3.0, 4.0], [0.0, 0.0], np.eye(2)) == pytest.approx(25.0)

    def test_zero_at_mean(self):
        mu = np.array([1.5, -2.0, 0.25])
        assert mahalanobis(mu, mu, np.diag([2.0, 3.0, 4.0])) == 0.0

    def test_hand_solved_diagonal(self):
        # (1,1) against diag(4,1): 1/4 + 1/1
        assert mahalanobis([1.0, 1.0], [0.0, 0.0], np.diag([4.0, 1.0])) == pytest.approx(1.25)

    def test_singular_rejected(self):
        with pytest.raises(SingularMatrixError):
            mahalanobis([1.0, 0.0], [0.0, 0.0], np.ones((2, 2)))

    def test_rotation_invariance(self, rng):
        for _ in range(10):
            p = 4
            q = random_orthogonal(rng, p)
            x = rng.standard_normal(p)
            mu = rng.standard_normal(p)
            a = rng.standard_normal((p, p))
            sigma = a @ a.T + p * np.eye(p)
            base = mahalanobis(x, mu, sigma)
            rotated = mahalanobis(q @ x, q @ mu, q @ sigma @ q.T)
            assert rotated == pytest.approx(base, abs=1e-9 * (1 + base))

    @settings(max_examples=50)
    @given(st.integers(min_value=0, max_value=2**31 - 1))
    def test_non_negative(self, seed):
        r = np.random.default_rng(seed)
        p = int(r.integers(2, 6))
        a = r.standard_normal((p, p))
        sigma = a @ a.T + p * np.eye(p)
        value = mahalanobis(r.standard_normal(p), r.standard_normal(p), sigma)
        assert value >= 0.0


class TestWeightedScatter:
    def test_single_point_zero(self):
        x = np.array([[2.0, -1.0]])
        out = weighted_scatter(x, [1.0], x[0], normalizer=1.0)
        np.testing.assert_array_equal(out, np.zeros((2, 2)))

    def test_two_point_hand_case(self):
        x = np.array([[1.0, 0.0], [-1.0, 0.0]])
        out = weighted_scatter(x, [1.0, 1.0], np.zeros(2), normalizer=2.0)
        np.testing.assert_allclose(out, np.diag([1.0, 0.0]), atol=1e-15)

    def test_matches_naive_loop(self, rng):
        x = rng.standard_normal((20, 3))
        w = rng.uniform(0.0, 2.0, size=20)
        mu = rng.standard_normal(3)
        norm = 7.5
        naive = np.zeros((3, 3))
        for i in range(20):
            diff = x[i] - mu
            naive += w[i] * np.outer(diff, diff)
        naive /= norm
        out = weighted_scatter(x, w, mu, normalizer=norm)
        np.testing.assert_allclose(out, naive, atol=1e-12)

    def test_all_zero_weights_rejected(self, rng):
        x = rng.standard_normal((5, 2))
        with pytest.raises(DegenerateComponentError):
            weighted_scatter(x, np.zeros(5), np.zeros(2), normalizer=1.0)

    def test_psd(self, rng):
        x = rng.standard_normal((30, 4))
        w = rng.uniform(0, 1, 30)
        out = weighted_scatter(x, w, x.mean(axis=0), normalizer=w.sum())
        assert np.linalg.eigvalsh(out).min() > -1e-12
