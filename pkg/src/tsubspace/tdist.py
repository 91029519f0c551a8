"""Multivariate-t density, mixture likelihood, and sampling.

The t distribution is handled through its normal variance-mean mixture
representation: W ~ Gamma(shape nu/2, rate nu/2) and X = mu + Y / sqrt(W)
with Y zero-mean Gaussian with covariance sigma. That representation drives
both the sampler and the latent-weight E-step of the fitting engine.
"""

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import NumericInputError, ShapeError
from .numerics import check_sym_matrix, require_positive_definite

PROPORTION_ATOL = 1e-12


@dataclass(frozen=True)
class TParams:
    """Location / scale / degrees-of-freedom triple of one t component."""

    mu: np.ndarray
    sigma: np.ndarray
    nu: float

    def __post_init__(self):
        mu = np.asarray(self.mu, dtype=float)
        sigma = check_sym_matrix(self.sigma, "sigma")
        if mu.ndim != 1 or sigma.shape[0] != mu.shape[0]:
            raise ShapeError(f"mu shape {mu.shape} incompatible with sigma shape {sigma.shape}")
        if not np.all(np.isfinite(mu)):
            raise NumericInputError("mu contains non-finite entries")
        require_positive_definite(sigma)
        if not (self.nu > 0 and math.isfinite(self.nu)):
            raise NumericInputError(f"nu must be a positive finite real, got {self.nu!r}")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "nu", float(self.nu))

    @property
    def dim(self):
        return self.mu.shape[0]


@dataclass(frozen=True)
class MixtureParams:
    """Mixing proportions plus one TParams per component."""

    proportions: np.ndarray
    components: Sequence[TParams] = field(default_factory=tuple)

    def __post_init__(self):
        pi = np.asarray(self.proportions, dtype=float)
        comps = tuple(self.components)
        if pi.ndim != 1 or len(comps) != pi.shape[0]:
            raise ShapeError(
                f"{len(comps)} components do not match {pi.shape} proportions"
            )
        if np.any(pi <= 0):
            raise NumericInputError("mixing proportions must be strictly positive")
        if abs(pi.sum() - 1.0) > PROPORTION_ATOL:
            raise NumericInputError(f"mixing proportions sum to {pi.sum()!r}, not 1")
        dims = {c.dim for c in comps}
        if len(dims) > 1:
            raise ShapeError(f"components disagree on dimension: {sorted(dims)}")
        object.__setattr__(self, "proportions", pi)
        object.__setattr__(self, "components", comps)

    @property
    def n_components(self):
        return len(self.components)

    @property
    def dim(self):
        return self.components[0].dim


def _log_density_rows(x_rows, params: TParams):
    """Vectorized log density of the t distribution for an (n, p) array."""
    p = params.dim
    nu = params.nu
    chol = np.linalg.cholesky(0.5 * (params.sigma + params.sigma.T))
    half = np.linalg.solve(chol, (x_rows - params.mu).T)
    delta = np.sum(half * half, axis=0)
    log_det = 2.0 * np.sum(np.log(np.diag(chol)))
    const = (
        math.lgamma(0.5 * (nu + p))
        - math.lgamma(0.5 * nu)
        - 0.5 * p * math.log(math.pi * nu)
        - 0.5 * log_det
    )
    return const - 0.5 * (nu + p) * np.log1p(delta / nu)


def t_log_density(x, params: TParams):
    """Log of the multivariate-t density at a single point."""
    x = np.asarray(x, dtype=float)
    if x.shape != (params.dim,):
        raise ShapeError(f"x shape {x.shape} does not match dimension {params.dim}")
    return float(_log_density_rows(x[None, :], params)[0])


def mixture_log_likelihood(data, params: MixtureParams):
    """Sum over rows of log sum_g pi_g f_t(x | theta_g), log-sum-exp stabilized."""
    data = np.asarray(data, dtype=float)
    if data.ndim != 2 or data.shape[1] != params.dim:
        raise ShapeError(
            f"data shape {data.shape} does not match component dimension {params.dim}"
        )
    log_terms = np.column_stack(
        [
            np.log(params.proportions[g]) + _log_density_rows(data, params.components[g])
            for g in range(params.n_components)
        ]
    )
    top = log_terms.max(axis=1)
    return float(np.sum(top + np.log(np.sum(np.exp(log_terms - top[:, None]), axis=1))))


def t_sample(params: TParams, n, seed):
    """Draw n i.i.d. rows from the t distribution; deterministic given seed."""
    if n < 1:
        raise ShapeError(f"n must be >= 1, got {n}")
    rng = np.random.default_rng(seed)
    return _sample_with_rng(params, n, rng)


def _sample_with_rng(params: TParams, n, rng):
    p = params.dim
    chol = np.linalg.cholesky(0.5 * (params.sigma + params.sigma.T))
    gaussian = rng.standard_normal((n, p)) @ chol.T
    # W ~ Gamma(shape nu/2, rate nu/2), i.e. scale 2/nu.
    w = rng.gamma(shape=0.5 * params.nu, scale=2.0 / params.nu, size=n)
    return params.mu + gaussian / np.sqrt(w)[:, None]


def mixture_sample(params: MixtureParams, n, seed):
    """Draw n labeled rows from the mixture; returns (data, labels)."""
    if n < 1:
        raise ShapeError(f"n must be >= 1, got {n}")
    rng = np.random.default_rng(seed)
    labels = rng.choice(params.n_components, size=n, p=params.proportions)
    data = np.empty((n, params.dim), dtype=float)
    for g in range(params.n_components):
        mask = labels == g
        count = int(mask.sum())
        if count:
            data[mask] = _sample_with_rng(params.components[g], count, rng)
    return data, labels
