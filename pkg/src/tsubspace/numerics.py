"""Shared numerical kernels: symmetric eigendecomposition, special functions,
Mahalanobis distance, weighted scatter matrices.

All functions are pure and operate on plain numpy arrays; validation helpers
raise the package exceptions instead of letting numpy errors leak through.
"""

import math
from typing import NamedTuple

import numpy as np
from scipy import special as _special

from .errors import (
    DegenerateComponentError,
    DomainError,
    NumericInputError,
    ShapeError,
    SingularMatrixError,
)

SYMMETRY_ATOL = 1e-10
# Positive definiteness: smallest eigenvalue must exceed this fraction of the largest.
MIN_EIG_RATIO = 1e-12


class EigenPair(NamedTuple):
    """Eigendecomposition with eigenvalues sorted descending.

    ``vectors[:, j]`` is the unit eigenvector paired with ``values[j]``; the
    largest-magnitude entry of each column is non-negative so the
    decomposition is unique and reproducible.
    """

    values: np.ndarray
    vectors: np.ndarray


def check_sym_matrix(m, name="matrix"):
    """Validate and return a finite symmetric 2-d array (copy not made)."""
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ShapeError(f"{name} must be square, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise NumericInputError(f"{name} contains non-finite entries")
    if np.max(np.abs(m - m.T), initial=0.0) > SYMMETRY_ATOL:
        raise NumericInputError(f"{name} is not symmetric within {SYMMETRY_ATOL}")
    return m


def sym_eigen(m) -> EigenPair:
    """Eigendecomposition of a symmetric matrix, descending, sign-fixed.

    The input is symmetrized as (M + M') / 2 before solving to absorb
    floating-point drift accumulated in scatter matrices.
    """
    m = check_sym_matrix(m)
    sym = 0.5 * (m + m.T)
    values, vectors = np.linalg.eigh(sym)
    order = np.argsort(values)[::-1]
    values = values[order]
    vectors = vectors[:, order]
    # Fix the sign ambiguity: largest-magnitude entry of each column >= 0.
    anchor = np.abs(vectors).argmax(axis=0)
    flip = vectors[anchor, np.arange(vectors.shape[1])] < 0
    vectors[:, flip] *= -1.0
    return EigenPair(values=values, vectors=vectors)


def log_gamma(x):
    """Natural log of the Gamma function for x > 0."""
    if not (x > 0):
        raise DomainError(f"log_gamma requires x > 0, got {x!r}")
    return math.lgamma(x)


def digamma(x):
    """Derivative of log_gamma for x > 0."""
    if not (x > 0):
        raise DomainError(f"digamma requires x > 0, got {x!r}")
    return float(_special.digamma(x))


def require_positive_definite(sigma, name="sigma"):
    """Check PD via the relative minimum-eigenvalue threshold; returns eigenvalues."""
    sigma = check_sym_matrix(sigma, name)
    values = np.linalg.eigvalsh(0.5 * (sigma + sigma.T))
    largest = values[-1]
    if largest <= 0 or values[0] <= MIN_EIG_RATIO * largest:
        raise SingularMatrixError(
            f"{name} is not positive definite (eigenvalue range "
            f"[{values[0]:.3e}, {largest:.3e}])"
        )
    return values


def mahalanobis(x, mu, sigma):
    """Squared Mahalanobis distance (x-mu)' sigma^-1 (x-mu)."""
    x = np.asarray(x, dtype=float)
    mu = np.asarray(mu, dtype=float)
    if x.shape != mu.shape or x.ndim != 1:
        raise ShapeError(f"x and mu must be equal-length vectors, got {x.shape} and {mu.shape}")
    sigma = check_sym_matrix(sigma)
    if sigma.shape[0] != x.shape[0]:
        raise ShapeError(f"sigma shape {sigma.shape} does not match vector length {x.shape[0]}")
    require_positive_definite(sigma)
    diff = x - mu
    chol = np.linalg.cholesky(0.5 * (sigma + sigma.T))
    half = np.linalg.solve(chol, diff)
    return float(half @ half)


def weighted_scatter(data, weights, mu, normalizer):
    """Weighted scatter sum_i w_i (x_i - mu)(x_i - mu)' / normalizer.

    The normalizer is supplied by the caller (the ECM engine divides by the
    component mass n_g, not by the sum of the weights).
    """
    data = np.asarray(data, dtype=float)
    weights = np.asarray(weights, dtype=float)
    mu = np.asarray(mu, dtype=float)
    if data.ndim != 2:
        raise ShapeError(f"data must be 2-d, got shape {data.shape}")
    if weights.shape != (data.shape[0],):
        raise ShapeError(f"weights shape {weights.shape} does not match {data.shape[0]} rows")
    if mu.shape != (data.shape[1],):
        raise ShapeError(f"mu shape {mu.shape} does not match {data.shape[1]} columns")
    if np.any(weights < 0):
        raise NumericInputError("weights must be non-negative")
    if not np.any(weights > 0):
        raise DegenerateComponentError("all scatter weights are zero")
    if normalizer <= 0:
        raise DegenerateComponentError(f"normalizer must be positive, got {normalizer}")
    diff = data - mu
    scatter = (weights[:, None] * diff).T @ diff / float(normalizer)
    return 0.5 * (scatter + scatter.T)
