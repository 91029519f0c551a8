"""ECM fitting engine for the constrained t-mixture subspace models.

Each component g lives mostly in a d_g-dimensional subspace spanned by the
leading eigenvectors of its scale matrix; the remaining p - d_g directions
share a single noise eigenvalue b_g. Responsibilities are computed through a
projection-based cost function (no p x p inverses or determinants), the
CM-steps update proportions, locations, degrees of freedom (closed-form
approximation), intrinsic dimensions and the eigenstructure under the
requested constraint pattern, and Aitken acceleration decides convergence.
"""

import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .errors import (
    ConstraintViolationError,
    DegenerateComponentError,
    EmptyComponentWarning,
    FitFailedError,
    InfeasibleError,
    NumericInputError,
    ShapeError,
)
from .models import (
    DimensionAssignment,
    ModelSpec,
    free_param_count,
    gaussian_param_count,
    parse_model,
)
from .numerics import digamma, sym_eigen, weighted_scatter

NU_INITIAL = 50.0
RESTART_LIMIT = 5  # extra seeds tried after a degenerate component
_MIN_COMPONENT_MASS = 2.0
_EIG_FLOOR_RATIO = 1e-12
_MONOTONE_SLACK = 1e-9
_LOG_PI = math.log(math.pi)
_LOG_2PI = math.log(2.0 * math.pi)


# ---------------------------------------------------------------------------
# state containers


@dataclass
class ComponentState:
    """Parameters of one mixture component.

    ``orient`` is the full p x p orthonormal eigenvector matrix; the first
    ``d`` columns span the component's subspace. ``a`` holds the d leading
    eigenvalues (non-increasing) and ``b`` the shared trailing eigenvalue.
    ``nu`` is None in Gaussian mode.
    """

    pi: float
    mu: np.ndarray
    orient: np.ndarray
    a: np.ndarray
    b: float
    d: int
    nu: Optional[float]

    def __post_init__(self):
        self.mu = np.asarray(self.mu, dtype=float)
        self.orient = np.asarray(self.orient, dtype=float)
        self.a = np.asarray(self.a, dtype=float)

    @property
    def dim(self):
        return self.mu.shape[0]

    def validate(self):
        p = self.dim
        if not (0.0 < self.pi <= 1.0):
            raise ConstraintViolationError(f"pi must lie in (0, 1], got {self.pi}")
        if not np.all(np.isfinite(self.mu)):
            raise NumericInputError("mu contains non-finite entries")
        if self.orient.shape != (p, p):
            raise ShapeError(f"orient shape {self.orient.shape}, expected {(p, p)}")
        gram_err = np.max(np.abs(self.orient.T @ self.orient - np.eye(p)))
        if gram_err > 1e-10:
            raise ConstraintViolationError(f"orient is not orthonormal (error {gram_err:.2e})")
        if not 1 <= self.d <= p - 1:
            raise ConstraintViolationError(f"d={self.d} outside [1, {p - 1}]")
        if self.a.shape != (self.d,):
            raise ShapeError(f"a has shape {self.a.shape}, expected ({self.d},)")
        if self.d > 1 and np.any(np.diff(self.a) > 1e-12 * np.abs(self.a[:-1])):
            raise ConstraintViolationError("a must be sorted non-increasing")
        if not (self.b > 0):
            raise ConstraintViolationError(f"b must be positive, got {self.b}")
        if self.a[-1] < self.b * (1.0 - 1e-9):
            raise ConstraintViolationError(
                f"smallest retained eigenvalue {self.a[-1]} below noise level {self.b}"
            )
        if self.nu is not None and not (self.nu > 0 and math.isfinite(self.nu)):
            raise ConstraintViolationError(f"nu must be positive finite or None, got {self.nu}")
        return self


@dataclass
class Responsibilities:
    """Posterior membership matrix z and latent precision weights u (both n x G)."""

    z: np.ndarray
    u: np.ndarray

    def __post_init__(self):
        self.z = np.asarray(self.z, dtype=float)
        self.u = np.asarray(self.u, dtype=float)

    def validate(self):
        if self.z.shape != self.u.shape or self.z.ndim != 2:
            raise ShapeError(f"z shape {self.z.shape} and u shape {self.u.shape} must match")
        if np.any(self.z < 0) or np.any(self.z > 1):
            raise NumericInputError("z entries must lie in [0, 1]")
        if np.max(np.abs(self.z.sum(axis=1) - 1.0)) > 1e-10:
            raise NumericInputError("z rows must sum to 1")
        if np.any(self.u <= 0):
            raise NumericInputError("u entries must be strictly positive")
        return self

    @property
    def masses(self):
        return self.z.sum(axis=0)


@dataclass(frozen=True)
class FitConfig:
    """Knobs of a single ECM fit; immutable so configs can be shared."""

    init: str = "kmeans"
    n_init: Optional[int] = None
    max_iter: int = 200
    epsilon: float = 1e-2
    dim_method: str = "scree"
    scree_threshold: float = 0.2
    nu_bounds: tuple = (1.0, 200.0)
    gaussian_mode: bool = False
    seed: int = 0

    def __post_init__(self):
        if self.init not in ("kmeans", "random"):
            raise ValueError(f"init must be 'kmeans' or 'random', got {self.init!r}")
        if self.max_iter < 3:
            raise ValueError("max_iter must be >= 3 (Aitken needs three log-likelihoods)")
        if not (self.epsilon > 0):
            raise ValueError("epsilon must be positive")
        if self.dim_method not in ("bic", "scree"):
            raise ValueError(f"dim_method must be 'bic' or 'scree', got {self.dim_method!r}")
        if not (0.0 < self.scree_threshold < 1.0):
            raise ValueError("scree_threshold must lie in (0, 1)")
        lo, hi = self.nu_bounds
        if not (0 < lo <= hi):
            raise ValueError(f"nu_bounds must satisfy 0 < lo <= hi, got {self.nu_bounds}")
        if self.n_init is not None and self.n_init < 1:
            raise ValueError("n_init must be >= 1")
        if int(self.seed) < 0:
            raise ValueError("seed must be a non-negative integer")

    @property
    def resolved_n_init(self):
        if self.n_init is not None:
            return self.n_init
        return 1 if self.init == "kmeans" else 10


@dataclass
class FitResult:
    """Converged parameters plus fitting diagnostics for one (model, G) pair."""

    spec: ModelSpec
    G: int
    states: tuple
    resp: Responsibilities
    labels: np.ndarray
    loglik_trace: np.ndarray
    bic: float
    converged: bool
    iterations: int
    n_params: int
    gaussian: bool
    diagnostics: dict = field(default_factory=dict)

    @property
    def loglik(self):
        return float(self.loglik_trace[-1])

    @property
    def dims(self):
        return DimensionAssignment.of([s.d for s in self.states])


def derive_seed(*parts):
    """Deterministic child seed from non-negative integer parts."""
    ss = np.random.SeedSequence([int(p) for p in parts])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


# ---------------------------------------------------------------------------
# projections and cost function


def project(x, state: ComponentState):
    """Split x into its subspace and orthogonal-complement projections.

    Both projections are affine around the component mean, so
    p_vec + p_perp - mu == x.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (state.dim,):
        raise ShapeError(f"x shape {x.shape} does not match dimension {state.dim}")
    basis = state.orient[:, : state.d]
    diff = x - state.mu
    inside = basis @ (basis.T @ diff)
    p_vec = inside + state.mu
    p_perp = (diff - inside) + state.mu
    return p_vec, p_perp


def _state_log_constant(state: ComponentState, gaussian):
    """d-, a-, b-, nu-dependent additive part of the cost (everything but the
    quadratic form and the mixing proportion)."""
    p = state.dim
    log_a_sum = float(np.sum(np.log(state.a)))
    log_b_part = (p - state.d) * math.log(state.b)
    if gaussian:
        return p * _LOG_2PI + log_a_sum + log_b_part
    nu = state.nu
    return (
        -2.0 * math.lgamma(0.5 * (nu + p))
        + 2.0 * math.lgamma(0.5 * nu)
        + p * (math.log(nu) + _LOG_PI)
        + log_a_sum
        + log_b_part
    )


def _delta_rows(x_rows, state: ComponentState):
    """Squared scale-weighted distance split through the projections:
    ||mu - P(x)||^2 in the inverse-eigenvalue metric plus the complement
    residual divided by b."""
    basis = state.orient[:, : state.d]
    diff = x_rows - state.mu
    coords = diff @ basis
    proj_part = np.sum((coords * coords) / state.a, axis=1)
    resid = np.sum(diff * diff, axis=1) - np.sum(coords * coords, axis=1)
    np.maximum(resid, 0.0, out=resid)
    return proj_part + resid / state.b


def _cost_rows(x_rows, state: ComponentState, gaussian):
    delta = _delta_rows(x_rows, state)
    const = _state_log_constant(state, gaussian)
    if gaussian:
        quad = delta
    else:
        quad = (state.nu + state.dim) * np.log1p(delta / state.nu)
    return const + quad - 2.0 * math.log(state.pi), delta


def cost_K(x, state: ComponentState, gaussian_mode=False):
    """Cost of assigning x to this component: -2 log(pi_g f(x | component))."""
    x = np.asarray(x, dtype=float)
    if x.shape != (state.dim,):
        raise ShapeError(f"x shape {x.shape} does not match dimension {state.dim}")
    cost, _ = _cost_rows(x[None, :], state, gaussian_mode)
    return float(cost[0])


def _cost_matrix(x_rows, states, gaussian):
    n = x_rows.shape[0]
    G = len(states)
    costs = np.empty((n, G))
    deltas = np.empty((n, G))
    for g, state in enumerate(states):
        costs[:, g], deltas[:, g] = _cost_rows(x_rows, state, gaussian)
    return costs, deltas


def _responsibilities(x_rows, states, gaussian):
    """Returns (z, u, loglik): softmax of -K/2, latent weights, and the
    observed log-likelihood computed from the same costs."""
    costs, deltas = _cost_matrix(x_rows, states, gaussian)
    scores = -0.5 * costs
    top = scores.max(axis=1, keepdims=True)
    expd = np.exp(scores - top)
    norm = expd.sum(axis=1, keepdims=True)
    z = expd / norm
    loglik = float(np.sum(top[:, 0] + np.log(norm[:, 0])))
    if gaussian:
        u = np.ones_like(z)
    else:
        nus = np.array([s.nu for s in states])
        p = states[0].dim
        u = (nus + p) / (nus + deltas)
    return z, u, loglik


def e_step(data, states, gaussian_mode=False) -> Responsibilities:
    """Posterior memberships and latent weights for the current parameters."""
    x_rows = _check_data(data, states[0].dim)
    z, u, _ = _responsibilities(x_rows, states, gaussian_mode)
    masses = z.sum(axis=0)
    for g, mass in enumerate(masses):
        if mass < 1.0:
            warnings.warn(
                f"component {g} has responsibility mass {mass:.3g} < 1",
                EmptyComponentWarning,
                stacklevel=2,
            )
    return Responsibilities(z=z, u=u)


def _check_data(data, p=None):
    x_rows = np.asarray(data, dtype=float)
    if x_rows.ndim != 2:
        raise ShapeError(f"data must be 2-d, got shape {x_rows.shape}")
    if not np.all(np.isfinite(x_rows)):
        raise NumericInputError("data contains non-finite entries")
    if p is not None and x_rows.shape[1] != p:
        raise ShapeError(f"data has {x_rows.shape[1]} columns, expected {p}")
    return x_rows


# ---------------------------------------------------------------------------
# CM updates


def update_pi_mu(data, resp: Responsibilities):
    """Mixing proportions n_g / n and u-weighted component means."""
    x_rows = _check_data(data)
    z, u = resp.z, resp.u
    n = x_rows.shape[0]
    weights = z * u
    totals = weights.sum(axis=0)
    if np.any(totals <= 0):
        raise DegenerateComponentError(
            f"zero total weight in component(s) {np.nonzero(totals <= 0)[0].tolist()}"
        )
    pi = z.sum(axis=0) / n
    mus = [(weights[:, g] @ x_rows) / totals[g] for g in range(z.shape[1])]
    return pi, mus


def _nu_closed_form(k, nu_old):
    # Solves log(nu/2) - digamma(nu/2) = k using exp(digamma(x)) ~ x - 1/2
    # with the residual evaluated at nu_old.
    ek = math.exp(k)
    corr = math.exp(digamma(0.5 * nu_old)) + 0.5 * (1.0 - nu_old)
    return (-ek + 2.0 * ek * corr) / (1.0 - ek)


def _nu_objective(nu, k):
    # Expected complete-data objective for the df block, per unit mass.
    x = 0.5 * nu
    return x * math.log(x) - math.lgamma(x) - x * (1.0 + k)


def _nu_candidate(k, nu_old, bounds):
    """Closed-form candidate, clamped, accepted only if it does not decrease
    the conditional objective; returns (value, fell_back)."""
    lo, hi = bounds
    base = min(max(nu_old, lo), hi)
    if not math.isfinite(k) or k <= 0:
        return base, True
    try:
        cand = _nu_closed_form(k, nu_old)
    except OverflowError:
        return base, True
    if not math.isfinite(cand) or cand <= 0:
        return base, True
    cand = min(max(cand, lo), hi)
    gain = _nu_objective(cand, k) - _nu_objective(base, k)
    if gain < -1e-12 * max(1.0, abs(_nu_objective(base, k))):
        return base, True
    return cand, False


def _update_nu(z, u, states, constrained, bounds, p):
    """Per-group (or pooled) closed-form df update; returns (values, fallbacks)."""
    G = z.shape[1]
    masses = z.sum(axis=0)
    log_u_minus_u = np.log(u) - u
    scores = np.einsum("ig,ig->g", z, log_u_minus_u)
    fallbacks = 0
    if constrained:
        n = float(z.shape[0])
        nu_old = float(np.dot(masses, [s.nu for s in states]) / masses.sum())
        half_old = 0.5 * (nu_old + p)
        k = -1.0 - scores.sum() / n - digamma(half_old) + math.log(half_old)
        value, fell = _nu_candidate(k, nu_old, bounds)
        fallbacks += int(fell)
        return np.full(G, value), fallbacks
    values = np.empty(G)
    for g in range(G):
        nu_old = states[g].nu
        half_old = 0.5 * (nu_old + p)
        k = -1.0 - scores[g] / masses[g] - digamma(half_old) + math.log(half_old)
        values[g], fell = _nu_candidate(k, nu_old, bounds)
        fallbacks += int(fell)
    return values, fallbacks


def update_nu(data, resp: Responsibilities, states, constrained, nu_bounds):
    """Degrees-of-freedom update; a G-vector, or one pooled scalar when constrained."""
    del data  # shape information comes from the states
    p = states[0].dim
    values, _ = _update_nu(resp.z, resp.u, states, constrained, nu_bounds, p)
    return float(values[0]) if constrained else values


# ---------------------------------------------------------------------------
# intrinsic dimension selection


def _scree_dim(lam, threshold):
    diffs = lam[:-1] - lam[1:]
    top = diffs.max(initial=0.0)
    if top <= 0:
        return 1
    ratios = diffs / top
    above = np.nonzero(ratios >= threshold)[0]
    return int(above[-1]) + 1


def _dim_scores_bic(lam, spec, G, p, n_total):
    """Score 2 l(d) - rho(d) log n for each candidate d in 1..p-1."""
    floor = max(lam[0], 0.0) * _EIG_FLOOR_RATIO + 1e-300
    scores = np.empty(p - 1)
    for d in range(1, p):
        a_mean = max(float(np.mean(lam[:d])), floor)
        b_mean = max(float(np.mean(lam[d:])), floor)
        loglik = -0.5 * n_total * (d * math.log(a_mean) + (p - d) * math.log(b_mean))
        rho = free_param_count(spec, G, p, [d] * G)
        scores[d - 1] = 2.0 * loglik - rho * math.log(n_total)
    return scores


def select_dims(eigvals, n_g, spec: ModelSpec, config: FitConfig) -> DimensionAssignment:
    """Choose each component's intrinsic dimension from its eigenvalue spectrum.

    ``scree``: the largest index whose normalized consecutive eigenvalue gap
    still reaches scree_threshold (1 if the spectrum is flat). ``bic``: argmax
    over d of twice the profiled spectral log-likelihood minus the model's
    parameter count at that dimension times log n. Under a common-dimension
    constraint the per-group criteria are pooled with weights n_g.
    """
    spectra = [np.asarray(v, dtype=float) for v in eigvals]
    masses = np.asarray(n_g, dtype=float)
    G = len(spectra)
    p = spectra[0].shape[0]
    if p < 2:
        raise ShapeError("dimension selection needs p >= 2")
    n_total = float(masses.sum())
    if spec.common_dim:
        if config.dim_method == "scree":
            pooled = np.average(np.vstack(spectra), axis=0, weights=masses)
            d = _scree_dim(pooled, config.scree_threshold)
        else:
            total = np.zeros(p - 1)
            for lam, mass in zip(spectra, masses):
                total += mass * _dim_scores_bic(lam, spec, G, p, n_total)
            d = int(np.argmax(total)) + 1
        dims = [d] * G
    else:
        dims = []
        for lam in spectra:
            if config.dim_method == "scree":
                dims.append(_scree_dim(lam, config.scree_threshold))
            else:
                dims.append(int(np.argmax(_dim_scores_bic(lam, spec, G, p, n_total))) + 1)
    return DimensionAssignment.of(dims)


# ---------------------------------------------------------------------------
# constrained eigenstructure updates


def _build_states(spec, pi, mus, nus, eig_pairs, masses, dims: DimensionAssignment):
    """Assemble component states from per-group eigenstructure under the
    constraint pattern. Shared quantities are computed once so constrained
    parameters are bitwise-identical across groups."""
    G = len(mus)
    p = mus[0].shape[0]
    spectra = [pair.values for pair in eig_pairs]
    floor = max(max(lam[0] for lam in spectra), 0.0) * _EIG_FLOOR_RATIO + 1e-300
    for lam in spectra:
        if lam[0] <= 0:
            raise DegenerateComponentError("scatter matrix has no positive eigenvalue")
    d_list = dims.dims

    a_cons = spec.a_constraint
    if a_cons == "U":
        a_vals = [np.maximum(spectra[g][: d_list[g]], floor) for g in range(G)]
    elif a_cons == "D":
        a_vals = [
            np.full(d_list[g], max(float(np.mean(spectra[g][: d_list[g]])), floor))
            for g in range(G)
        ]
    elif a_cons == "G":
        shared = np.maximum(spectra[0][: d_list[0]], floor)
        a_vals = [shared] * G
    else:  # "C"
        retained = sum(masses[g] * float(np.sum(spectra[g][: d_list[g]])) for g in range(G))
        count = sum(masses[g] * d_list[g] for g in range(G))
        shared_value = max(retained / count, floor)
        a_vals = [np.full(d_list[g], shared_value) for g in range(G)]

    if spec.b_constraint == "U":
        b_vals = [max(float(np.mean(spectra[g][d_list[g]:])), floor) for g in range(G)]
    else:
        trailing = sum(masses[g] * float(np.sum(spectra[g][d_list[g]:])) for g in range(G))
        count = sum(masses[g] * (p - d_list[g]) for g in range(G))
        shared_b = max(trailing / count, floor)
        b_vals = [shared_b] * G

    states = []
    for g in range(G):
        # Cross-group sharing can push b above a group's smallest retained
        # eigenvalue; the block-diagonal form requires a_jg >= b_g, so clamp.
        a_g = np.maximum(np.asarray(a_vals[g], dtype=float), b_vals[g])
        states.append(
            ComponentState(
                pi=float(pi[g]),
                mu=mus[g],
                orient=eig_pairs[g].vectors,
                a=a_g,
                b=float(b_vals[g]),
                d=d_list[g],
                nu=None if nus is None else float(nus[g]),
            )
        )
    return tuple(states)


def _moment_updates(x_rows, resp: Responsibilities, spec: ModelSpec, states, config: FitConfig,
                    update_df=True):
    """Proportion / location / df CM updates; returns (pi, mus, nus, nu_fallbacks)."""
    z = resp.z
    masses = z.sum(axis=0)
    if np.any(masses < _MIN_COMPONENT_MASS):
        bad = np.nonzero(masses < _MIN_COMPONENT_MASS)[0].tolist()
        raise DegenerateComponentError(f"component(s) {bad} hold less than 2 points of mass")
    G = z.shape[1]
    p = x_rows.shape[1]
    pi, mus = update_pi_mu(x_rows, resp)
    nu_fallbacks = 0
    if config.gaussian_mode:
        nus = None
    elif update_df and states is not None:
        nus, nu_fallbacks = _update_nu(z, resp.u, states, spec.common_nu, config.nu_bounds, p)
    elif states is not None:
        nus = np.array([s.nu for s in states])
    else:
        lo, hi = config.nu_bounds
        nus = np.full(G, min(max(NU_INITIAL, lo), hi))
    return pi, mus, nus, nu_fallbacks


def _cov_updates(x_rows, resp: Responsibilities, spec: ModelSpec, config: FitConfig,
                 pi, mus, nus, dims=None):
    """Eigenstructure CM update given fresh moments; returns (states, dims)."""
    z = resp.z
    masses = z.sum(axis=0)
    G = z.shape[1]
    weights = z * resp.u
    scatters = [
        weighted_scatter(x_rows, weights[:, g], mus[g], normalizer=masses[g])
        for g in range(G)
    ]
    if spec.common_orientation:
        pooled = sum((masses[g] / masses.sum()) * scatters[g] for g in range(G))
        pair = sym_eigen(pooled)
        eig_pairs = [pair] * G
    else:
        eig_pairs = [sym_eigen(s) for s in scatters]
    if dims is None:
        dims = select_dims([pair.values for pair in eig_pairs], masses, spec, config)
    return _build_states(spec, pi, mus, nus, eig_pairs, masses, dims), dims


def _replace_moments(prev_states, pi, mus, nus):
    """New states carrying fresh (pi, mu, nu) but the previous eigenstructure."""
    states = []
    for g, prev in enumerate(prev_states):
        states.append(
            ComponentState(
                pi=float(pi[g]),
                mu=mus[g],
                orient=prev.orient,
                a=prev.a,
                b=prev.b,
                d=prev.d,
                nu=None if nus is None else float(nus[g]),
            )
        )
    return tuple(states)


def _cm_step(data, resp: Responsibilities, spec: ModelSpec, states, config: FitConfig,
             dims=None, update_df=True):
    """One full CM sweep; returns (new_states, dims_used, nu_fallbacks)."""
    x_rows = _check_data(data)
    pi, mus, nus, nu_fallbacks = _moment_updates(x_rows, resp, spec, states, config, update_df)
    new_states, dims = _cov_updates(x_rows, resp, spec, config, pi, mus, nus, dims)
    return new_states, dims, nu_fallbacks


def cm_step(data, resp: Responsibilities, spec: ModelSpec, states, config: FitConfig):
    """Public CM sweep for the given responsibilities; returns new states."""
    new_states, _, _ = _cm_step(data, resp, spec, states, config)
    return new_states


# ---------------------------------------------------------------------------
# initialization


def _lloyd_kmeans(x_rows, k, rng, n_restarts=10, tol=1e-6, max_iter=100):
    """Lloyd's algorithm seeded with random distinct rows, best of n_restarts.

    Seeding on the farthest point was tried and rejected: with heavy-tailed
    data the farthest point is always an extreme outlier, which survives
    Lloyd as a singleton center and starves the mixture initialization.
    """
    n = x_rows.shape[0]
    best_labels = None
    best_inertia = math.inf
    for _ in range(n_restarts):
        centers = x_rows[rng.choice(n, size=k, replace=False)].copy()
        labels = None
        for _ in range(max_iter):
            d2 = np.sum((x_rows[:, None, :] - centers[None, :, :]) ** 2, axis=2)
            labels = np.argmin(d2, axis=1)
            new_centers = centers.copy()
            assigned_d2 = d2[np.arange(n), labels]
            for j in range(k):
                mask = labels == j
                if mask.any():
                    new_centers[j] = x_rows[mask].mean(axis=0)
                else:
                    far = int(np.argmax(assigned_d2))
                    new_centers[j] = x_rows[far]
                    assigned_d2[far] = -1.0
            shift = float(np.max(np.abs(new_centers - centers)))
            centers = new_centers
            if shift < tol:
                break
        d2 = np.sum((x_rows[:, None, :] - centers[None, :, :]) ** 2, axis=2)
        labels = np.argmin(d2, axis=1)
        inertia = float(d2[np.arange(n), labels].sum())
        if inertia < best_inertia:
            best_inertia = inertia
            best_labels = labels
    return best_labels


def initialize(data, G, config: FitConfig, seed=None) -> Responsibilities:
    """Hard initial partition (k-means or seeded random), with u set to one."""
    x_rows = _check_data(data)
    n = x_rows.shape[0]
    if G > n:
        raise InfeasibleError(f"cannot split {n} rows into {G} components")
    rng = np.random.default_rng(config.seed if seed is None else seed)
    if config.init == "kmeans":
        labels = _lloyd_kmeans(x_rows, G, rng)
    else:
        labels = np.empty(n, dtype=int)
        perm = rng.permutation(n)
        labels[perm[:G]] = np.arange(G)
        if n > G:
            labels[perm[G:]] = rng.integers(0, G, size=n - G)
    # Guarantee every component is non-empty.
    for g in range(G):
        if not np.any(labels == g):
            counts = np.bincount(labels, minlength=G)
            donor = int(np.argmax(counts))
            labels[np.nonzero(labels == donor)[0][0]] = g
    z = np.zeros((n, G))
    z[np.arange(n), labels] = 1.0
    return Responsibilities(z=z, u=np.ones((n, G)))


# ---------------------------------------------------------------------------
# the fit loop


def _aitken(trace3, epsilon):
    """Aitken-accelerated stopping check on the last three log-likelihoods.

    Returns (converged, l_inf). Falls back to the raw-difference rule when the
    denominator is non-positive or the acceleration ratio reaches 1.
    """
    l_km1, l_k, l_kp1 = (float(v) for v in trace3)
    diff = l_kp1 - l_k
    denom = l_k - l_km1
    if denom <= 0:
        return abs(diff) < epsilon, l_kp1
    ratio = diff / denom
    if ratio >= 1.0:
        return abs(diff) < epsilon, l_kp1
    l_inf = l_k + diff / (1.0 - ratio)
    gap = l_inf - l_k
    return (0.0 <= gap < epsilon), l_inf


def _single_fit(x_rows, spec, G, config, seed):
    resp0 = initialize(x_rows, G, config, seed=seed)
    states, dims, _ = _cm_step(x_rows, resp0, spec, None, config, update_df=False)
    _, _, loglik = _responsibilities(x_rows, states, config.gaussian_mode)
    trace = [loglik]
    converged = False
    nu_fallbacks = 0
    dim_freezes = 0
    cov_freezes = 0
    for _ in range(config.max_iter):
        z, u, _ = _responsibilities(x_rows, states, config.gaussian_mode)
        masses = z.sum(axis=0)
        if np.any(masses < 1.0):
            bad = np.nonzero(masses < 1.0)[0].tolist()
            raise DegenerateComponentError(f"component(s) {bad} emptied out mid-fit")
        resp = Responsibilities(z=z, u=u)
        pi, mus, nus, fell = _moment_updates(x_rows, resp, spec, states, config)
        nu_fallbacks += fell
        cand_states, cand_dims = _cov_updates(x_rows, resp, spec, config, pi, mus, nus)
        _, _, cand_loglik = _responsibilities(x_rows, cand_states, config.gaussian_mode)
        if cand_loglik < trace[-1] - _MONOTONE_SLACK and cand_dims.dims != dims.dims:
            # A shrunken subspace dimension may lower the likelihood; keep the
            # previous dimensions to preserve the ECM ascent property.
            cand_states, cand_dims = _cov_updates(
                x_rows, resp, spec, config, pi, mus, nus, dims=dims
            )
            _, _, cand_loglik = _responsibilities(x_rows, cand_states, config.gaussian_mode)
            dim_freezes += 1
        if cand_loglik < trace[-1] - _MONOTONE_SLACK:
            # Shared-b patterns can make the eigenvector update non-optimal
            # (retained eigenvalue below the pooled noise level). Fall back to
            # a generalized step: fresh moments, previous eigenstructure.
            cand_states = _replace_moments(states, pi, mus, nus)
            cand_dims = dims
            _, _, cand_loglik = _responsibilities(x_rows, cand_states, config.gaussian_mode)
            cov_freezes += 1
        states, dims = cand_states, cand_dims
        trace.append(cand_loglik)
        if len(trace) >= 3:
            converged, _ = _aitken(trace[-3:], config.epsilon)
            if converged:
                break
    z, u, final_loglik = _responsibilities(x_rows, states, config.gaussian_mode)
    resp = Responsibilities(z=z, u=u)
    labels = np.argmax(z, axis=1)
    n, p = x_rows.shape
    if config.gaussian_mode:
        n_params = gaussian_param_count(spec, G, p, dims)
    else:
        n_params = free_param_count(spec, G, p, dims)
    bic = 2.0 * final_loglik - n_params * math.log(n)
    return FitResult(
        spec=spec,
        G=G,
        states=states,
        resp=resp,
        labels=labels,
        loglik_trace=np.asarray(trace),
        bic=bic,
        converged=converged,
        iterations=len(trace) - 1,
        n_params=n_params,
        gaussian=config.gaussian_mode,
        diagnostics={
            "nu_fallbacks": nu_fallbacks,
            "dim_freezes": dim_freezes,
            "cov_freezes": cov_freezes,
        },
    )


def fit(data, spec, G, config: FitConfig = None) -> FitResult:
    """Fit one (model, G) pair by ECM; best of the configured restarts.

    Degenerate components trigger fresh seeds (up to RESTART_LIMIT extra
    attempts per restart) before the fit is declared failed.
    """
    if isinstance(spec, str):
        spec = parse_model(spec)
    if config is None:
        config = FitConfig()
    x_rows = _check_data(data)
    n, p = x_rows.shape
    if p < 2:
        raise ShapeError(f"need p >= 2 columns, got {p}")
    if G < 1:
        raise InfeasibleError(f"G must be >= 1, got {G}")
    if n <= G:
        raise InfeasibleError(f"need more rows ({n}) than components ({G})")
    best = None
    total_restarts = 0
    last_error = None
    for r in range(config.resolved_n_init):
        result = None
        for attempt in range(RESTART_LIMIT + 1):
            seed = derive_seed(config.seed, r, attempt)
            try:
                result = _single_fit(x_rows, spec, G, config, seed)
            except DegenerateComponentError as exc:
                last_error = exc
                total_restarts += 1
                continue
            break
        if result is None:
            continue
        if best is None or result.loglik > best.loglik:
            best = result
    if best is None:
        raise FitFailedError(
            f"model {spec.code} with G={G} failed on every restart: {last_error}",
            diagnostics={"restarts": total_restarts},
        )
    best.diagnostics["restarts"] = total_restarts
    return best


def predict(result: FitResult, newdata):
    """Classify new rows with a fitted model; returns (labels, z)."""
    x_rows = _check_data(newdata, result.states[0].dim)
    z, _, _ = _responsibilities(x_rows, result.states, result.gaussian)
    return np.argmax(z, axis=1), z
