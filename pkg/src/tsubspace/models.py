"""Nomenclature and free-parameter accounting for the 28 constraint patterns.

A model code is five letters over (a, b, D, d, nu):

* position 1, eigenvalues a:  U free, D one value per group, G one value per
  retained direction shared across groups, C a single shared value;
* position 2, noise level b:  U per group, C shared;
* position 3, orientation D:  U per group, C shared;
* position 4, intrinsic dimension d:  U per group, C shared;
* position 5, degrees of freedom nu:  U per group, C shared.

Only the 28 patterns below are supported; G in position 1 requires the
common-orientation/common-dimension pattern GCCC_.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConstraintViolationError, InvalidModelError, ShapeError

# Order matters: first the nu-free block, then the nu-constrained block,
# each in the canonical nomenclature-table order.
MODEL_CODES = (
    "UUUUU", "UCUUU", "DUUUU", "CUUUU", "DCUUU", "CCUUU",
    "UUUCU", "UCUCU", "DUUCU", "CUUCU", "DCUCU", "CCUCU",
    "GCCCU", "CCCCU",
    "UUUUC", "UCUUC", "DUUUC", "CUUUC", "DCUUC", "CCUUC",
    "UUUCC", "UCUCC", "DUUCC", "CUUCC", "DCUCC", "CCUCC",
    "GCCCC", "CCCCC",
)

_POSITION_NAMES = ("a", "b", "orientation", "dimension", "nu")
_ALLOWED = ({"U", "D", "G", "C"}, {"U", "C"}, {"U", "C"}, {"U", "C"}, {"U", "C"})


@dataclass(frozen=True)
class ModelSpec:
    """Parsed five-letter constraint code."""

    code: str
    a_constraint: str
    b_constraint: str
    d_orient_constraint: str
    dim_constraint: str
    nu_constraint: str

    @property
    def common_dim(self):
        return self.dim_constraint == "C"

    @property
    def common_orientation(self):
        return self.d_orient_constraint == "C"

    @property
    def common_nu(self):
        return self.nu_constraint == "C"


def parse_model(code) -> ModelSpec:
    """Parse a five-letter model code, rejecting anything outside the 28."""
    if not isinstance(code, str):
        raise InvalidModelError(f"model code must be a string, got {type(code).__name__}")
    normalized = code.strip().upper()
    if len(normalized) != 5:
        raise InvalidModelError(f"model code {code!r} must have exactly 5 letters")
    for pos, (letter, allowed) in enumerate(zip(normalized, _ALLOWED)):
        if letter not in allowed:
            raise InvalidModelError(
                f"model code {code!r}: letter {letter!r} is not valid for the "
                f"{_POSITION_NAMES[pos]} position (position {pos + 1})"
            )
    if normalized not in MODEL_CODES:
        if normalized[0] == "G":
            hint = "G eigenvalues require the common orientation/dimension pattern GCCC_"
        else:
            hint = "not one of the 28 supported patterns"
        raise InvalidModelError(f"model code {code!r} is not supported: {hint}")
    return ModelSpec(
        code=normalized,
        a_constraint=normalized[0],
        b_constraint=normalized[1],
        d_orient_constraint=normalized[2],
        dim_constraint=normalized[3],
        nu_constraint=normalized[4],
    )


def enumerate_models():
    """All 28 model specs in nomenclature-table order."""
    return [parse_model(code) for code in MODEL_CODES]


@dataclass(frozen=True)
class DimensionAssignment:
    """Per-group intrinsic dimensions d_g and their sum s."""

    dims: tuple
    s: int

    @staticmethod
    def of(dims):
        dims = tuple(int(d) for d in np.atleast_1d(dims))
        return DimensionAssignment(dims=dims, s=sum(dims))


def _check_dims(spec: ModelSpec, G, p, dims: DimensionAssignment):
    if len(dims.dims) != G:
        raise ShapeError(f"{len(dims.dims)} dimensions supplied for G={G} groups")
    for d in dims.dims:
        if not 1 <= d <= p - 1:
            raise ConstraintViolationError(
                f"intrinsic dimension {d} outside [1, p-1] = [1, {p - 1}]"
            )
    if spec.common_dim and len(set(dims.dims)) > 1:
        raise ConstraintViolationError(
            f"model {spec.code} requires a common intrinsic dimension, got {dims.dims}"
        )


def _tau(d, p):
    # Parameters of a d-dimensional orientation basis in R^p (Stiefel count).
    return d * p - d * (d + 1) // 2


def free_param_count(spec: ModelSpec, G, p, dims, paper_rho=False):
    """Total free parameters of a model: means, proportions and covariance block.

    ``rho`` counts means and proportions as G*p + (G-1); ``paper_rho=True``
    switches to the literal G*p + G + 1 of the source nomenclature table
    (which ignores the sum-to-one constraint) for comparison runs.
    """
    if G < 1 or p < 2:
        raise ShapeError(f"need G >= 1 and p >= 2, got G={G}, p={p}")
    if not isinstance(dims, DimensionAssignment):
        dims = DimensionAssignment.of(dims)
    _check_dims(spec, G, p, dims)
    rho = G * p + (G + 1 if paper_rho else G - 1)
    d = dims.dims[0]
    s = dims.s
    tau = _tau(d, p)
    tau_bar = sum(_tau(dg, p) for dg in dims.dims)
    code = spec.code
    table = {
        "UUUUU": rho + tau_bar + 3 * G + s,
        "UCUUU": rho + tau_bar + 2 * G + s + 1,
        "DUUUU": rho + tau_bar + 4 * G,
        "CUUUU": rho + tau_bar + 3 * G + 1,
        "DCUUU": rho + tau_bar + 3 * G + 1,
        "CCUUU": rho + tau_bar + 2 * G + 2,
        "UUUCU": rho + G * (tau + d + 2) + 1,
        "UCUCU": rho + G * (tau + d + 1) + 2,
        "DUUCU": rho + G * (tau + 2 + 1) + 1,
        "CUUCU": rho + G * (tau + 2) + 2,
        "DCUCU": rho + G * (tau + 2) + 2,
        "CCUCU": rho + G * (tau + 1) + 3,
        "GCCCU": rho + tau + d + G + 2,
        "CCCCU": rho + tau + G + 3,
        "UUUUC": rho + tau_bar + 2 * G + s + 1,
        "UCUUC": rho + tau_bar + G + s + 2,
        "DUUUC": rho + tau_bar + 3 * G + 1,
        "CUUUC": rho + tau_bar + 2 * G + 2,
        "DCUUC": rho + tau_bar + 2 * G + 2,
        "CCUUC": rho + tau_bar + G + 3,
        "UUUCC": rho + G * (tau + d + 1) + 2,
        "UCUCC": rho + G * (tau + d) + 3,
        "DUUCC": rho + G * (tau + 2) + 2,
        "CUUCC": rho + G * (tau + 1) + 3,
        "DCUCC": rho + G * (tau + 1) + 3,
        "CCUCC": rho + G * tau + 4,
        "GCCCC": rho + tau + d + 3,
        "CCCCC": rho + tau + 4,
    }
    return int(table[code])


def gaussian_param_count(spec: ModelSpec, G, p, dims, paper_rho=False):
    """Parameter count with the degrees-of-freedom block removed (Gaussian mode)."""
    full = free_param_count(spec, G, p, dims, paper_rho=paper_rho)
    return full - (1 if spec.common_nu else G)
