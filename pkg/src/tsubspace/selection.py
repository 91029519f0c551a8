"""BIC computation, (model x G) grid search, and best-model ranking."""

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import engine
from .engine import FitConfig, FitResult, derive_seed
from .errors import GridFailedError, TsubspaceError
from .models import ModelSpec, free_param_count, parse_model


def bic(loglik, n_params, n):
    """2 * loglik - n_params * log(n); larger is better."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return 2.0 * float(loglik) - n_params * math.log(n)


def total_param_count(spec, G, p, dims, paper_rho=False):
    """Total parameters of a fitted model (means, proportions, covariance, df)."""
    if isinstance(spec, str):
        spec = parse_model(spec)
    return free_param_count(spec, G, p, dims, paper_rho=paper_rho)


def aitken_check(trace, epsilon):
    """Convergence check on the last three log-likelihoods.

    a = (l2 - l1) / (l1 - l0), l_inf = l1 + (l2 - l1) / (1 - a); converged
    when 0 <= l_inf - l1 < epsilon. Falls back to |l2 - l1| < epsilon when the
    denominator is non-positive or a >= 1. Returns (converged, l_inf).
    """
    trace = [float(v) for v in trace]
    if len(trace) != 3 or not all(math.isfinite(v) for v in trace):
        raise ValueError("aitken_check needs exactly three finite log-likelihoods")
    return engine._aitken(trace, epsilon)


@dataclass(frozen=True)
class GridRequest:
    """Model list, component counts and shared configuration for a grid search."""

    specs: Sequence[ModelSpec]
    g_values: Sequence[int]
    config: FitConfig = field(default_factory=FitConfig)

    def __post_init__(self):
        specs = tuple(parse_model(s) if isinstance(s, str) else s for s in self.specs)
        g_values = tuple(int(g) for g in self.g_values)
        if not specs or not g_values:
            raise ValueError("GridRequest needs at least one model and one G value")
        if any(g < 1 for g in g_values):
            raise ValueError(f"G values must be positive, got {g_values}")
        object.__setattr__(self, "specs", specs)
        object.__setattr__(self, "g_values", g_values)


@dataclass
class GridEntry:
    """Outcome of one (model, G) cell: a fit or a recorded failure."""

    model_code: str
    G: int
    bic: Optional[float]
    ari: Optional[float]
    converged: Optional[bool]
    iterations: Optional[int]
    seconds: float
    error: Optional[str] = None
    fit: Optional[FitResult] = None

    @property
    def ok(self):
        return self.error is None


@dataclass
class GridResult:
    """All grid entries plus the index of the best successful fit by BIC."""

    entries: list
    best: int

    @property
    def best_entry(self) -> GridEntry:
        return self.entries[self.best]

    @property
    def best_fit(self) -> FitResult:
        return self.entries[self.best].fit

    def to_csv_text(self, include_timing=False):
        """Deterministic ranked CSV (grid order); timing only on request."""
        lines = ["model,G,bic,ari,converged,iterations,seconds"]
        for e in self.entries:
            bic_txt = "" if e.bic is None else repr(e.bic)
            ari_txt = "" if e.ari is None else repr(e.ari)
            conv_txt = "" if e.converged is None else str(e.converged).lower()
            iter_txt = "" if e.iterations is None else str(e.iterations)
            sec_txt = f"{e.seconds:.3f}" if include_timing else ""
            lines.append(
                f"{e.model_code},{e.G},{bic_txt},{ari_txt},{conv_txt},{iter_txt},{sec_txt}"
            )
        return "\n".join(lines) + "\n"


def _run_cell(args):
    data, code, G, config, seed, truth = args
    started = time.perf_counter()
    try:
        result = engine.fit(data, code, G, FitConfig(**{**config, "seed": seed}))
    except TsubspaceError as exc:
        return GridEntry(
            model_code=code, G=G, bic=None, ari=None, converged=None,
            iterations=None, seconds=time.perf_counter() - started,
            error=f"{type(exc).__name__}: {exc}",
        )
    ari_val = None
    if truth is not None:
        from .evaluation import ari

        ari_val = ari(truth, result.labels)
    return GridEntry(
        model_code=code, G=G, bic=result.bic, ari=ari_val,
        converged=result.converged, iterations=result.iterations,
        seconds=time.perf_counter() - started, fit=result,
    )


def grid_search(data, request: GridRequest, truth=None, jobs=1) -> GridResult:
    """Fit every (model, G) cell independently and rank by BIC.

    Cell seeds are derived from (config.seed, model index, G) so results do
    not depend on evaluation order or worker count. Individual failures are
    recorded with a reason; only an all-failed grid raises.
    """
    data = np.asarray(data, dtype=float)
    truth_arr = None if truth is None else np.asarray(truth)
    base = {
        "init": request.config.init,
        "n_init": request.config.n_init,
        "max_iter": request.config.max_iter,
        "epsilon": request.config.epsilon,
        "dim_method": request.config.dim_method,
        "scree_threshold": request.config.scree_threshold,
        "nu_bounds": request.config.nu_bounds,
        "gaussian_mode": request.config.gaussian_mode,
    }
    cells = []
    for spec_idx, spec in enumerate(request.specs):
        for G in request.g_values:
            seed = derive_seed(request.config.seed, spec_idx, G)
            cells.append((data, spec.code, G, base, seed, truth_arr))
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            entries = list(pool.map(_run_cell, cells))
    else:
        entries = [_run_cell(cell) for cell in cells]
    best = -1
    for idx, entry in enumerate(entries):
        if entry.ok and (best < 0 or entry.bic > entries[best].bic):
            best = idx
    if best < 0:
        reasons = "; ".join(f"{e.model_code}/G={e.G}: {e.error}" for e in entries[:5])
        raise GridFailedError(f"every grid cell failed ({reasons} ...)")
    return GridResult(entries=entries, best=best)
