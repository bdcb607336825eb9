"""Entropy loss, closed-form risk quantities, and the Monte Carlo engine.

The loss is L(sigma_J, d) = d/sigma_J - ln(d/sigma_J) - 1: nonnegative,
zero only at d = sigma_J, and harder on overestimation than underestimation.

Closed forms implemented here, all for the selected-hazard problem:

  * h_of_q: the equal-shape pair of regularized incomplete beta terms that
    equals E[1/(sigma_J Y_J)] for two populations with rate ratio q.
  * exact_risk_scaleinv_k2: risk of c/Y_J for k = 2 by 1-D quadrature,
    c*h(q) - ln c + E[ln(sigma_J Y_J)] - 1.
  * gb_component_risk: Psi(n) - ln(n-1), the constant risk of the
    generalized Bayes rule in the single-population component problem and
    the minimax value of the selection problem.
  * bayes_risk: Psi(n + a) - ln(n + a - 1) under a conjugate gamma prior
    with shape a (the prior rate cancels).
  * sup_risk_scaleinv: c/(n-1) - ln c + Psi(n) - 1, the supremum of the
    proven upper bound on the risk of c/Y_J; minimized at c = n - 1.

The Monte Carlo engine is deterministic by construction: replications are
cut into fixed-size blocks, each block's losses are a pure function of the
(seed, stream) labels, and blocks are reassembled in index order before any
reduction. Worker counts change the schedule, never the bytes of the result.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .estimators import EstimatorKind, EstimatorSpec, validate_improved
from .model import PopulationSet, RngSpec, _sum_blocks
from .numerics import (
    DomainError,
    QuadratureSpec,
    adaptive_quad,
    digamma,
    gamma_cdf,
    reg_inc_beta,
)

# Replications per work unit. Fixed: block boundaries are part of the
# determinism contract, so results cannot depend on the worker count.
_BLOCK = 4096


@dataclass(frozen=True)
class RiskEstimate:
    """Monte Carlo risk: mean loss, its standard error, and provenance."""

    mean: float
    std_error: float
    replications: int
    seed: int

    def __post_init__(self) -> None:
        if self.std_error < 0:
            raise DomainError(f"std_error must be >= 0, got {self.std_error}")
        if self.replications < 1:
            raise DomainError(f"replications must be >= 1, got {self.replications}")


@dataclass(frozen=True)
class PairedComparison:
    """Risk difference A - B on common random numbers."""

    mean_diff: float
    std_error_diff: float
    replications: int

    def __post_init__(self) -> None:
        if self.std_error_diff < 0:
            raise DomainError(f"std_error_diff must be >= 0, got {self.std_error_diff}")


@dataclass(frozen=True)
class BayesPrior:
    """Conjugate gamma prior on the hazard rates: shape and rate."""

    shape: float
    rate: float

    def __post_init__(self) -> None:
        if not (self.shape > 0) or not (self.rate > 0):
            raise DomainError(
                f"prior shape and rate must be positive, got ({self.shape}, {self.rate})"
            )


def entropy_loss(d: float, sigma_selected: float) -> float:
    """d/sigma - ln(d/sigma) - 1; zero exactly when d equals sigma."""
    if not (d > 0):
        raise DomainError(f"estimate d must be positive, got {d}")
    if not (sigma_selected > 0):
        raise DomainError(f"sigma_selected must be positive, got {sigma_selected}")
    x = d / sigma_selected
    # Mathematically >= 0; the max() only strips rounding noise near x = 1.
    return max(0.0, x - math.log(x) - 1.0)


def _losses_for_sums(spec: EstimatorSpec, pop: PopulationSet, sums: np.ndarray) -> np.ndarray:
    # Vectorized mirror of estimators.evaluate followed by entropy_loss.
    # Must produce exactly what the scalar route produces; a unit test
    # holds the two routes together.
    rates = np.asarray(pop.rates)
    jj = np.argmax(sums, axis=1)
    rows = np.arange(sums.shape[0])
    yj = sums[rows, jj]
    sj = rates[jj]
    d = spec.c / yj
    if spec.kind is EstimatorKind.IMPROVED:
        h = spec.h_count
        top = np.sort(sums, axis=1)[:, ::-1][:, :h]
        x_stat = np.exp(np.mean(np.log(top), axis=1))
        d = d + spec.alpha * (pop.n * h - 1.0) / (h * x_stat)
    ratio = d / sj
    return ratio - np.log(ratio) - 1.0


def _blocks(replications: int) -> list[tuple[int, int]]:
    return [(s, min(_BLOCK, replications - s)) for s in range(0, replications, _BLOCK)]


def _assemble(worker_fn, replications: int, workers: int) -> np.ndarray:
    """Run worker_fn over fixed blocks and concatenate in block order."""
    blocks = _blocks(replications)
    if workers == 1 or len(blocks) == 1:
        parts = [worker_fn(s, c) for s, c in blocks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda b: worker_fn(*b), blocks))
    return np.concatenate(parts)


def _check_mc_args(replications: int, workers: int) -> None:
    if not float(replications).is_integer() or replications < 1:
        raise DomainError(f"replications must be a positive integer, got {replications}")
    if not float(workers).is_integer() or workers < 1:
        raise DomainError(f"workers must be a positive integer, got {workers}")


def _validate_for(spec: EstimatorSpec, pop: PopulationSet) -> None:
    if spec.kind is EstimatorKind.IMPROVED:
        result = validate_improved(spec, pop.n, pop.k)
        if not result.ok:
            first = result.violations[0]
            raise DomainError(
                f"estimator invalid for n={pop.n}, k={pop.k}: {first.condition} "
                f"(limit {first.limit:g}, got {first.actual:g})"
            )


def mc_risk(
    spec: EstimatorSpec,
    pop: PopulationSet,
    replications: int,
    rng: RngSpec,
    workers: int = 1,
) -> RiskEstimate:
    """Monte Carlo risk of an estimator under entropy loss.

    Deterministic in (rng, replications): the same labels give the same
    estimate to the last bit on any worker count.
    """
    _check_mc_args(replications, workers)
    _validate_for(spec, pop)
    rates = np.asarray(pop.rates)

    def block_losses(rep_start: int, count: int) -> np.ndarray:
        sums = _sum_blocks(pop.n, rates, rng, rep_start, count)
        return _losses_for_sums(spec, pop, sums)

    losses = _assemble(block_losses, int(replications), int(workers))
    return _estimate_from_losses(losses, rng.seed)


def mc_dominance(
    spec_a: EstimatorSpec,
    spec_b: EstimatorSpec,
    pop: PopulationSet,
    replications: int,
    rng: RngSpec,
    workers: int = 1,
) -> PairedComparison:
    """Paired risk difference A - B on common random numbers.

    Both estimators see identical draws in every replication, so the
    difference's standard error excludes the shared sampling noise.
    Identical specs give a difference of exactly zero.
    """
    _check_mc_args(replications, workers)
    _validate_for(spec_a, pop)
    _validate_for(spec_b, pop)
    rates = np.asarray(pop.rates)

    def block_diffs(rep_start: int, count: int) -> np.ndarray:
        sums = _sum_blocks(pop.n, rates, rng, rep_start, count)
        return _losses_for_sums(spec_a, pop, sums) - _losses_for_sums(spec_b, pop, sums)

    diffs = _assemble(block_diffs, int(replications), int(workers))
    n_reps = int(replications)
    se = float(diffs.std(ddof=1) / math.sqrt(n_reps)) if n_reps > 1 else 0.0
    return PairedComparison(
        mean_diff=float(diffs.mean()), std_error_diff=se, replications=n_reps
    )


def mc_risk_component(
    n: int, rate: float, c: float, replications: int, rng: RngSpec, workers: int = 1
) -> RiskEstimate:
    """Single-population oracle mode: risk of c/Y with no selection step.

    The public model insists on k >= 2; this bypass exists so closed-form
    component results (for example Psi(n) - ln(n-1) at c = n - 1) can be
    checked against the same sampling machinery.
    """
    if not float(n).is_integer() or n < 2:
        raise DomainError(f"sample size n must be an integer >= 2, got {n}")
    if not (rate > 0):
        raise DomainError(f"rate must be positive, got {rate}")
    if not (c > 0):
        raise DomainError(f"estimator constant c must be positive, got {c}")
    _check_mc_args(replications, workers)
    rates = np.asarray([float(rate)])

    def block_losses(rep_start: int, count: int) -> np.ndarray:
        sums = _sum_blocks(int(n), rates, rng, rep_start, count)
        ratio = (c / sums[:, 0]) / rate
        return ratio - np.log(ratio) - 1.0

    losses = _assemble(block_losses, int(replications), int(workers))
    return _estimate_from_losses(losses, rng.seed)


def _estimate_from_losses(losses: np.ndarray, seed: int) -> RiskEstimate:
    n_reps = losses.shape[0]
    se = float(losses.std(ddof=1) / math.sqrt(n_reps)) if n_reps > 1 else 0.0
    return RiskEstimate(
        mean=float(losses.mean()), std_error=se, replications=n_reps, seed=seed
    )


def h_of_q(q: float, n: int) -> float:
    """E[1/(sigma_J Y_J)] for two populations with rate ratio q >= 1.

    Equals [I_{q/(1+q)}(n, n-1) + I_{1/(1+q)}(n, n-1)] / (n - 1).
    Increasing in q, from 2 I_{1/2}(n, n-1)/(n-1) at q = 1 toward the
    component value 1/(n-1) as the rates separate.
    """
    if not float(n).is_integer() or n < 2:
        raise DomainError(f"sample size n must be an integer >= 2, got {n}")
    if math.isnan(q) or not (q >= 1.0):
        raise DomainError(f"rate ratio q must be >= 1, got {q}")
    upper = reg_inc_beta(q / (1.0 + q), n, n - 1)
    lower = reg_inc_beta(1.0 / (1.0 + q), n, n - 1)
    return (upper + lower) / (n - 1.0)


def _gamma_log_pdf(y: float, rate: float, shape: int) -> float:
    return (
        shape * math.log(rate)
        + (shape - 1) * math.log(y)
        - rate * y
        - math.lgamma(shape)
    )


def exact_risk_scaleinv_k2(
    c: float, rates, n: int, quad: QuadratureSpec | None = None
) -> float:
    """Exact (quadrature) risk of c/Y_J for exactly two populations.

    R = c h(q) - ln c + E[ln(sigma_J Y_J)] - 1 with q the rate ratio.
    The expectation splits over which population wins the selection:

        E[ln(sigma_J Y_J)] = sum_i INT ln(sigma_i y) g(y; sigma_i, n)
                                       F(y; sigma_other, n) dy

    with g the gamma density and F the gamma CDF. Both terms depend on
    the rates only through q, so scaling both rates leaves the risk
    unchanged.
    """
    rates = tuple(float(r) for r in rates)
    if len(rates) != 2:
        raise DomainError(f"exactly two rates required, got {len(rates)}")
    for r in rates:
        if not (r > 0) or math.isinf(r):
            raise DomainError(f"rates must be finite and positive, got {r}")
    if not (c > 0):
        raise DomainError(f"estimator constant c must be positive, got {c}")
    if not float(n).is_integer() or n < 2:
        raise DomainError(f"sample size n must be an integer >= 2, got {n}")
    q = max(rates) / min(rates)

    def winner_term(sigma: float, sigma_other: float):
        def integrand(y: float) -> float:
            if y <= 0.0:
                return 0.0
            log_pdf = _gamma_log_pdf(y, sigma, int(n))
            cdf = gamma_cdf(y, sigma_other, int(n))
            if cdf == 0.0:
                return 0.0
            return math.log(sigma * y) * math.exp(log_pdf) * cdf

        return integrand

    e_log = 0.0
    for i in (0, 1):
        e_log += adaptive_quad(winner_term(rates[i], rates[1 - i]), 0.0, math.inf, quad)
    return c * h_of_q(q, int(n)) - math.log(c) + e_log - 1.0


def gb_component_risk(n: int) -> float:
    """Psi(n) - ln(n-1): the generalized Bayes rule's constant component
    risk, and the minimax value of the selection problem."""
    if not float(n).is_integer() or n < 2:
        raise DomainError(f"sample size n must be an integer >= 2, got {n}")
    return digamma(float(n)) - math.log(n - 1.0)


def bayes_risk(n: int, prior: BayesPrior) -> float:
    """Psi(n + shape) - ln(n + shape - 1) under a conjugate gamma prior.

    The prior rate cancels in the posterior expectation, so only the
    shape enters. Decreasing in shape; the shape -> 0 limit recovers
    gb_component_risk.
    """
    if not float(n).is_integer() or n < 2:
        raise DomainError(f"sample size n must be an integer >= 2, got {n}")
    if not (n + prior.shape > 1.0):
        raise DomainError(
            f"need n + shape > 1, got n={n}, shape={prior.shape}"
        )
    return digamma(n + prior.shape) - math.log(n + prior.shape - 1.0)


def sup_risk_scaleinv(c: float, n: int) -> float:
    """Supremum of the proven risk bound for c/Y_J over the rate ratio.

    c/(n-1) - ln c + Psi(n) - 1; equals the minimax value at c = n - 1
    and exceeds it for every other c, which is what rules the other
    scale-inverse members out of minimaxity.
    """
    if not (c > 0):
        raise DomainError(f"estimator constant c must be positive, got {c}")
    if not float(n).is_integer() or n < 2:
        raise DomainError(f"sample size n must be an integer >= 2, got {n}")
    return c / (n - 1.0) - math.log(c) + digamma(float(n)) - 1.0
