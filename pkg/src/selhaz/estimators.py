"""The estimator family c/Y_J, its admissible sub-family, and improved forms.

Estimators of the selected hazard rate sigma_J built from the selected sum
Y_J. The scale-inverse family is delta_c = c/Y_J with the named members

    ML = n/Y_J,  N1 = (n-2)/Y_J (n >= 3),  N2 = (n-1)/Y_J.

Within that family, for two populations, the admissible constants form the
interval [n-1, c*] where c* = (n-1) / (2 I_{1/2}(n, n-1)); constants outside
it are dominated by the nearest endpoint.

The improved form adds a data-driven correction built from the geometric
mean X of the h largest sums:

    delta = c/Y_J + alpha (n h - 1) / (h X),

accepted while 0 < alpha <= ((n - c) h + 1)/(n h + 1). The correction is
strictly positive, so the improved estimate always sits above the plain
scale-inverse one.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .model import PopulationSet, SelectionOutcome, geometric_mean_stat
from .numerics import DomainError, reg_inc_beta


class EstimatorKind(enum.Enum):
    SCALE_INVERSE = "scale-inverse"
    IMPROVED = "improved"


@dataclass(frozen=True)
class EstimatorSpec:
    """Closed description of an estimator.

    ScaleInverse uses only c. Improved also carries alpha (the correction
    coefficient) and h_count (how many of the largest sums enter the
    geometric mean). The alpha bound depends on (n, k), so it is enforced
    by validate_improved against a concrete population set, not here.
    """

    kind: EstimatorKind
    c: float
    alpha: float | None = None
    h_count: int | None = None
    name: str | None = None

    def __post_init__(self) -> None:
        if not (self.c > 0):
            raise DomainError(f"estimator constant c must be positive, got {self.c}")
        if self.kind is EstimatorKind.IMPROVED:
            if self.alpha is None or self.h_count is None:
                raise DomainError("improved estimator needs alpha and h_count")
            if not (self.alpha > 0):
                raise DomainError(f"alpha must be positive, got {self.alpha}")
            if not float(self.h_count).is_integer() or self.h_count < 2:
                raise DomainError(f"h_count must be an integer >= 2, got {self.h_count}")
        else:
            if self.alpha is not None or self.h_count is not None:
                raise DomainError("scale-inverse estimator takes neither alpha nor h_count")

    def label(self) -> str:
        if self.name is not None:
            return self.name
        if self.kind is EstimatorKind.SCALE_INVERSE:
            return f"c{self.c:g}"
        return f"i{self.c:g}:{self.alpha:g}:{self.h_count}"


@dataclass(frozen=True)
class AdmissibleRange:
    """The interval [c_lower, c_upper] of admissible constants, k = 2."""

    c_lower: float
    c_upper: float


class Admissibility(enum.Enum):
    INADMISSIBLE_LOW = "inadmissible-low"
    ADMISSIBLE = "admissible"
    INADMISSIBLE_HIGH = "inadmissible-high"


@dataclass(frozen=True)
class Classification:
    status: Admissibility
    # The dominating constant when inadmissible (the nearest interval
    # endpoint); None when admissible.
    dominating_c: float | None


@dataclass(frozen=True)
class Violation:
    condition: str
    limit: float
    actual: float


@dataclass(frozen=True)
class ImprovedValidation:
    ok: bool
    violations: tuple[Violation, ...]


def ml(n: int) -> EstimatorSpec:
    """Maximum-likelihood member: n/Y_J."""
    _check_n(n)
    return EstimatorSpec(EstimatorKind.SCALE_INVERSE, float(n), name="ML")


def n1(n: int) -> EstimatorSpec:
    """(n-2)/Y_J; needs n >= 3 so the estimate stays positive."""
    _check_n(n)
    if n < 3:
        raise DomainError(f"N1 requires n >= 3, got {n}")
    return EstimatorSpec(EstimatorKind.SCALE_INVERSE, float(n - 2), name="N1")


def n2(n: int) -> EstimatorSpec:
    """(n-1)/Y_J, the analogue of the best scale-equivariant estimator."""
    _check_n(n)
    return EstimatorSpec(EstimatorKind.SCALE_INVERSE, float(n - 1), name="N2")


def n2_improved(
    n: int, k: int, alpha: float | None = None, h_count: int | None = None
) -> EstimatorSpec:
    """Improved N2. alpha defaults to its upper bound, h_count to k."""
    return _improved(n, k, float(n - 1), alpha, h_count, "N2I")


def ml_improved(
    n: int, k: int, alpha: float | None = None, h_count: int | None = None
) -> EstimatorSpec:
    """Improved ML. alpha defaults to its upper bound, h_count to k."""
    return _improved(n, k, float(n), alpha, h_count, "MLI")


def _improved(
    n: int, k: int, c: float, alpha: float | None, h_count: int | None, name: str
) -> EstimatorSpec:
    _check_n(n)
    if k < 2:
        raise DomainError(f"need at least 2 populations, got k={k}")
    h = int(h_count) if h_count is not None else int(k)
    a = float(alpha) if alpha is not None else alpha_upper_bound(n, h, c)
    spec = EstimatorSpec(EstimatorKind.IMPROVED, c, alpha=a, h_count=h, name=name)
    result = validate_improved(spec, n, k)
    if not result.ok:
        first = result.violations[0]
        raise DomainError(
            f"{name}: {first.condition} (limit {first.limit:g}, got {first.actual:g})"
        )
    return spec


def _check_n(n: int) -> None:
    if not float(n).is_integer() or n < 2:
        raise DomainError(f"sample size n must be an integer >= 2, got {n}")


def evaluate(spec: EstimatorSpec, outcome: SelectionOutcome, pop: PopulationSet) -> float:
    """Estimate sigma_J for one selection outcome. Always positive."""
    if spec.kind is EstimatorKind.SCALE_INVERSE:
        return spec.c / outcome.y_selected
    result = validate_improved(spec, pop.n, pop.k)
    if not result.ok:
        first = result.violations[0]
        raise DomainError(
            f"improved spec invalid for n={pop.n}, k={pop.k}: {first.condition} "
            f"(limit {first.limit:g}, got {first.actual:g})"
        )
    x = geometric_mean_stat(outcome.sums, spec.h_count)
    h = spec.h_count
    return spec.c / outcome.y_selected + spec.alpha * (pop.n * h - 1.0) / (h * x)


def admissible_range(n: int) -> AdmissibleRange:
    """Admissible constants for delta_c with two populations.

    Lower endpoint n - 1; upper endpoint c* = (n-1)/(2 I_{1/2}(n, n-1)),
    the reciprocal of the equal-rates value of E[1/(sigma_J Y_J)].
    """
    _check_n(n)
    i_half = reg_inc_beta(0.5, n, n - 1)
    return AdmissibleRange(c_lower=float(n - 1), c_upper=(n - 1) / (2.0 * i_half))


def classify_c(n: int, c: float) -> Classification:
    """Place c against the admissible interval; endpoints are admissible.

    Inadmissible constants come back with the dominating choice: the
    interval endpoint nearest to c.
    """
    _check_n(n)
    if not (c > 0):
        raise DomainError(f"estimator constant c must be positive, got {c}")
    rng = admissible_range(n)
    if c < rng.c_lower:
        return Classification(Admissibility.INADMISSIBLE_LOW, rng.c_lower)
    if c > rng.c_upper:
        return Classification(Admissibility.INADMISSIBLE_HIGH, rng.c_upper)
    return Classification(Admissibility.ADMISSIBLE, None)


def alpha_upper_bound(n: int, h_count: int, c: float) -> float:
    """Largest correction coefficient the dominance condition accepts.

    ((n - c) h + 1)/(n h + 1); decreasing in c, so the bound for ML
    (c = n) is the tightest of the named family.
    """
    _check_n(n)
    if not float(h_count).is_integer() or h_count < 2:
        raise DomainError(f"h_count must be an integer >= 2, got {h_count}")
    if not (0 < c <= n):
        raise DomainError(f"alpha bound needs 0 < c <= n, got c={c}, n={n}")
    h = int(h_count)
    return ((n - c) * h + 1.0) / (n * h + 1.0)


def validate_improved(spec: EstimatorSpec, n: int, k: int) -> ImprovedValidation:
    """Check an improved spec against a concrete (n, k).

    The correction weight w(t) = alpha/t is nonincreasing by construction,
    so the checks are the c range, the h_count range, and the alpha bound.
    """
    if spec.kind is not EstimatorKind.IMPROVED:
        raise DomainError("validate_improved expects an improved estimator spec")
    _check_n(n)
    if k < 2:
        raise DomainError(f"need at least 2 populations, got k={k}")
    violations = []
    if not (0 < spec.c <= n):
        violations.append(Violation("c must lie in (0, n]", float(n), spec.c))
    if not (2 <= spec.h_count <= k):
        violations.append(Violation("h_count must lie in [2, k]", float(k), float(spec.h_count)))
    if not violations:
        bound = alpha_upper_bound(n, spec.h_count, spec.c)
        if spec.alpha > bound:
            violations.append(Violation("alpha above the dominance bound", bound, spec.alpha))
    return ImprovedValidation(ok=not violations, violations=tuple(violations))
