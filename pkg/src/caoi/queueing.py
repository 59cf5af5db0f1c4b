"""Closed-form average age of information for two status-update disciplines.

The FCFS M/M/1 queue keeps every update and serves them in order; its
average age is finite only for utilization below one.  The preemptive
LCFS variant (written mm1star throughout) always serves the newest
update, discarding whatever was in service, and stays stable at any
load.  Rates are in packets per second and ages in seconds.
"""

import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

from .errors import DomainError

# Literal modes accepted by the constrained evaluators.  "paper" uses the
# near-saturation approximation 2/lambda for the preemptive discipline,
# "exact" evaluates the full closed form.
MODES = ("paper", "exact")


class Discipline(Enum):
    FCFS_MM1 = "mm1"
    LCFS_PREEMPTIVE = "mm1star"


@dataclass(frozen=True)
class QueueSpec:
    """Arrival/service rate pair for one discipline.

    Positivity is always enforced.  Stability (rho < 1) is only required
    where the formula demands it, because the preemptive discipline has a
    finite average age even at rho >= 1.
    """

    discipline: Discipline
    lam: float
    mu: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.lam) and self.lam > 0):
            raise DomainError(f"arrival rate must be positive and finite, got {self.lam}")
        if not (math.isfinite(self.mu) and self.mu > 0):
            raise DomainError(f"service rate must be positive and finite, got {self.mu}")

    @property
    def rho(self) -> float:
        return self.lam / self.mu

    def require_stable(self) -> None:
        if self.rho >= 1.0:
            raise DomainError(
                f"utilization rho={self.rho:.6g} >= 1 is not admissible here"
            )


@dataclass(frozen=True)
class SaturationEpsilon:
    """Distance from saturation used by the preemptive optimum rho = 1 - eps."""

    epsilon: float = 1e-3

    def __post_init__(self) -> None:
        if not (0.0 < self.epsilon < 0.1):
            raise DomainError(f"epsilon must lie in (0, 0.1), got {self.epsilon}")


DEFAULT_EPS = SaturationEpsilon()


@dataclass(frozen=True)
class ConstrainedAoi:
    """Result of minimizing average age under an arrival-rate cap."""

    aoi: float
    lambda_used: float
    binding: bool


def avg_aoi_mm1(spec: QueueSpec) -> float:
    """Average age of the FCFS M/M/1 queue, (1/mu)(1 + 1/rho + rho^2/(1-rho))."""
    rho = spec.rho
    if rho >= 1.0:
        raise DomainError(f"FCFS average age diverges for rho={rho:.6g} >= 1")
    return (1.0 / spec.mu) * (1.0 + 1.0 / rho + rho * rho / (1.0 - rho))


def avg_aoi_mm1_star(spec: QueueSpec) -> float:
    """Average age of the preemptive LCFS queue, 1/mu + 1/lambda.

    Finite for any positive rates, including rho >= 1.
    """
    return 1.0 / spec.mu + 1.0 / spec.lam


def avg_aoi(spec: QueueSpec) -> float:
    """Dispatch to the closed form matching spec.discipline."""
    if spec.discipline is Discipline.FCFS_MM1:
        return avg_aoi_mm1(spec)
    return avg_aoi_mm1_star(spec)


def _age_quartic(rho: float) -> float:
    # Stationarity condition of the FCFS average age in rho.
    return rho ** 4 - 2.0 * rho ** 3 + rho * rho - 2.0 * rho + 1.0


def _age_quartic_deriv(rho: float) -> float:
    return 4.0 * rho ** 3 - 6.0 * rho * rho + 2.0 * rho - 2.0


_BRACKET = (0.4, 0.7)
_ROOT_TOL = 1e-9


def _solve_opt_rho_mm1() -> float:
    # Bracketed bisection down to the tolerance, then Newton polish.
    lo, hi = _BRACKET
    flo, fhi = _age_quartic(lo), _age_quartic(hi)
    if not (flo > 0.0 > fhi):
        raise DomainError("utilization quartic lost its sign change on [0.4, 0.7]")
    while hi - lo > _ROOT_TOL:
        mid = 0.5 * (lo + hi)
        if _age_quartic(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    root = 0.5 * (lo + hi)
    for _ in range(3):
        step = _age_quartic(root) / _age_quartic_deriv(root)
        nxt = root - step
        if _BRACKET[0] < nxt < _BRACKET[1]:
            root = nxt
    return root


@lru_cache(maxsize=1)
def optimal_utilization_mm1() -> float:
    """Utilization minimizing the FCFS average age, about 0.53101.

    Unique root in (0, 1) of rho^4 - 2 rho^3 + rho^2 - 2 rho + 1 = 0.
    """
    return _solve_opt_rho_mm1()


def optimal_utilization_mm1_star(eps: SaturationEpsilon = DEFAULT_EPS) -> float:
    """Near-saturation optimum of the preemptive discipline, rho = 1 - eps."""
    return 1.0 - eps.epsilon


def _check_mode(mode: str) -> None:
    if mode not in MODES:
        raise DomainError(f"mode must be one of {MODES}, got {mode!r}")


def constrained_aoi_mm1(mu: float, lambda_bound: float, mode: str = "exact") -> ConstrainedAoi:
    """Minimal FCFS average age subject to lambda <= lambda_bound at fixed mu.

    When the cap exceeds the free optimum rho'*mu the cap is slack and the
    unconstrained optimum is returned (ties count as slack).  Otherwise the
    cap binds and the closed form is evaluated at the cap.  Both modes
    coincide for this discipline; the argument is accepted for symmetry.
    """
    _check_mode(mode)
    if not (math.isfinite(mu) and mu > 0):
        raise DomainError(f"service rate must be positive and finite, got {mu}")
    if not (lambda_bound > 0):
        raise DomainError(f"lambda bound must be positive, got {lambda_bound}")
    rho_opt = optimal_utilization_mm1()
    lam_free = rho_opt * mu
    if lambda_bound >= lam_free:
        spec = QueueSpec(Discipline.FCFS_MM1, lam_free, mu)
        return ConstrainedAoi(avg_aoi_mm1(spec), lam_free, False)
    if lambda_bound >= mu:
        raise DomainError(
            f"bound {lambda_bound:.6g} >= mu {mu:.6g} leaves no stable binding point"
        )
    spec = QueueSpec(Discipline.FCFS_MM1, lambda_bound, mu)
    return ConstrainedAoi(avg_aoi_mm1(spec), lambda_bound, True)


def constrained_aoi_mm1_star(
    lambda_free: float,
    lambda_bound: float,
    eps: SaturationEpsilon = DEFAULT_EPS,
    mode: str = "exact",
) -> ConstrainedAoi:
    """Minimal preemptive-LCFS average age with arrival rate capped.

    lambda_free is the rate the sender would pick without the cap; the
    evaluation point is min(lambda_free, lambda_bound).  In "paper" mode
    the age is the near-saturation approximation 2/lambda.  In "exact"
    mode it is 1/mu + 1/lambda with the service rate re-saturated to
    mu = lambda/(1 - eps), so the two modes differ by eps/lambda.
    """
    _check_mode(mode)
    if not (math.isfinite(lambda_free) and lambda_free > 0):
        raise DomainError(f"free rate must be positive and finite, got {lambda_free}")
    if not (lambda_bound > 0):
        raise DomainError(f"lambda bound must be positive, got {lambda_bound}")
    binding = lambda_bound < lambda_free
    lam = lambda_bound if binding else lambda_free
    if mode == "paper":
        return ConstrainedAoi(2.0 / lam, lam, binding)
    mu = lam / (1.0 - eps.epsilon)
    return ConstrainedAoi(1.0 / mu + 1.0 / lam, lam, binding)
