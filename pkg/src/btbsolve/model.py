"""Game primitives for the two-group hiring game with a noisy qualification test.

A worker draws a qualification cost (low with probability ``p``, the group's
potential), decides whether to qualify, and is then tested.  The test emits
``theta`` in {1, 2, 3}: 1 reveals an unqualified worker, 3 a qualified one and
2 is the garbled result both kinds can send.  The employer sees ``theta`` (and,
with the box present, the worker's group) and decides whether to hire.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum, IntEnum

DEFAULT_EPS = 1e-9


class ValidationError(ValueError):
    """A parameter violates a model invariant."""

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field


@dataclass(frozen=True)
class MarketParams:
    w: float
    B: float
    c_L: float
    c_H: float
    phi0: float
    phi1: float

    @property
    def cost_ratio(self) -> float:
        return self.c_L / self.w


@dataclass(frozen=True)
class PopulationParams:
    gamma: float
    p1: float
    p2: float

    @property
    def pbar(self) -> float:
        return population_potential(self)


def population_potential(pop: PopulationParams) -> float:
    # p2 + gamma*(p1 - p2) keeps p2 <= pbar <= p1 in floating point too
    return pop.p2 + pop.gamma * (pop.p1 - pop.p2)


class Signal(IntEnum):
    FAIL = 1
    GARBLED = 2
    PASS = 3


@dataclass(frozen=True)
class StrategyProfile:
    """Low-cost qualification probability and hiring probability on theta=2.

    High-cost workers never qualify, theta=1 is never hired and theta=3 always is.
    """

    chi: float
    eta: float


class TestTypology(str, Enum):
    UNIFORMLY_INFORMATIVE = "UniformlyInformative"
    UNINFORMATIVE = "Uninformative"
    POSITIVELY_INFORMATIVE = "PositivelyInformative"
    NEGATIVELY_INFORMATIVE = "NegativelyInformative"
    BOUNDARY_EQUAL_PHIS = "BoundaryEqualPhis"


TestTypology.__test__ = False  # keep pytest from collecting it


class PotentialTypology(str, Enum):
    UNIFORMLY_HIGH = "UniformlyHigh"
    UNIFORMLY_LOW = "UniformlyLow"
    STATISTICALLY_DISTINCT = "StatisticallyDistinct"
    EQUAL_POTENTIALS = "EqualPotentials"


def _open_unit(name: str, value: float) -> None:
    if not 0.0 < value < 1.0:
        raise ValidationError(f"{name}={value!r} outside (0, 1)", field=name)


def validate(params: MarketParams, pop: PopulationParams | None = None):
    """Return ``(params, pop)`` unchanged, or raise on the first broken invariant."""
    if not params.w > 0:
        raise ValidationError(f"w={params.w!r} must be positive", field="w")
    if not params.c_L > 0:
        raise ValidationError("Assumption 1 violated: c_L <= 0", field="c_L")
    if not params.c_L < params.w:
        raise ValidationError("Assumption 1 violated: c_L ≥ w", field="c_L")
    if not params.w < params.c_H:
        raise ValidationError("Assumption 1 violated: c_H ≤ w", field="c_H")
    if not params.B > params.w:
        raise ValidationError("B ≤ w: employer benefit must exceed the wage", field="B")
    _open_unit("phi0", params.phi0)
    _open_unit("phi1", params.phi1)
    if pop is not None:
        _open_unit("gamma", pop.gamma)
        _open_unit("p1", pop.p1)
        _open_unit("p2", pop.p2)
        if pop.p1 < pop.p2:
            raise ValidationError(f"p1 < p2 ({pop.p1!r} < {pop.p2!r})", field="p1")
    return params, pop


def signal_distribution(q: int, params: MarketParams) -> tuple[float, float, float]:
    """Probabilities of theta = 1, 2, 3 given qualification ``q``."""
    if q:
        return (0.0, 1.0 - params.phi1, params.phi1)
    return (params.phi0, 1.0 - params.phi0, 0.0)


def stage_payoffs(q: int, h: int, c: float, params: MarketParams) -> tuple[float, float]:
    worker = params.w * h - c * q
    employer = (params.B * q - params.w) * h
    return worker, employer


def posterior_mu(chi: float, p: float, params: MarketParams) -> float:
    """Employer's belief that a theta=2 worker is qualified."""
    if chi == 0:
        return 0.0
    qualified = (1.0 - params.phi1) * p * chi
    unqualified = (1.0 - params.phi0) * (1.0 - p * chi)
    return qualified / (qualified + unqualified)


def hiring_threshold(params: MarketParams) -> float:
    """Potential at which a theta=2 worker is worth exactly w when all low types qualify."""
    w, B, phi0, phi1 = params.w, params.B, params.phi0, params.phi1
    return w * (1.0 - phi0) / (B * (1.0 - phi1) + w * (phi1 - phi0))


def at_least(x: float, bound: float, eps: float = DEFAULT_EPS) -> bool:
    """``x >= bound`` where ties within ``eps`` count as satisfied."""
    return x >= bound - eps


def near(x: float, y: float, eps: float = DEFAULT_EPS) -> bool:
    return abs(x - y) <= eps


def clears_cost_ratio(params: MarketParams, eps: float = DEFAULT_EPS) -> tuple[bool, bool]:
    """Whether phi0 and phi1 clear the cost ratio c_L/w (weak, within eps)."""
    r = params.cost_ratio
    return at_least(params.phi0, r, eps), at_least(params.phi1, r, eps)


def classify_test(params: MarketParams, eps: float = DEFAULT_EPS) -> TestTypology:
    if near(params.phi0, params.phi1, eps):
        return TestTypology.BOUNDARY_EQUAL_PHIS
    hi0, hi1 = clears_cost_ratio(params, eps)
    if hi0 and hi1:
        return TestTypology.UNIFORMLY_INFORMATIVE
    if hi1:
        return TestTypology.POSITIVELY_INFORMATIVE
    if hi0:
        return TestTypology.NEGATIVELY_INFORMATIVE
    return TestTypology.UNINFORMATIVE


def classify_potentials(pop: PopulationParams, p_e_star: float,
                        eps: float = DEFAULT_EPS) -> PotentialTypology:
    if near(pop.p1, pop.p2, eps):
        return PotentialTypology.EQUAL_POTENTIALS
    if at_least(pop.p2, p_e_star, eps):
        return PotentialTypology.UNIFORMLY_HIGH
    if at_least(pop.p1, p_e_star, eps):
        return PotentialTypology.STATISTICALLY_DISTINCT
    return PotentialTypology.UNIFORMLY_LOW
