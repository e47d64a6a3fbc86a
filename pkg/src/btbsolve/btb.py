"""Two-group market with and without the box, and the welfare comparison.

With the box the employer conditions on group, so each group is a separate
single-group game.  With the box banned, both groups face one pooled game at
the population potential ``pbar = gamma*p1 + (1-gamma)*p2``.

Payoffs are re-evaluated in exact rational arithmetic from the float inputs so
that welfare deltas which vanish algebraically come out as exactly 0.0.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction

from .model import (
    DEFAULT_EPS,
    MarketParams,
    PopulationParams,
    PotentialTypology,
    TestTypology,
    at_least,
    classify_potentials,
    classify_test,
    clears_cost_ratio,
    hiring_threshold,
    near,
    population_potential,
)
from .solver import (
    Equilibrium,
    Kind,
    PayoffTable,
    Posture,
    profile_values,
    solve_single,
)


class Regime(str, Enum):
    WITH_BOX = "WithBox"
    BANNED = "Banned"


class Scenario(str, Enum):
    NO_EFFECT = "NoEffect"
    BTB_PARETO_DOMINANT = "BtbParetoDominant"
    BOX_PARETO_DOMINANT = "BoxParetoDominant"
    EMPLOYER_ONLY_HIGH_PBAR = "EmployerOnlyAffected_HighPbar"
    EMPLOYER_ONLY_LOW_PBAR = "EmployerOnlyAffected_LowPbar"
    OPPOSED_EMPLOYER_PRO_BAN = "OpposedEmployerProBan"
    EMPLOYER_HURT_WORKERS_HELPED = "EmployerHurtWorkersHelped"
    # Never assigned by the case analysis: where BTB acts as a commitment
    # device for the employer the outcome is already BtbParetoDominant.
    EMPLOYER_HELPED_BY_COMMITMENT = "EmployerHelpedByCommitment"


class ScenarioInconsistency(RuntimeError):
    """Scenario label and computed welfare deltas disagree (a solver bug)."""


ACTORS = ("employer", "w1_low", "w1_high", "w1_exante", "w2_low", "w2_high", "w2_exante")


@dataclass(frozen=True)
class MarketSolution:
    regime: Regime
    group1: tuple[Equilibrium, PayoffTable]
    group2: tuple[Equilibrium, PayoffTable]
    pooled: Equilibrium | None
    employer_total: float
    exact: dict = field(default_factory=dict, repr=False, compare=False)


@dataclass(frozen=True)
class BtbComparison:
    with_box: MarketSolution
    banned: MarketSolution
    deltas: dict
    scenario: Scenario
    test_typology: TestTypology
    potential_typology: PotentialTypology
    pbar_level: str
    interval: tuple[float, float] | None = None

    @property
    def typologies(self):
        return self.test_typology, self.potential_typology, self.pbar_level


def employer_btb_interval(params: MarketParams) -> tuple[float, float]:
    """Range of p2 where banning pays off for the employer under a negatively informative test.

    The lower end is the break-even potential for hiring group 2 aggressively.
    """
    w = params.w
    lower = w * (1 - params.phi0) / (params.B - w * params.phi0)
    return lower, hiring_threshold(params)


# -- exact evaluation -------------------------------------------------------

class _Exact:
    def __init__(self, params: MarketParams, pop: PopulationParams):
        F = Fraction
        self.w, self.B, self.c_L = F(params.w), F(params.B), F(params.c_L)
        self.phi0, self.phi1 = F(params.phi0), F(params.phi1)
        self.gamma, self.p1, self.p2 = F(pop.gamma), F(pop.p1), F(pop.p2)
        self.pbar = self.gamma * self.p1 + (1 - self.gamma) * self.p2
        self.p_e_star = self.w * (1 - self.phi0) / (
            self.B * (1 - self.phi1) + self.w * (self.phi1 - self.phi0))

    def profile(self, eq: Equilibrium, p_ref: Fraction):
        if eq.kind is Kind.ZQE:
            return Fraction(0), Fraction(0)
        if eq.kind is Kind.FQE:
            return Fraction(1), Fraction(1 if eq.posture is Posture.AGGRESSIVE else 0)
        eta = (self.w * self.phi1 - self.c_L) / (self.w * (self.phi1 - self.phi0))
        eta = min(max(eta, Fraction(0)), Fraction(1))
        return min(self.p_e_star / p_ref, Fraction(1)), eta

    def values(self, chi, eta, p):
        return profile_values(self.w, self.B, self.c_L, self.phi0, self.phi1, p, chi, eta)


def _table(vals) -> PayoffTable:
    return PayoffTable(*(float(v) for v in vals))


def _solution(regime, eqs, p_refs, ex: _Exact, pooled=None) -> MarketSolution:
    vals = []
    for eq, p_ref, p_g in zip(eqs, p_refs, (ex.p1, ex.p2)):
        chi, eta = ex.profile(eq, p_ref)
        vals.append(ex.values(chi, eta, p_g))
    total = ex.gamma * vals[0][3] + (1 - ex.gamma) * vals[1][3]
    exact = {"employer": total}
    for g, v in zip((1, 2), vals):
        exact[f"w{g}_low"], exact[f"w{g}_high"], exact[f"w{g}_exante"] = v[0], v[1], v[2]
    return MarketSolution(
        regime,
        (eqs[0], _table(vals[0])),
        (eqs[1], _table(vals[1])),
        pooled,
        float(total),
        exact,
    )


def solve_with_box(params: MarketParams, pop: PopulationParams,
                   eps: float = DEFAULT_EPS) -> MarketSolution:
    eq1 = solve_single(params, pop.p1, eps)[0]
    eq2 = solve_single(params, pop.p2, eps)[0]
    ex = _Exact(params, pop)
    return _solution(Regime.WITH_BOX, (eq1, eq2), (ex.p1, ex.p2), ex)


def solve_banned(params: MarketParams, pop: PopulationParams,
                 eps: float = DEFAULT_EPS) -> MarketSolution:
    pooled = solve_single(params, population_potential(pop), eps)[0]
    ex = _Exact(params, pop)
    return _solution(Regime.BANNED, (pooled, pooled), (ex.pbar, ex.pbar), ex, pooled=pooled)


# -- scenario classification -----------------------------------------------

def _scenario(params, pop, eps) -> Scenario:
    p_e = hiring_threshold(params)
    if classify_potentials(pop, p_e, eps) is not PotentialTypology.STATISTICALLY_DISTINCT:
        return Scenario.NO_EFFECT
    hi0, hi1 = clears_cost_ratio(params, eps)
    high = at_least(population_potential(pop), p_e, eps)
    if hi0 and hi1:
        return Scenario.EMPLOYER_ONLY_HIGH_PBAR if high else Scenario.EMPLOYER_ONLY_LOW_PBAR
    if hi1:
        return Scenario.BTB_PARETO_DOMINANT if high else Scenario.OPPOSED_EMPLOYER_PRO_BAN
    if hi0:
        if not high:
            return Scenario.BOX_PARETO_DOMINANT
        lower, _ = employer_btb_interval(params)
        if at_least(pop.p2, lower, eps):
            return Scenario.BTB_PARETO_DOMINANT
        return Scenario.EMPLOYER_HURT_WORKERS_HELPED
    return Scenario.NO_EFFECT


def on_boundary(params, pop, eps) -> bool:
    p_e = hiring_threshold(params)
    r = params.cost_ratio
    lower, _ = employer_btb_interval(params)
    return any(near(a, b, eps) for a, b in (
        (pop.p1, p_e), (pop.p2, p_e), (population_potential(pop), p_e),
        (params.phi0, r), (params.phi1, r), (pop.p2, lower), (pop.p1, pop.p2)))


# sign requirements per scenario: "+" strictly up, "-" strictly down,
# "0" unchanged, ">=" / "<=" weak; actors not listed are unconstrained
_SIGNS = {
    Scenario.NO_EFFECT: {a: "0" for a in ACTORS},
    Scenario.BTB_PARETO_DOMINANT: {**{a: ">=" for a in ACTORS}, "employer": "+", "w2_exante": "+"},
    Scenario.BOX_PARETO_DOMINANT: {"employer": "-", "w1_low": "<=", "w1_high": "<=",
                                   "w1_exante": "-", "w2_low": "0", "w2_high": "0",
                                   "w2_exante": "0"},
    Scenario.EMPLOYER_ONLY_HIGH_PBAR: {"employer": "-", "w1_low": "0", "w1_high": "0",
                                       "w1_exante": "0", "w2_low": ">=", "w2_high": ">=",
                                       "w2_exante": "+"},
    Scenario.EMPLOYER_ONLY_LOW_PBAR: {"employer": "-", "w1_low": "<=", "w1_high": "<=",
                                      "w1_exante": "-", "w2_low": "0", "w2_high": "0",
                                      "w2_exante": "0"},
    Scenario.OPPOSED_EMPLOYER_PRO_BAN: {"employer": "+", "w1_low": "<=", "w1_high": "<=",
                                        "w1_exante": "-", "w2_low": "0", "w2_high": "0",
                                        "w2_exante": "0"},
    Scenario.EMPLOYER_HURT_WORKERS_HELPED: {"employer": "-", "w1_low": "0", "w1_high": "0",
                                            "w1_exante": "0", "w2_low": ">=", "w2_high": ">=",
                                            "w2_exante": "+"},
}


def sign_requirements(scenario: Scenario) -> dict:
    return dict(_SIGNS.get(scenario, {}))


def sign_ok(value, req: str, tol: float, strict: bool = True) -> bool:
    """Check one delta against a sign requirement.

    ``strict=False`` relaxes "+"/"-" to weak inequalities, used on region
    boundaries where the strict gain degenerates to zero.
    """
    if req == "0":
        return abs(value) <= tol
    if req == ">=" or (req == "+" and not strict):
        return value >= -tol
    if req == "<=" or (req == "-" and not strict):
        return value <= tol
    if req == "+":
        return value > 0
    if req == "-":
        return value < 0
    raise ValueError(req)


def compare_btb(params: MarketParams, pop: PopulationParams,
                eps: float = DEFAULT_EPS) -> BtbComparison:
    box = solve_with_box(params, pop, eps)
    ban = solve_banned(params, pop, eps)
    exact = {a: ban.exact[a] - box.exact[a] for a in ACTORS}
    deltas = {a: float(v) for a, v in exact.items()}

    scenario = _scenario(params, pop, eps)
    strict = not on_boundary(params, pop, eps)
    tol = 10 * eps * max(params.B, 1.0)
    for actor, req in _SIGNS[scenario].items():
        if not sign_ok(exact[actor], req, tol, strict):
            raise ScenarioInconsistency(
                f"{scenario.value}: delta {actor}={deltas[actor]!r} violates '{req}'")

    p_e = hiring_threshold(params)
    test = classify_test(params, eps)
    interval = None
    if test is TestTypology.NEGATIVELY_INFORMATIVE:
        interval = employer_btb_interval(params)
    level = "High" if at_least(population_potential(pop), p_e, eps) else "Low"
    return BtbComparison(box, ban, deltas, scenario, test,
                         classify_potentials(pop, p_e, eps), level, interval)
