"""Sequential equilibria of the single-group game and their payoffs."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .model import (
    DEFAULT_EPS,
    MarketParams,
    StrategyProfile,
    at_least,
    clears_cost_ratio,
    hiring_threshold,
    posterior_mu,
)


class Kind(str, Enum):
    FQE = "FQE"
    MSE = "MSE"
    ZQE = "ZQE"


class Posture(str, Enum):
    AGGRESSIVE = "Aggressive"
    CONSERVATIVE = "Conservative"
    MIXED = "Mixed"


_RANK = {Kind.FQE: 2, Kind.MSE: 1, Kind.ZQE: 0}


class ParetoRankingError(RuntimeError):
    pass


@dataclass(frozen=True)
class Equilibrium:
    kind: Kind
    chi_star: float
    eta_star: float
    posture: Posture
    mu: float

    @property
    def profile(self) -> StrategyProfile:
        return StrategyProfile(self.chi_star, self.eta_star)

    @property
    def label(self) -> str:
        if self.kind is Kind.FQE:
            return f"FQE-{self.posture.value.lower()}"
        return self.kind.value


@dataclass(frozen=True)
class PayoffTable:
    worker_low: float
    worker_high: float
    worker_exante: float
    employer: float


def _eta_m(params: MarketParams) -> float:
    w = params.w
    return (w * params.phi1 - params.c_L) / (w * (params.phi1 - params.phi0))


def mse_profile(params: MarketParams, p: float):
    """Interior mixed profile ``(eta_M, chi_M)``, or None when it is not interior."""
    if params.phi0 == params.phi1:
        return None
    eta = _eta_m(params)
    chi = hiring_threshold(params) / p
    if 0.0 < eta < 1.0 and 0.0 < chi < 1.0:
        return eta, chi
    return None


def _make(kind: Kind, chi: float, eta: float, p: float, params: MarketParams) -> Equilibrium:
    if kind is Kind.MSE:
        posture = Posture.MIXED
    elif eta >= 1.0:
        posture = Posture.AGGRESSIVE
    else:
        posture = Posture.CONSERVATIVE
    return Equilibrium(kind, chi, eta, posture, posterior_mu(chi, p, params))


def enumerate_equilibria(params: MarketParams, p: float,
                         eps: float = DEFAULT_EPS) -> list[Equilibrium]:
    """All sequential equilibria at potential ``p``, ordered FQE, MSE, ZQE.

    Ties at a region boundary (within ``eps``) resolve to the side where the
    inequality holds weakly.  On those boundaries the mixed profile is the
    limit of the interior one, so it is clamped into [0, 1].
    """
    hi0, hi1 = clears_cost_ratio(params, eps)
    out = []
    if at_least(p, hiring_threshold(params), eps):
        if hi0:
            out.append(_make(Kind.FQE, 1.0, 1.0, p, params))
        if hi0 != hi1:
            eta = min(max(_eta_m(params), 0.0), 1.0)
            chi = min(hiring_threshold(params) / p, 1.0)
            out.append(_make(Kind.MSE, chi, eta, p, params))
        if not hi1:
            out.append(_make(Kind.ZQE, 0.0, 0.0, p, params))
    elif hi1:
        out.append(_make(Kind.FQE, 1.0, 0.0, p, params))
    else:
        out.append(_make(Kind.ZQE, 0.0, 0.0, p, params))
    return out


def equilibrium_payoffs(eq: Equilibrium, params: MarketParams, p: float) -> PayoffTable:
    w, B, c_L, phi0, phi1 = params.w, params.B, params.c_L, params.phi0, params.phi1
    if eq.kind is Kind.ZQE:
        low = high = employer = 0.0
    elif eq.kind is Kind.MSE:
        low = high = (1 - phi0) * (phi1 * w - c_L) / (phi1 - phi0)
        employer = (B - w) * phi1 * hiring_threshold(params)
    elif eq.posture is Posture.AGGRESSIVE:
        low = w - c_L
        high = w * (1 - phi0)
        employer = p * (B - w) - (1 - p) * w * (1 - phi0)
    else:
        low = phi1 * w - c_L
        high = 0.0
        employer = p * phi1 * (B - w)
    return PayoffTable(low, high, p * low + (1 - p) * high, employer)


def profile_values(w, B, c_L, phi0, phi1, p, chi, eta):
    """Expected payoffs of an arbitrary profile, as plain arithmetic.

    Works for floats and for ``fractions.Fraction`` inputs alike.  Returns
    ``(worker_low, worker_high, worker_exante, employer)``.
    """
    hired_if_qualified = phi1 + (1 - phi1) * eta
    hired_if_not = (1 - phi0) * eta
    u_qualify = w * hired_if_qualified - c_L
    u_shirk = w * hired_if_not
    low = chi * u_qualify + (1 - chi) * u_shirk
    high = u_shirk
    qualified = p * chi
    employer = qualified * hired_if_qualified * (B - w) - (1 - qualified) * hired_if_not * w
    return low, high, p * low + (1 - p) * high, employer


def profile_payoffs(profile: StrategyProfile, params: MarketParams, p: float) -> PayoffTable:
    return PayoffTable(*profile_values(params.w, params.B, params.c_L, params.phi0,
                                       params.phi1, p, profile.chi, profile.eta))


def _dominates(a: PayoffTable, b: PayoffTable, eps: float) -> bool:
    return (a.worker_low >= b.worker_low - eps and a.worker_high >= b.worker_high - eps
            and a.employer >= b.employer - eps)


def pareto_select(equilibria: list[Equilibrium], payoffs: list[PayoffTable],
                  eps: float = DEFAULT_EPS) -> Equilibrium:
    """Pick the Pareto-dominant equilibrium (FQE over MSE over ZQE).

    Raises ParetoRankingError if the payoffs contradict that ranking.
    """
    if not equilibria:
        raise ValueError("no equilibria to select from")
    best = max(range(len(equilibria)), key=lambda i: _RANK[equilibria[i].kind])
    for i, other in enumerate(payoffs):
        if not _dominates(payoffs[best], other, eps):
            raise ParetoRankingError(
                f"{equilibria[best].label} does not dominate {equilibria[i].label}: "
                f"{payoffs[best]} vs {other}")
    return equilibria[best]


def solve_single(params: MarketParams, p: float, eps: float = DEFAULT_EPS):
    """Enumerate, price and select.  Returns ``(selected, payoffs, equilibria, tables)``."""
    eqs = enumerate_equilibria(params, p, eps)
    tables = [equilibrium_payoffs(e, params, p) for e in eqs]
    best = pareto_select(eqs, tables, eps)
    return best, tables[eqs.index(best)], eqs, tables
