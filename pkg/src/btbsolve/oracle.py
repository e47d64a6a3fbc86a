"""Independent numerical checks of the closed-form solver.

Everything here works from the raw primitives (the signal table, stage payoffs
and Bayes' rule) and never calls the solver's closed forms, so agreement
between the two is evidence that both are right.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .model import (
    DEFAULT_EPS,
    MarketParams,
    PopulationParams,
    StrategyProfile,
    signal_distribution,
    stage_payoffs,
)

DEFAULT_Z = 4.0


@dataclass(frozen=True)
class DeviationReport:
    worker_gain: float
    employer_gain: float
    belief_error: float
    passed: bool


@dataclass(frozen=True)
class MonteCarloEstimate:
    mean: float
    std_error: float
    n: int
    seed: int | None

    @classmethod
    def from_samples(cls, x: np.ndarray, seed=None) -> "MonteCarloEstimate":
        n = int(x.size)
        if n == 0:
            return cls(math.nan, math.nan, 0, seed)
        sd = float(x.std(ddof=1)) if n > 1 else 0.0
        return cls(float(x.mean()), sd / math.sqrt(n), n, seed)

    def agrees(self, target: float, z: float = DEFAULT_Z, atol: float = 1e-12) -> bool:
        return abs(self.mean - target) <= z * self.std_error + atol


@dataclass(frozen=True)
class SimulationResult:
    worker: MonteCarloEstimate
    worker_low: MonteCarloEstimate
    worker_high: MonteCarloEstimate
    employer: MonteCarloEstimate


@dataclass(frozen=True)
class GridCluster:
    chi: float
    eta: float
    cells: tuple

    @property
    def profile(self) -> StrategyProfile:
        return StrategyProfile(self.chi, self.eta)


# -- best responses from primitives ----------------------------------------

def bayes_belief(chi, p: float, params: MarketParams):
    """Pr[q=1 | theta=2] by summing the joint distribution over cost and qualification.

    Accepts scalar or array ``chi``.
    """
    chi = np.asarray(chi, dtype=float)
    g_qual = signal_distribution(1, params)[1]
    g_unq = signal_distribution(0, params)[1]
    # low cost: qualify w.p. chi; high cost: never
    qualified = p * chi * g_qual
    unqualified = (p * (1 - chi) + (1 - p)) * g_unq
    mu = qualified / (qualified + unqualified)
    return float(mu) if mu.ndim == 0 else mu


def worker_pure_payoffs(eta, params: MarketParams):
    """Low-cost worker's expected payoff from (qualifying, not qualifying) given eta."""
    hire = (0.0, eta, 1.0)
    out = []
    for q in (1, 0):
        dist = signal_distribution(q, params)
        total = 0.0
        for prob, h in zip(dist, hire):
            hired, _ = stage_payoffs(q, 1, params.c_L, params)
            passed, _ = stage_payoffs(q, 0, params.c_L, params)
            total = total + prob * (h * hired + (1 - h) * passed)
        out.append(total)
    return out[0], out[1]


def hire_value(mu, params: MarketParams):
    """Employer's expected stage payoff from hiring a theta=2 worker at belief mu."""
    _, e_qual = stage_payoffs(1, 1, 0.0, params)
    _, e_unq = stage_payoffs(0, 1, 0.0, params)
    return mu * e_qual + (1 - mu) * e_unq


def check_equilibrium(profile: StrategyProfile, params: MarketParams, p: float,
                      tol: float = 1e-9, mu: float | None = None) -> DeviationReport:
    chi, eta = profile.chi, profile.eta
    u1, u0 = worker_pure_payoffs(eta, params)
    worker_gain = max(u1, u0) - (chi * u1 + (1 - chi) * u0)
    consistent = bayes_belief(chi, p, params)
    belief = consistent if mu is None else mu
    v = hire_value(belief, params)
    employer_gain = max(v, 0.0) - eta * v
    worker_gain, employer_gain = max(0.0, worker_gain), max(0.0, employer_gain)
    belief_error = abs(belief - consistent)
    passed = worker_gain <= tol and employer_gain <= tol and belief_error <= tol
    return DeviationReport(worker_gain, employer_gain, belief_error, passed)


# -- exhaustive grid oracle --------------------------------------------------

def _box_edges(grid_n: int):
    x = np.arange(grid_n) / (grid_n - 1)
    half = 0.5 / (grid_n - 1)
    return x, np.clip(x - half, 0.0, 1.0), np.clip(x + half, 0.0, 1.0)


def _min_gain(lo_val, hi_val, own_lo, own_hi):
    """Smallest deviation gain over a cell.

    ``lo_val``/``hi_val`` bound the incentive to play the action at the
    cell's edges along the opponent axis (monotone, so edges suffice);
    ``own_lo``/``own_hi`` are the cell's edges along the player's own
    probability axis.  Returns an (opponent, own) array.
    """
    lo_val = lo_val[:, None]
    hi_val = hi_val[:, None]
    pos = (1 - own_hi)[None, :] * np.minimum(lo_val, hi_val)
    neg = own_lo[None, :] * np.minimum(-lo_val, -hi_val)
    gain = np.where(lo_val > 0, pos, neg)
    return np.where(lo_val * hi_val <= 0, 0.0, gain)


def grid_pass_mask(params: MarketParams, p: float, grid_n: int = 401,
                   tol: float = 1e-9) -> np.ndarray:
    """Boolean (chi, eta) grid of cells whose box contains a mutual best response.

    Rows index chi, columns eta.
    """
    _, lo, hi = _box_edges(grid_n)
    d_lo = np.subtract(*worker_pure_payoffs(lo, params))
    d_hi = np.subtract(*worker_pure_payoffs(hi, params))
    worker = _min_gain(d_lo, d_hi, lo, hi).T                      # (chi, eta)
    v_lo = hire_value(bayes_belief(lo, p, params), params)
    v_hi = hire_value(bayes_belief(hi, p, params), params)
    employer = _min_gain(v_lo, v_hi, lo, hi)                       # (chi, eta)
    return (worker <= tol) & (employer <= tol)


def grid_search_equilibria(params: MarketParams, p: float, grid_n: int = 401,
                           tol: float = 1e-9) -> list[GridCluster]:
    """Approximate equilibria on a (chi, eta) grid, merged into 8-connected clusters."""
    if grid_n < 2:
        raise ValueError("grid_n must be at least 2")
    mask = grid_pass_mask(params, p, grid_n, tol)
    labels, count = ndimage.label(mask, structure=np.ones((3, 3), dtype=int))
    x = np.arange(grid_n) / (grid_n - 1)
    out = []
    for k in range(1, count + 1):
        ii, jj = np.nonzero(labels == k)
        cells = tuple(zip(ii.tolist(), jj.tolist()))
        out.append(GridCluster(float(x[ii].mean()), float(x[jj].mean()), cells))
    return out


def match_clusters(clusters, equilibria, grid_n: int, max_steps: float = 2.0):
    """Pair clusters with equilibria by nearest member cell (grid-step units).

    Returns ``(extra_clusters, missing_equilibria)``.
    """
    scale = grid_n - 1
    dist = np.full((len(clusters), len(equilibria)), np.inf)
    for a, cl in enumerate(clusters):
        cells = np.asarray(cl.cells, dtype=float)
        for b, eq in enumerate(equilibria):
            d = np.maximum(np.abs(cells[:, 0] - eq.chi_star * scale),
                           np.abs(cells[:, 1] - eq.eta_star * scale))
            dist[a, b] = d.min()
    near = dist <= max_steps
    extra = [cl for a, cl in enumerate(clusters) if not near[a].any()]
    missing = [eq for b, eq in enumerate(equilibria) if not near[:, b].any()]
    return extra, missing


# -- Monte Carlo ---------------------------------------------------------------

def _rng(seed):
    return np.random.default_rng(seed)


def _draws(n: int, rng) -> np.ndarray:
    return rng.random((4, n))


def _play(u: np.ndarray, profile: StrategyProfile, params: MarketParams, p: float):
    low = u[0] < p
    q = low & (u[1] < profile.chi)
    theta = np.where(q, np.where(u[2] < params.phi1, 3, 2), np.where(u[2] < params.phi0, 1, 2))
    h = (theta == 3) | ((theta == 2) & (u[3] < profile.eta))
    cost = np.where(low, params.c_L, params.c_H)
    worker = params.w * h - cost * q
    employer = (params.B * q - params.w) * h
    return worker, employer, low


def _seed_int(seed):
    return seed if isinstance(seed, (int, np.integer)) or seed is None else None


def simulate_payoffs(profile: StrategyProfile, params: MarketParams, p: float,
                     n: int = 10**6, seed=42) -> SimulationResult:
    """Play the game ``n`` times under ``profile``; deterministic in ``seed``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    u = _draws(n, _rng(seed))
    worker, employer, low = _play(u, profile, params, p)
    s = _seed_int(seed)
    est = MonteCarloEstimate.from_samples
    return SimulationResult(est(worker, s), est(worker[low], s), est(worker[~low], s),
                            est(employer, s))


def check_payoffs(profile: StrategyProfile, table, params: MarketParams, p: float,
                  n: int = 10**6, seed=42, z: float = DEFAULT_Z) -> dict:
    """Compare a payoff table with simulation, actor by actor."""
    sim = simulate_payoffs(profile, params, p, n, seed)
    rows = {}
    for actor, est, target in (("worker_low", sim.worker_low, table.worker_low),
                               ("worker_high", sim.worker_high, table.worker_high),
                               ("worker_exante", sim.worker, table.worker_exante),
                               ("employer", sim.employer, table.employer)):
        rows[actor] = {"expected": target, "mean": est.mean, "std_error": est.std_error,
                       "ok": bool(est.agrees(target, z))}
    return rows


@dataclass
class ComparisonReport:
    passed: bool
    rows: list = field(default_factory=list)
    failures: list = field(default_factory=list)


def _paired(a: np.ndarray, b: np.ndarray):
    d = b - a
    n = d.size
    if n == 0:
        return 0.0, 0.0
    se = float(d.std(ddof=1)) / math.sqrt(n) if n > 1 else 0.0
    return float(d.mean()), se


def verify_comparison(cmp, params: MarketParams, pop: PopulationParams, n: int = 10**6,
                      seed=42, tol: float = 1e-9, z: float = DEFAULT_Z,
                      eps: float = DEFAULT_EPS) -> ComparisonReport:
    """Re-estimate every welfare delta by simulation and check it against ``cmp``.

    Both regimes are played on the same draws (common random numbers), so a
    group whose profile does not change has a delta of exactly zero.
    """
    from .btb import sign_requirements

    root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    streams = root.spawn(2)
    est = {}
    emp = []
    for g, p_g, ss in ((1, pop.p1, streams[0]), (2, pop.p2, streams[1])):
        box_prof = getattr(cmp.with_box, f"group{g}")[0].profile
        ban_prof = getattr(cmp.banned, f"group{g}")[0].profile
        u = _draws(n, _rng(ss))
        wx, ex, low = _play(u, box_prof, params, p_g)
        wb, eb, _ = _play(u, ban_prof, params, p_g)
        est[f"w{g}_low"] = _paired(wx[low], wb[low])
        est[f"w{g}_high"] = _paired(wx[~low], wb[~low])
        est[f"w{g}_exante"] = _paired(wx, wb)
        emp.append(_paired(ex, eb))
    (m1, s1), (m2, s2) = emp
    gam = pop.gamma
    est["employer"] = (gam * m1 + (1 - gam) * m2,
                       math.sqrt((gam * s1) ** 2 + ((1 - gam) * s2) ** 2))

    report = ComparisonReport(True)
    reqs = sign_requirements(cmp.scenario)
    for actor, (mean, se) in est.items():
        expected = cmp.deltas[actor]
        band = z * se + tol
        consistent = abs(mean - expected) <= band
        req = reqs.get(actor)
        contradicted = (
            (req == "0" and abs(mean) > band)
            or (req in ("+", ">=") and mean < -band)
            or (req in ("-", "<=") and mean > band))
        resolved = abs(mean) > z * se if expected != 0 else True
        row = {"actor": actor, "expected": expected, "mean": mean, "std_error": se,
               "consistent": bool(consistent), "sign_resolved": bool(resolved),
               "requirement": req}
        report.rows.append(row)
        if not consistent:
            report.failures.append(
                f"{actor}: simulated delta {mean:.6g} ± {se:.2g} vs closed form {expected:.6g}")
        if contradicted:
            report.failures.append(
                f"{actor}: simulated delta {mean:.6g} contradicts '{req}' for {cmp.scenario.value}")
    report.passed = not report.failures
    return report
