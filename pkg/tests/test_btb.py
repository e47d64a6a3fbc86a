import numpy as np
import pytest

from _support import random_market, random_population
from btbsolve import (
    MarketParams,
    PopulationParams,
    PotentialTypology,
    Regime,
    Scenario,
    TestTypology,
    compare_btb,
    employer_btb_interval,
    population_potential,
    solve_banned,
    solve_with_box,
)
from btbsolve.btb import sign_ok, sign_requirements


def pop(g, p1, p2):
    return PopulationParams(g, p1, p2)


def test_population_potential_examples():
    assert population_potential(pop(0.5, 0.8, 0.4)) == pytest.approx(0.6)
    assert population_potential(pop(0.8, 0.8, 0.4)) == pytest.approx(0.72)
    assert population_potential(pop(0.3, 0.55, 0.55)) == 0.55


def test_with_box_examples(base, negative):
    sol = solve_with_box(base, pop(0.5, 0.8, 0.4))
    assert sol.regime is Regime.WITH_BOX
    assert sol.group1[0].label == "MSE" and sol.group1[1].worker_low == pytest.approx(0.6)
    assert sol.group2[0].label == "FQE-conservative"
    assert sol.group2[1].worker_low == pytest.approx(0.3)
    assert sol.employer_total == pytest.approx(0.32)
    sol = solve_with_box(negative, pop(0.5, 0.5, 0.2))
    assert (sol.group1[0].label, sol.group2[0].label) == ("FQE-aggressive", "ZQE")
    high = solve_with_box(base, pop(0.5, 0.9, 0.8))
    assert high.group1[0].posture is high.group2[0].posture


def test_banned_examples(base, negative):
    sol = solve_banned(base, pop(0.8, 0.8, 0.4))
    assert sol.pooled.label == "MSE"
    assert sol.pooled.chi_star == pytest.approx(0.925926, abs=1e-6)
    for g in (sol.group1[1], sol.group2[1]):
        assert (g.worker_low, g.worker_high) == pytest.approx((0.6, 0.6))
    assert sol.employer_total == pytest.approx(0.4)

    sol = solve_banned(negative, pop(0.5, 0.4, 0.2))
    assert sol.pooled.label == "ZQE" and sol.employer_total == 0.0

    sol = solve_banned(negative, pop(0.5, 0.5, 0.3))
    assert sol.pooled.label == "FQE-aggressive"
    assert (sol.group2[1].worker_low, sol.group2[1].worker_high) == pytest.approx((0.7, 0.4))


def test_employer_interval(negative):
    assert employer_btb_interval(negative) == pytest.approx((2 / 7, 1 / 3))
    lower, _ = employer_btb_interval(MarketParams(1, 2, 0.3, 1.5, 0.2, 0.2))
    assert lower == pytest.approx(0.8 / 1.8)
    # break-even: aggressive hiring of group 2 is worth exactly zero at the lower end
    p2 = employer_btb_interval(negative)[0]
    assert p2 * (2 - 1) - (1 - p2) * 1 * (1 - 0.6) == pytest.approx(0.0, abs=1e-15)


def test_compare_positive_high(base):
    cmp = compare_btb(base, pop(0.8, 0.8, 0.4))
    assert cmp.scenario is Scenario.BTB_PARETO_DOMINANT
    assert cmp.with_box.employer_total == pytest.approx(0.368)
    assert cmp.banned.employer_total == pytest.approx(0.4)
    assert cmp.deltas["w2_low"] == pytest.approx(0.3)
    assert cmp.deltas["w1_low"] == 0.0 and cmp.deltas["w1_high"] == 0.0
    assert cmp.typologies == (TestTypology.POSITIVELY_INFORMATIVE,
                              PotentialTypology.STATISTICALLY_DISTINCT, "High")


def test_compare_positive_low(base):
    cmp = compare_btb(base, pop(0.5, 0.8, 0.4))
    assert cmp.scenario is Scenario.OPPOSED_EMPLOYER_PRO_BAN
    assert (cmp.with_box.employer_total, cmp.banned.employer_total) == pytest.approx((0.32, 0.36))
    assert cmp.deltas["w1_low"] == pytest.approx(-0.3)
    assert cmp.deltas["w2_low"] == 0.0 and cmp.deltas["w2_exante"] == 0.0


def test_compare_uniformly_informative():
    m = MarketParams(1, 2, 0.3, 1.5, 0.9, 0.8)
    cmp = compare_btb(m, pop(0.5, 0.5, 0.2))
    assert cmp.scenario is Scenario.EMPLOYER_ONLY_HIGH_PBAR
    assert cmp.deltas["employer"] == pytest.approx(-0.02)
    assert cmp.with_box.group2[1].worker_low == pytest.approx(0.5)
    assert cmp.banned.group2[1].worker_low == pytest.approx(0.7)


def test_compare_negative_cases(negative):
    cmp = compare_btb(negative, pop(0.5, 0.5, 0.25))
    assert cmp.scenario is Scenario.EMPLOYER_HURT_WORKERS_HELPED
    assert (cmp.with_box.employer_total, cmp.banned.employer_total) == pytest.approx((0.15, 0.125))
    assert cmp.interval == pytest.approx((2 / 7, 1 / 3))
    assert compare_btb(negative, pop(0.5, 0.5, 0.3)).scenario is Scenario.BTB_PARETO_DOMINANT
    assert compare_btb(negative, pop(0.5, 0.4, 0.2)).scenario is Scenario.BOX_PARETO_DOMINANT


def test_no_effect_cases(base):
    uninformative = MarketParams(1, 2, 0.3, 1.5, 0.1, 0.2)
    for m, p in ((base, pop(0.5, 0.5, 0.3)), (base, pop(0.5, 0.9, 0.7)),
                 (base, pop(0.5, 0.5, 0.5)), (uninformative, pop(0.5, 0.9, 0.1))):
        cmp = compare_btb(m, p)
        assert cmp.scenario is Scenario.NO_EFFECT
        assert all(v == 0.0 for v in cmp.deltas.values())
    assert compare_btb(base, pop(0.5, 0.5, 0.5)).potential_typology is \
        PotentialTypology.EQUAL_POTENTIALS


def test_commitment_scenario_is_never_assigned():
    rng = np.random.default_rng(7)
    seen = set()
    for _ in range(400):
        m = random_market(rng)
        p = random_population(rng, m, "distinct", tries=200)
        if p is not None:
            seen.add(compare_btb(m, p).scenario)
    assert Scenario.EMPLOYER_HELPED_BY_COMMITMENT not in seen
    assert len(seen) >= 6


def test_pooled_mse_raises_advantaged_mixing(base):
    p_ = pop(0.8, 0.8, 0.4)
    box, ban = solve_with_box(base, p_), solve_banned(base, p_)
    assert ban.pooled.chi_star > box.group1[0].chi_star
    assert ban.group1[1].worker_low == pytest.approx(0.8 * 0.75)


def test_advantaged_never_gain_disadvantaged_never_lose():
    rng = np.random.default_rng(11)
    for _ in range(500):
        m = random_market(rng)
        p = random_population(rng, m, "distinct", tries=200)
        if p is None:
            continue
        d = compare_btb(m, p).deltas
        assert d["w1_exante"] <= 1e-12
        assert d["w2_exante"] >= -1e-12


def test_sign_requirement_helpers():
    assert sign_ok(0.1, "+", 1e-9) and not sign_ok(0.0, "+", 1e-9)
    assert sign_ok(0.0, "+", 1e-9, strict=False)
    assert sign_ok(-1e-12, ">=", 1e-9) and sign_ok(5e-10, "0", 1e-9)
    assert sign_ok(-0.1, "<=", 1e-9) and not sign_ok(0.1, "<=", 1e-9)
    assert sign_requirements(Scenario.EMPLOYER_HELPED_BY_COMMITMENT) == {}
    with pytest.raises(ValueError):
        sign_ok(0.0, "?", 1e-9)


def test_boundary_inputs_do_not_raise(negative):
    lower, upper = employer_btb_interval(negative)
    for p2 in (lower, upper - 1e-12):
        compare_btb(negative, pop(0.5, 0.5, p2))
    compare_btb(MarketParams(1, 2, 0.3, 1.5, 0.3, 0.6), pop(0.5, 0.8, 0.4))
