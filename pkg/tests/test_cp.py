import dataclasses
import math

import pytest
from hypothesis import given, settings

from usage_pricing import cp as cp_module
from usage_pricing.cp import cp_revenue_decomposition, solve_cp, water_fill_lambda
from usage_pricing.market import Group, Market, MarketError, validate_market
from usage_pricing.oracle import brute_lambda_bisection

from conftest import markets


def test_water_fill_lambda_examples(two_group):
    assert water_fill_lambda(two_group, 2) == pytest.approx(0.25, abs=1e-15)
    assert water_fill_lambda(two_group, 1) == pytest.approx(0.16, abs=1e-15)
    assert water_fill_lambda(two_group.with_supply(1), 2) == pytest.approx(1.0, abs=1e-15)


@pytest.mark.parametrize("k", [0, 3])
def test_water_fill_lambda_range(two_group, k):
    with pytest.raises(MarketError):
        water_fill_lambda(two_group, k)


def test_solve_cp_two_groups(two_group):
    sol = solve_cp(two_group)
    assert sol.lambda_star == pytest.approx(0.25)
    assert sol.k_eff == 2
    assert sol.allocations == pytest.approx((3, 1))
    assert sol.prices == pytest.approx((1, 0.5))
    assert sol.admitted == (1, 1)
    assert sol.revenue == pytest.approx(3.5, abs=1e-12)
    assert brute_lambda_bisection(two_group) == pytest.approx(0.25, rel=1e-12)


def test_solve_cp_drops_low_group(two_group):
    sol = solve_cp(two_group.with_supply(1))
    assert sol.k_eff == 1
    assert sol.lambda_star == pytest.approx(1.0)
    assert sol.allocations == pytest.approx((1, 0))
    assert sol.prices == pytest.approx((2, 1))
    assert sol.revenue == pytest.approx(2.0)


def test_solve_cp_zero_supply():
    sol = solve_cp(validate_market([(4, 1)], 0))
    assert sol.k_eff == 0
    assert sol.allocations == (0.0,)
    assert sol.revenue == 0
    assert sol.prices == (4.0,)


def test_decomposition_two_groups(two_group):
    d = cp_revenue_decomposition(two_group, solve_cp(two_group))
    assert d.n_eff == 2
    assert d.s_bar == pytest.approx(2)
    assert d.theta_bar == pytest.approx(2.5)
    assert d.gain == pytest.approx(0.25)
    assert d.revenue == pytest.approx(3.5)


def test_decomposition_single_group():
    m = validate_market([(4, 1)], 1)
    assert cp_revenue_decomposition(m, solve_cp(m)).gain == 0


def test_decomposition_five_group(five_group):
    sol = solve_cp(five_group)
    assert cp_revenue_decomposition(five_group, sol).revenue == pytest.approx(sol.revenue, rel=1e-9, abs=0)


def test_decomposition_rejects_foreign_solution(two_group, five_group):
    with pytest.raises(MarketError):
        cp_revenue_decomposition(two_group, solve_cp(five_group))
    with pytest.raises(MarketError):
        cp_revenue_decomposition(two_group.with_supply(7), solve_cp(two_group))


def test_at_most_one_lambda_per_group(monkeypatch, five_group):
    calls = []
    real = cp_module.water_fill_lambda

    def counting(market, k):
        calls.append(k)
        return real(market, k)

    monkeypatch.setattr(cp_module, "water_fill_lambda", counting)
    for s in (0.5, 5, 50, 500):
        calls.clear()
        solve_cp(five_group.with_supply(s))
        assert len(calls) <= five_group.size


@settings(max_examples=300, deadline=None)
@given(markets())
def test_cp_invariants(m):
    sol = solve_cp(m)
    k = sol.k_eff
    assert 1 <= k <= m.size
    assert all(s > 0 for s in sol.allocations[:k])
    assert all(s == 0 for s in sol.allocations[k:])
    assert all(a > b for a, b in zip(sol.prices[:k], sol.prices[1:k]))
    assert sol.prices[k:] == m.thetas[k:]
    assert sol.admitted == m.counts
    used = math.fsum(n * s for n, s in zip(m.counts, sol.allocations))
    assert used == pytest.approx(m.supply, rel=1e-9)
    assert m.thetas[k - 1] > sol.lambda_star
    assert k == m.size or m.thetas[k] <= sol.lambda_star + 1e-9
    lam = brute_lambda_bisection(m)
    assert abs(lam - sol.lambda_star) <= 1e-8 * sol.lambda_star


def _bump(m: Market, i: int, extra: int) -> Market:
    groups = list(m.groups)
    groups[i] = dataclasses.replace(groups[i], n=groups[i].n + extra)
    return Market(tuple(groups), m.supply)


@settings(max_examples=200, deadline=None)
@given(markets(min_groups=2))
def test_more_effective_users_shrink_market_and_raise_prices(m):
    sol = solve_cp(m)
    for i in range(sol.k_eff):
        bumped = solve_cp(_bump(m, i, 7))
        assert bumped.k_eff <= sol.k_eff
        for q in range(bumped.k_eff):
            assert bumped.prices[q] >= sol.prices[q] - 1e-12


def test_single_group_cp_equals_closed_form():
    m = Market((Group(4, 1),), 3)
    assert solve_cp(m).lambda_star == pytest.approx(0.25)
    assert brute_lambda_bisection(m) == pytest.approx(0.25, rel=1e-12)
