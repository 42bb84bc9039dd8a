import math

import pytest
from hypothesis import given, strategies as st
from scipy.optimize import minimize_scalar

from usage_pricing.market import (
    DuplicateThetaError,
    Group,
    Market,
    MarketError,
    demand,
    surplus_at,
    utility,
    validate_market,
)

# 4 ln 4 to 20 digits (mpmath).
FOUR_LN_FOUR = 5.5451774444795624753


def test_utility_examples():
    assert utility(4, 0) == 0
    assert utility(4, 3) == pytest.approx(FOUR_LN_FOUR, abs=1e-12)
    assert utility(1, math.e - 1) == pytest.approx(1.0, abs=1e-15)


@pytest.mark.parametrize("theta,s", [(0, 1), (-1, 1), (1, -0.1)])
def test_utility_domain(theta, s):
    with pytest.raises(MarketError):
        utility(theta, s)


def test_demand_examples():
    d = demand(4, 1)
    assert d.quantity == 3
    assert d.surplus == pytest.approx(FOUR_LN_FOUR - 3, abs=1e-12)
    # Closed-form demand against a numeric maximization of the surplus.
    res = minimize_scalar(lambda s: -surplus_at(4, s, 1), bounds=(0, 50), method="bounded",
                          options={"xatol": 1e-10})
    assert res.x == pytest.approx(3, abs=1e-6)
    assert demand(1, 1) == demand(1, 2)
    assert demand(1, 2).quantity == 0 and demand(1, 2).surplus == 0


@pytest.mark.parametrize("price", [0, -1])
def test_demand_rejects_nonpositive_price(price):
    with pytest.raises(MarketError):
        demand(1, price)


def test_surplus_examples():
    assert surplus_at(4, 3, 1) == pytest.approx(FOUR_LN_FOUR - 3, abs=1e-12)
    assert surplus_at(4, 0, 1) == 0
    assert surplus_at(4, 3, 0.5) == pytest.approx(FOUR_LN_FOUR - 1.5, abs=1e-12)


def test_validate_sorts_descending():
    m = validate_market([(1, 1), (4, 1)], 4)
    assert m.thetas == (4.0, 1.0)


def test_validate_duplicate_theta():
    with pytest.raises(DuplicateThetaError) as info:
        validate_market([(4, 1), (4, 2)], 4)
    assert (info.value.first, info.value.second) == (0, 1)
    assert "duplicate" in str(info.value)


def test_five_group_market():
    m = validate_market([(16, 2), (8, 3), (4, 5), (2, 10), (1, 80)], 100)
    assert m.size == 5 and m.counts == (2, 3, 5, 10, 80)


@pytest.mark.parametrize(
    "groups,supply",
    [([], 1), ([(1, 1)], -1), ([(1, 0)], 1), ([(1, 1.5)], 1), ([(0, 1)], 1), ([(1, True)], 1)],
)
def test_validate_rejects(groups, supply):
    with pytest.raises(MarketError):
        validate_market(groups, supply)


def test_market_requires_order():
    with pytest.raises(MarketError):
        Market((Group(1, 1), Group(2, 1)), 1)


def test_market_is_immutable(two_group):
    with pytest.raises(AttributeError):
        two_group.supply = 3


thetas = st.floats(0.01, 100)
prices = st.floats(0.01, 100)


@given(thetas, prices, prices)
def test_demand_nonincreasing_in_price(theta, p1, p2):
    lo, hi = sorted((p1, p2))
    assert demand(theta, lo).quantity >= demand(theta, hi).quantity
    if hi >= theta:
        assert demand(theta, hi).quantity == 0


@given(thetas, prices)
def test_demand_is_argmax(theta, p):
    best = demand(theta, p)
    assert best.surplus >= -1e-12
    s_star = best.quantity
    grid = [s_star * 3 * k / 400 + 10 * k / 400 for k in range(401)]
    assert all(best.surplus >= surplus_at(theta, s, p) - 1e-9 for s in grid)


@given(thetas, st.floats(0, 1e3), st.floats(0, 1e3))
def test_utility_concave(theta, a, b):
    assert utility(theta, (a + b) / 2) >= (utility(theta, a) + utility(theta, b)) / 2 - 1e-9
