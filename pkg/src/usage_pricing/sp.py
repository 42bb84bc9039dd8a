"""Single pricing, and how it compares with complete differentiation."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .cp import RevenueDecomposition, solve_cp
from .market import EPS, Market, MarketError


@dataclass(frozen=True)
class SpSolution:
    price: float
    k_eff: int
    allocations: tuple[float, ...]
    revenue: float


def single_price(market: Market, k: int) -> float:
    """Market-clearing common price when the top ``k`` groups buy."""
    if not 1 <= k <= market.size:
        raise MarketError(f"k={k} outside 1..{market.size}")
    top = market.groups[:k]
    return math.fsum(g.n * g.theta for g in top) / (market.supply + sum(g.n for g in top))


def solve_sp(market: Market, eps: float = EPS) -> SpSolution:
    thetas = market.thetas
    if market.supply == 0:
        return SpSolution(thetas[0], 0, (0.0,) * market.size, 0.0)
    k = market.size
    price = single_price(market, k)
    while k > 1 and thetas[k - 1] <= price + eps:
        k -= 1
        price = single_price(market, k)
    allocations = tuple(
        t / price - 1.0 if i < k else 0.0 for i, t in enumerate(thetas)
    )
    revenue = price * math.fsum(g.n * s for g, s in zip(market.groups, allocations))
    return SpSolution(price, k, allocations, revenue)


def sp_revenue_decomposition(market: Market, sol: SpSolution) -> RevenueDecomposition:
    """Single-pricing revenue from effective-market averages (no dispersion term)."""
    k = sol.k_eff
    if k == 0:
        return RevenueDecomposition(0, 0.0, 0.0, 0.0, 0.0)
    top = market.groups[:k]
    n_eff = sum(g.n for g in top)
    s_bar = market.supply / n_eff
    theta_bar = math.fsum(g.n * g.theta for g in top) / n_eff
    return RevenueDecomposition(n_eff, s_bar, theta_bar, 0.0, n_eff * s_bar * theta_bar / (s_bar + 1.0))


@dataclass(frozen=True)
class ComparisonReport:
    """Group-by-group comparison of CP against the single price.

    ``cp_price_higher[i]`` is True when group ``i`` pays at least ``p*`` under
    CP; ``cp_alloc_lower[i]`` when it gets no more resource than under SP. Both
    are ``None`` for a group sitting on the crossing value within tolerance.
    ``crossing_index`` is 1-based.
    """

    k_cp: int
    k_sp: int
    crossing_theta: float
    crossing_index: int
    cp_price_higher: tuple[bool | None, ...]
    cp_alloc_lower: tuple[bool | None, ...]


def compare_cp_sp(market: Market, eps: float = EPS) -> ComparisonReport:
    if market.supply <= 0:
        raise MarketError("comparison needs positive supply")
    cp = solve_cp(market, eps)
    sp = solve_sp(market, eps)
    # CP allocation sqrt(theta/lam) - 1 equals SP allocation theta/p - 1 at theta = p^2/lam.
    crossing = sp.price**2 / cp.lambda_star
    crossing_index = 1
    for i in range(sp.k_eff):
        if market.groups[i].theta >= crossing - eps:
            crossing_index = i + 1
    price_higher: list[bool | None] = []
    alloc_lower: list[bool | None] = []
    for i, g in enumerate(market.groups):
        if abs(g.theta - crossing) <= eps:
            price_higher.append(None)
            alloc_lower.append(None)
        else:
            price_higher.append(cp.prices[i] >= sp.price)
            alloc_lower.append(cp.allocations[i] <= sp.allocations[i])
    return ComparisonReport(
        k_cp=cp.k_eff,
        k_sp=sp.k_eff,
        crossing_theta=crossing,
        crossing_index=crossing_index,
        cp_price_higher=tuple(price_higher),
        cp_alloc_lower=tuple(alloc_lower),
    )
