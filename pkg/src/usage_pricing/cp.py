"""Complete price differentiation: one price per group.

The provider's problem reduces to a weighted water-filling over groups. Since
the groups are sorted by willingness to pay, the multiplier has a closed form
once the number of served groups ``k`` is known, and ``k`` is found by
walking down from ``I``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .market import EPS, Market, MarketError


@dataclass(frozen=True)
class CpSolution:
    lambda_star: float
    k_eff: int
    prices: tuple[float, ...]
    allocations: tuple[float, ...]
    admitted: tuple[int, ...]
    revenue: float


def water_fill_lambda(market: Market, k: int) -> float:
    """Multiplier when exactly the top ``k`` groups are served.

    ``(sum_{i<=k} N_i sqrt(theta_i) / (S + sum_{i<=k} N_i))**2``
    """
    if not 1 <= k <= market.size:
        raise MarketError(f"k={k} outside 1..{market.size}")
    top = market.groups[:k]
    num = math.fsum(g.n * math.sqrt(g.theta) for g in top)
    den = market.supply + sum(g.n for g in top)
    return (num / den) ** 2


def effective_threshold(market: Market, eps: float = EPS) -> tuple[int, float]:
    """Largest ``k`` whose lowest group still sits strictly above the water level."""
    k = market.size
    lam = water_fill_lambda(market, k)
    # k=1 always qualifies for S > 0: theta_1 > theta_1 * (N_1 / (S + N_1))**2.
    while k > 1 and market.groups[k - 1].theta <= lam + eps:
        k -= 1
        lam = water_fill_lambda(market, k)
    return k, lam


def solve_cp(market: Market, eps: float = EPS) -> CpSolution:
    """Revenue-maximizing per-group prices and allocations.

    With ``S = 0`` nobody is served: ``k_eff = 0``, prices equal ``theta`` and
    ``lambda_star`` is reported as ``theta_1`` (the level at which the top group
    stops buying).
    """
    thetas = market.thetas
    if market.supply == 0:
        return CpSolution(
            lambda_star=thetas[0],
            k_eff=0,
            prices=thetas,
            allocations=(0.0,) * market.size,
            admitted=market.counts,
            revenue=0.0,
        )
    k, lam = effective_threshold(market, eps)
    prices = []
    allocations = []
    for i, g in enumerate(market.groups):
        if i < k:
            prices.append(math.sqrt(g.theta * lam))
            allocations.append(math.sqrt(g.theta / lam) - 1.0)
        else:
            prices.append(g.theta)
            allocations.append(0.0)
    revenue = math.fsum(g.n * p * s for g, p, s in zip(market.groups, prices, allocations))
    return CpSolution(
        lambda_star=lam,
        k_eff=k,
        prices=tuple(prices),
        allocations=tuple(allocations),
        admitted=market.counts,
        revenue=revenue,
    )


@dataclass(frozen=True)
class RevenueDecomposition:
    """Revenue written as a common part plus a price-dispersion term.

    ``revenue = n_eff * (s_bar * theta_bar + gain) / (s_bar + 1)``; ``gain`` is
    zero for single pricing.
    """

    n_eff: int
    s_bar: float
    theta_bar: float
    gain: float
    revenue: float


def cp_revenue_decomposition(market: Market, sol: CpSolution) -> RevenueDecomposition:
    """Rebuild CP revenue from effective-market averages and the differentiation gain."""
    if len(sol.prices) != market.size or len(sol.allocations) != market.size:
        raise MarketError("solution does not match the market's group count")
    k = sol.k_eff
    if k == 0:
        return RevenueDecomposition(0, 0.0, 0.0, 0.0, 0.0)
    lam = water_fill_lambda(market, k)
    if not math.isclose(lam, sol.lambda_star, rel_tol=1e-9, abs_tol=0.0):
        raise MarketError("solution multiplier does not match this market")
    top = market.groups[:k]
    n_eff = sum(g.n for g in top)
    gamma = [g.n / n_eff for g in top]
    s_bar = market.supply / n_eff
    theta_bar = math.fsum(w * g.theta for w, g in zip(gamma, top))
    p = sol.prices[:k]
    gain = math.fsum(
        gamma[i] * gamma[j] * (p[i] - p[j]) ** 2 for i in range(k) for j in range(i + 1, k)
    ) / sol.lambda_star
    revenue = n_eff * (s_bar * theta_bar + gain) / (s_bar + 1.0)
    return RevenueDecomposition(n_eff, s_bar, theta_bar, gain, revenue)
