"""Brute-force reference solutions.

Nothing here calls into the solvers. Each routine attacks the same question
by a different route (bisection instead of closed forms, grids instead of
threshold searches, unrestricted set partitions instead of consecutive runs)
and is meant for tests and ``verify``, not for speed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from more_itertools import set_partitions
from scipy.optimize import bisect

from .iccp import PriceMenu
from .market import Market


class OracleCapError(ValueError):
    """Input too large for exhaustive search."""


@dataclass(frozen=True)
class OracleConfig:
    grid_points: int = 100_000
    max_groups: int = 12
    max_prices: int = 4


def _water_residual(lam: float, thetas, counts, supply) -> float:
    return math.fsum(n * max(math.sqrt(t / lam) - 1.0, 0.0) for t, n in zip(thetas, counts)) - supply


def brute_lambda_bisection(market: Market) -> float:
    """Solve ``sum_i N_i (sqrt(theta_i/lam) - 1)^+ = S`` for ``lam`` by bisection."""
    if market.supply <= 0:
        raise ValueError("bisection needs positive supply")
    thetas, counts, supply = market.thetas, market.counts, market.supply
    total = sum(counts)
    # At lo every group demands at least sqrt(2)(1 + S/N) - 1 each, which overshoots S.
    lo = thetas[-1] / (2.0 * (1.0 + supply / total) ** 2)
    hi = thetas[0]
    return bisect(_water_residual, lo, hi, args=(thetas, counts, supply), xtol=1e-300, rtol=1e-15, maxiter=4000)


def price_grid_bounds(market: Market) -> tuple[float, float]:
    # The optimal single price is at least theta_I / (S + 1) since every N_i >= 1.
    low = market.thetas[-1] * min(1e-3, 0.5 / (market.supply + 1.0))
    return low, market.thetas[0]


def brute_best_single_price(market: Market, grid_points: int = 100_000) -> tuple[float, float]:
    """Best single price on a log grid, skipping prices whose demand exceeds supply."""
    if grid_points < 1000:
        raise ValueError("grid_points must be at least 1000")
    lo, hi = price_grid_bounds(market)
    prices = np.geomspace(lo, hi, grid_points)
    thetas = np.asarray(market.thetas)[:, None]
    counts = np.asarray(market.counts, dtype=float)[:, None]
    demand = (counts * np.maximum(thetas / prices - 1.0, 0.0)).sum(axis=0)
    revenue = np.where(demand <= market.supply, prices * demand, -np.inf)
    best = int(np.argmax(revenue))
    return float(prices[best]), float(revenue[best])


def single_price_grid_error(market: Market, price: float, grid_points: int = 100_000) -> float:
    """Upper bound on how far the grid optimum can fall below the true optimum.

    Above the optimum, revenue falls with slope at most ``sum N_i``; the grid
    point just above ``price`` is within one log step of it.
    """
    lo, hi = price_grid_bounds(market)
    step = (math.log(hi) - math.log(lo)) / (grid_points - 1)
    return sum(market.counts) * price * math.expm1(step)


@dataclass(frozen=True)
class ExhaustiveResult:
    """Global PP optimum over every served subset and every set partition of it.

    ``clusters`` and ``served`` use 0-based group indices.
    """

    revenue: float
    clusters: tuple[tuple[int, ...], ...]
    served: tuple[int, ...]
    candidates: int

    @property
    def is_consecutive(self) -> bool:
        return all(c == tuple(range(c[0], c[-1] + 1)) for c in self.clusters)

    @property
    def is_prefix(self) -> bool:
        return self.served == tuple(range(len(self.served)))


def _partition_revenue(thetas, counts, supply, blocks) -> float | None:
    sizes = [sum(counts[i] for i in b) for b in blocks]
    avgs = [math.fsum(counts[i] * thetas[i] for i in b) / n for b, n in zip(blocks, sizes)]
    served_n = sum(sizes)
    v = math.fsum(n * math.sqrt(a) for n, a in zip(sizes, avgs))
    lam = (v / (supply + served_n)) ** 2
    prices = [math.sqrt(a * lam) for a in avgs]
    if not all(thetas[i] > p for b, p in zip(blocks, prices) for i in b):
        return None
    # Direct payment sum at the water-filling prices.
    return math.fsum(counts[i] * p * (thetas[i] / p - 1.0) for b, p in zip(blocks, prices) for i in b)


def brute_pp_exhaustive(market: Market, j: int, config: OracleConfig = OracleConfig()) -> ExhaustiveResult:
    """Best revenue with at most ``j`` prices, searching all subsets and all set partitions.

    For a fixed served set and partition, revenue is maximized by the
    super-group water-filling prices; a candidate counts only if every served
    group buys a positive amount at its price. Near-ties prefer a consecutive
    prefix so a reported non-consecutive optimum is a strict one.
    """
    size = market.size
    if size > config.max_groups:
        raise OracleCapError(f"{size} groups exceeds the exhaustive cap {config.max_groups}")
    if not 1 <= j <= config.max_prices:
        raise OracleCapError(f"j={j} outside 1..{config.max_prices}")
    if market.supply <= 0:
        raise ValueError("exhaustive search needs positive supply")
    thetas, counts, supply = market.thetas, market.counts, market.supply
    best: ExhaustiveResult | None = None
    seen = 0
    for mask in range(1, 1 << size):
        served = tuple(i for i in range(size) if mask >> i & 1)
        for parts in range(1, min(j, len(served)) + 1):
            for blocks in set_partitions(served, parts):
                seen += 1
                rev = _partition_revenue(thetas, counts, supply, blocks)
                if rev is None:
                    continue
                cand = ExhaustiveResult(rev, tuple(sorted(tuple(b) for b in blocks)), served, 0)
                if best is None or rev > best.revenue * (1 + 1e-12):
                    best = cand
                elif (
                    rev >= best.revenue * (1 - 1e-12)
                    and cand.is_consecutive
                    and cand.is_prefix
                    and not (best.is_consecutive and best.is_prefix)
                ):
                    best = cand
    assert best is not None  # the top group alone is always admissible
    return ExhaustiveResult(best.revenue, best.clusters, best.served, seen)


def brute_user_best_response(
    menu: PriceMenu, theta: float, s_max: float | None = None, grid_points: int = 200_001
) -> tuple[int | None, float, float]:
    """Grid search over quantities for a user facing ``menu``.

    Returns ``(step, quantity, surplus)``; step is ``None`` when buying
    nothing is best.
    """
    if s_max is None:
        top = max(menu.thresholds, default=0.0)
        s_max = 2.0 * max(theta / menu.prices[-1] - 1.0, top, 0.5)
    best: tuple[int | None, float, float] = (None, 0.0, 0.0)
    steps = menu.steps
    for idx in range(1, grid_points + 1):
        s = s_max * idx / grid_points
        for q, (p, lo, hi) in enumerate(steps):
            if lo < s <= hi:
                u = theta * math.log1p(s) - p * s
                if u > best[2]:
                    best = (q, s, u)
                break
    return best
