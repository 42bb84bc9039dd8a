"""Partial price differentiation: at most ``J`` distinct prices.

Groups sharing a price form a cluster. For a fixed effective market
``1..k`` and a partition into clusters, each cluster behaves like one
super-group (population ``N^j``, average willingness to pay ``theta^j``) and
revenue is

    sum_{i<=k} N_i theta_i - (sum_j N^j sqrt(theta^j))**2 / (S + sum_{i<=k} N_i)

so the best partition for a given ``k`` minimizes ``sum_j N^j sqrt(theta^j)``.
Only partitions into runs of consecutive groups need to be searched.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterator, Literal, Sequence

from .cp import effective_threshold, solve_cp
from .market import EPS, Group, Market, MarketError
from .sp import solve_sp

KSearch = Literal["best", "first-feasible"]


@dataclass(frozen=True)
class Partition:
    """``k`` leading groups split into consecutive, nonempty clusters.

    ``boundaries`` are the 0-based start indices of clusters 2..J, so
    ``Partition(k=5, boundaries=(1, 3))`` is ``{0} | {1, 2} | {3, 4}``.
    """

    k: int
    boundaries: tuple[int, ...]

    def __post_init__(self) -> None:
        b = tuple(self.boundaries)
        if self.k < 1:
            raise ValueError("partition must cover at least one group")
        if any(not 0 < x < self.k for x in b) or any(x >= y for x, y in zip(b, b[1:])):
            raise ValueError(f"invalid cut positions {b} for k={self.k}")
        object.__setattr__(self, "boundaries", b)

    @property
    def j(self) -> int:
        return len(self.boundaries) + 1

    @property
    def clusters(self) -> tuple[range, ...]:
        edges = (0, *self.boundaries, self.k)
        return tuple(range(a, b) for a, b in zip(edges, edges[1:]))

    @property
    def cluster_of(self) -> tuple[int, ...]:
        return tuple(j for j, c in enumerate(self.clusters) for _ in c)


@dataclass(frozen=True)
class SuperGroup:
    n_total: int
    theta_avg: float


@dataclass(frozen=True)
class PpSolution:
    j_prices: int
    j_used: int
    k_eff: int
    partition: Partition | None
    supergroups: tuple[SuperGroup, ...]
    lam: float
    cluster_prices: tuple[float, ...]
    group_prices: tuple[float, ...]
    allocations: tuple[float, ...]
    revenue: float


def _merge(groups: Sequence[Group]) -> SuperGroup:
    n = sum(g.n for g in groups)
    return SuperGroup(n, math.fsum(g.n * g.theta for g in groups) / n)


def aggregate_supergroup(
    market: Market, cluster: Sequence[int], budget: float, eps: float = EPS
) -> tuple[SuperGroup, float]:
    """Collapse one cluster under a single price and resource budget.

    The cluster is solved as a single-pricing market with supply ``budget``;
    only its effective groups enter the super-group. Returns the super-group and
    the cluster revenue ``budget * N^j * theta^j / (budget + N^j)``.
    """
    idx = sorted(cluster)
    if not idx:
        raise ValueError("cluster must be nonempty")
    if budget < 0:
        raise ValueError(f"budget must be >= 0, got {budget!r}")
    sub = Market(tuple(market.groups[i] for i in idx), budget)
    sol = solve_sp(sub, eps)
    k_j = max(sol.k_eff, 1)
    sg = _merge(sub.groups[:k_j])
    return sg, budget * sg.n_total * sg.theta_avg / (budget + sg.n_total)


def enumerate_consecutive_partitions(k: int, j: int) -> Iterator[Partition]:
    """All ``C(k-1, j-1)`` ways to cut groups ``0..k-1`` into ``j`` runs, lexicographically."""
    if j < 1 or j > k:
        return
    for cuts in itertools.combinations(range(1, k), j - 1):
        yield Partition(k, cuts)


def partition_count_unrestricted(i: int, j: int) -> int:
    """Stirling number of the second kind: set partitions of ``i`` items into ``j`` blocks."""
    if not 1 <= j <= i:
        raise ValueError(f"need 1 <= j <= i, got i={i}, j={j}")
    if i > 1000:
        raise ValueError("i > 1000 not supported")
    total = sum((-1) ** (j + t) * math.comb(j, t) * t**i for t in range(1, j + 1))
    return total // math.factorial(j)


@dataclass(frozen=True)
class Level1Result:
    partition: Partition
    value: float
    lam: float
    supergroups: tuple[SuperGroup, ...]


def solve_level1(market: Market, k: int, j: int, eps: float = EPS) -> Level1Result | None:
    """Best consecutive partition of groups ``0..k-1`` into ``j`` clusters.

    Minimizes ``v = sum_j N^j sqrt(theta^j)`` among partitions where every
    group keeps a strictly positive demand at its cluster price. Ties keep the
    lexicographically first partition. ``None`` when no partition qualifies.
    """
    if not 1 <= j <= k <= market.size:
        raise ValueError(f"need 1 <= j <= k <= {market.size}, got j={j}, k={k}")
    groups = market.groups
    denom = market.supply + sum(g.n for g in groups[:k])
    best: Level1Result | None = None
    for part in enumerate_consecutive_partitions(k, j):
        sgs = tuple(_merge(groups[c.start : c.stop]) for c in part.clusters)
        v = math.fsum(sg.n_total * math.sqrt(sg.theta_avg) for sg in sgs)
        lam = (v / denom) ** 2
        # The lowest group of each cluster must still buy at that cluster's price.
        if all(
            groups[c.stop - 1].theta > math.sqrt(sg.theta_avg * lam) + eps
            for c, sg in zip(part.clusters, sgs)
        ):
            if best is None or v < best.value * (1 - 1e-15):
                best = Level1Result(part, v, lam, sgs)
    return best


def _pp_revenue(market: Market, k: int, value: float) -> float:
    top = market.groups[:k]
    return math.fsum(g.n * g.theta for g in top) - value**2 / (
        market.supply + sum(g.n for g in top)
    )


def solve_pp(market: Market, j: int, eps: float = EPS, k_search: KSearch = "best") -> PpSolution:
    """Optimal tariff with at most ``j`` prices.

    Candidate effective markets ``k`` run from the CP threshold downwards and
    the best consecutive partition is found for each. ``k_search="best"``
    keeps the highest-revenue candidate. ``"first-feasible"`` stops at the
    largest ``k`` with any admissible partition; that shortcut can miss the
    optimum and is kept only to reproduce published curves.

    ``j`` larger than the effective market is capped; ``j_used`` records the
    number of prices actually charged.
    """
    if j < 1 or j > market.size:
        raise ValueError(f"number of prices must be in 1..{market.size}, got {j}")
    if k_search not in ("best", "first-feasible"):
        raise ValueError(f"unknown k_search {k_search!r}")
    thetas = market.thetas
    if market.supply == 0:
        return PpSolution(j, 0, 0, None, (), thetas[0], (), thetas, (0.0,) * market.size, 0.0)

    k_cp, _ = effective_threshold(market, eps)
    chosen: tuple[int, Level1Result] | None = None
    best_rev = -math.inf
    for k in range(k_cp, 0, -1):
        res = solve_level1(market, k, min(j, k), eps)
        if res is None:
            continue
        rev = _pp_revenue(market, k, res.value)
        if rev > best_rev:
            chosen, best_rev = (k, res), rev
        if k_search == "first-feasible":
            break
    if chosen is None:  # k = 1 with one cluster is always admissible for S > 0
        raise RuntimeError("no admissible partition found")

    k, res = chosen
    # Price the super-groups with the CP water-filling; all of them are effective.
    super_market = Market(tuple(Group(sg.theta_avg, sg.n_total) for sg in res.supergroups), market.supply)
    cp = solve_cp(super_market, eps)
    if cp.k_eff != len(res.supergroups):
        raise RuntimeError("super-group water-filling dropped a cluster")
    cluster_of = res.partition.cluster_of
    group_prices = list(thetas)
    allocations = [0.0] * market.size
    for i in range(k):
        p = cp.prices[cluster_of[i]]
        group_prices[i] = p
        allocations[i] = thetas[i] / p - 1.0
    revenue = math.fsum(
        g.n * p * s for g, p, s in zip(market.groups, group_prices, allocations)
    )
    return PpSolution(
        j_prices=j,
        j_used=res.partition.j,
        k_eff=k,
        partition=res.partition,
        supergroups=res.supergroups,
        lam=cp.lambda_star,
        cluster_prices=cp.prices,
        group_prices=tuple(group_prices),
        allocations=tuple(allocations),
        revenue=revenue,
    )


def pp_revenue_identity(market: Market, sol: PpSolution) -> float:
    """Closed-form revenue of a PP solution from its super-groups."""
    if sol.k_eff == 0:
        return 0.0
    v = math.fsum(sg.n_total * math.sqrt(sg.theta_avg) for sg in sol.supergroups)
    return _pp_revenue(market, sol.k_eff, v)
