"""Incentive-compatible quantity-based price menu (incomplete information).

The provider cannot tell groups apart, so it posts the CP prices as a step
tariff in purchased quantity: larger purchases pay a higher unit price. Each
threshold must be high enough for group ``q`` to buy its CP quantity at its
own price, and low enough that a higher-theta group gains nothing by buying a
small quantity at the cheaper step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

from scipy.optimize import bisect

from .cp import CpSolution
from .market import Market, surplus_at

ROOT_TOL = 1e-10
# Bracket for t_q; every root lies below T_ROOT ~ 2.21846 < 2.5.
T_BRACKET = (1.0 + 1e-9, 2.5)
# Surplus ties within this margin resolve toward the higher-price step.
SURPLUS_TIE = 1e-12


class IcInfeasibleError(ValueError):
    """The CP prices cannot be separated by a quantity menu without revenue loss."""

    def __init__(self, q: int, margin: float, message: str | None = None):
        self.q = q
        self.margin = margin
        super().__init__(message or f"threshold condition violated at q={q} (margin {margin:.6g})")


class IcConsistencyError(RuntimeError):
    """A root bracket that should always exist did not."""


def _base_gap(t: float) -> float:
    return t * t * math.log(t) - (t * t - 1.0)


def _t_root() -> float:
    return bisect(_base_gap, 1.5, 3.0, xtol=1e-14, maxiter=200)


T_ROOT = _t_root()


def threshold_function(t: float, n_upper: float, n_next: float, denom: float) -> float:
    """``g(t) = t^2 ln t - (t^2 - 1) + (t n_upper + n_next) / denom * (t - 1)``."""
    return _base_gap(t) + (t * n_upper + n_next) / denom * (t - 1.0)


@dataclass(frozen=True)
class PriceMenu:
    """Step tariff: unit price by purchased quantity.

    ``prices[q]`` applies on ``(thresholds[q], thresholds[q-1]]`` with
    ``thresholds[-1] = inf`` for the top step and ``thresholds[K-1] = 0`` for
    the bottom one. Prices strictly decrease and so do thresholds.
    """

    prices: tuple[float, ...]
    thresholds: tuple[float, ...]

    def __post_init__(self) -> None:
        if not self.prices:
            raise ValueError("menu needs at least one price")
        if len(self.thresholds) != len(self.prices) - 1:
            raise ValueError("need exactly one threshold between consecutive prices")
        if any(a <= b for a, b in zip(self.prices, self.prices[1:])):
            raise ValueError("menu prices must be strictly decreasing")
        if any(a <= b for a, b in zip(self.thresholds, self.thresholds[1:])) or any(
            t <= 0 for t in self.thresholds
        ):
            raise ValueError("thresholds must be positive and strictly decreasing")

    @property
    def steps(self) -> tuple[tuple[float, float, float], ...]:
        """``(price, lower, upper)`` per step; lower bound exclusive, upper inclusive."""
        uppers = (math.inf, *self.thresholds)
        lowers = (*self.thresholds, 0.0)
        return tuple(zip(self.prices, lowers, uppers))

    def step_of(self, s: float) -> int | None:
        if s <= 0:
            return None
        for q, (_, lo, hi) in enumerate(self.steps):
            if lo < s <= hi:
                return q
        raise AssertionError("unreachable: steps tile (0, inf)")

    def price_at(self, s: float) -> float:
        q = self.step_of(s)
        return 0.0 if q is None else self.prices[q]


def indifference_quantity(theta: float, p_own: float, p_lower: float, s_own: float) -> float:
    """Quantity below ``s_own`` where buying at ``p_lower`` matches the CP surplus.

    Smaller root of ``theta ln(1+s) - p_lower s = U(s_own; p_own)``.
    """
    if not p_lower < p_own:
        if p_lower == p_own:
            return s_own
        raise ValueError("p_lower must not exceed p_own")
    if not theta > p_own:
        raise ValueError("group must be effective (theta > own price)")
    target = surplus_at(theta, s_own, p_own)

    def f(s: float) -> float:
        return theta * math.log1p(s) - p_lower * s - target

    lo, hi = 0.0, s_own
    if not (f(lo) < 0 < f(hi)):
        raise IcConsistencyError(
            f"no sign change for theta={theta}, p_own={p_own}, p_lower={p_lower}, s_own={s_own}"
        )
    return bisect(f, lo, hi, xtol=ROOT_TOL, maxiter=500)


@dataclass(frozen=True)
class IcFeasibility:
    t_thresholds: tuple[float, ...]
    ratios: tuple[float, ...]
    margins: tuple[float, ...]
    feasible: bool


def feasibility_thresholds(market: Market, cp: CpSolution) -> IcFeasibility:
    """Sufficient condition ``sqrt(theta_q / theta_{q+1}) >= t_q`` for every adjacent pair.

    Exact for two effective groups, sufficient only beyond that.
    """
    k = cp.k_eff
    if k < 2:
        return IcFeasibility((), (), (), True)
    counts = market.counts
    denom = market.supply + sum(counts[:k])
    ts, ratios = [], []
    n_upper = 0
    for q in range(k - 1):
        n_upper += counts[q]
        n_next = counts[q + 1]
        t = bisect(
            threshold_function, *T_BRACKET, args=(n_upper, n_next, denom), xtol=ROOT_TOL, maxiter=500
        )
        ts.append(t)
        ratios.append(math.sqrt(market.groups[q].theta / market.groups[q + 1].theta))
    margins = tuple(r - t for r, t in zip(ratios, ts))
    return IcFeasibility(tuple(ts), tuple(ratios), margins, all(m >= 0 for m in margins))


def admissible_bands(market: Market, cp: CpSolution) -> list[tuple[float, float]]:
    """``[s*_q, min_{i<q} s_{i->q}]`` for q = 2..K (0-based q = 1..K-1)."""
    bands = []
    g = market.groups
    for q in range(1, cp.k_eff):
        upper = min(
            indifference_quantity(g[i].theta, cp.prices[i], cp.prices[q], cp.allocations[i])
            for i in range(q)
        )
        bands.append((cp.allocations[q], upper))
    return bands


def build_menu(
    market: Market, cp: CpSolution, placement: Literal["tight", "midpoint"] = "tight"
) -> PriceMenu:
    """Quantity menu that reproduces the CP outcome under self-selection.

    ``placement="tight"`` puts each threshold at the cheaper group's own CP
    quantity; ``"midpoint"`` centres it in the admissible band. Raises
    :class:`IcInfeasibleError` when the threshold condition fails or a band is
    empty.
    """
    if cp.k_eff == 0:
        raise ValueError("no effective groups to build a menu for")
    report = feasibility_thresholds(market, cp)
    for q, m in enumerate(report.margins):
        if m < 0:
            raise IcInfeasibleError(q + 1, m)
    thresholds = []
    for q, (lo, hi) in enumerate(admissible_bands(market, cp), start=1):
        if lo > hi:
            raise IcInfeasibleError(q, hi - lo, f"empty threshold band for step {q + 1}")
        thresholds.append(lo if placement == "tight" else 0.5 * (lo + hi))
    return PriceMenu(tuple(cp.prices[: cp.k_eff]), tuple(thresholds))


@dataclass(frozen=True)
class SelectionReport:
    """Each group's best response to a menu (0-based step, ``None`` = buys nothing)."""

    steps: tuple[int | None, ...]
    quantities: tuple[float, ...]
    surpluses: tuple[float, ...]
    intended_surpluses: tuple[float, ...]
    revenue: float
    compatible: bool


def best_response(menu: PriceMenu, theta: float) -> tuple[int | None, float, float]:
    """Surplus-maximizing ``(step, quantity, surplus)`` over the whole menu."""
    best: tuple[int | None, float, float] = (None, 0.0, 0.0)
    for q, (p, lo, hi) in enumerate(menu.steps):
        s = min(max(theta / p - 1.0, lo), hi)
        if s <= 0:
            continue
        u = surplus_at(theta, s, p)
        if u > best[2] + SURPLUS_TIE:
            best = (q, s, u)
    return best


def simulate_self_selection(
    menu: PriceMenu, market: Market, cp: CpSolution, tol: float = 1e-8
) -> SelectionReport:
    steps, quantities, surpluses, intended = [], [], [], []
    compatible = True
    for i, g in enumerate(market.groups):
        q, s, u = best_response(menu, g.theta)
        steps.append(q)
        quantities.append(s)
        surpluses.append(u)
        if i < cp.k_eff:
            intended.append(surplus_at(g.theta, cp.allocations[i], cp.prices[i]))
            ok = q == i and abs(s - cp.allocations[i]) <= tol
        else:
            intended.append(0.0)
            ok = s == 0.0
        compatible = compatible and ok
    revenue = math.fsum(
        g.n * menu.prices[q] * s for g, q, s in zip(market.groups, steps, quantities) if q is not None
    )
    return SelectionReport(
        tuple(steps), tuple(quantities), tuple(surpluses), tuple(intended), revenue, compatible
    )
