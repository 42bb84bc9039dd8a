"""Market primitives: user groups, markets and the follower best response.

Users in group ``i`` get utility ``theta_i * ln(1 + s)`` from ``s`` units of
resource and pay ``p * s`` for it. Everything here is an immutable value type
or a pure function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from numbers import Integral, Real
from typing import Any, Iterable

# Absolute tolerance for threshold comparisons (theta vs. water level, etc.).
EPS = 1e-9


class MarketError(ValueError):
    """Invalid market or group parameters."""


class DuplicateThetaError(MarketError):
    """Two groups share the same willingness to pay."""

    def __init__(self, first: int, second: int, theta: float):
        self.first = first
        self.second = second
        self.theta = theta
        super().__init__(
            f"duplicate willingness to pay theta={theta!r} in group entries "
            f"{first} and {second}; merge them (sum n) before building the market"
        )


def _as_count(n: Any) -> int:
    if isinstance(n, bool):
        raise MarketError(f"group size must be an integer, got {n!r}")
    if isinstance(n, Integral):
        return int(n)
    if isinstance(n, Real) and float(n).is_integer():
        return int(n)
    raise MarketError(f"group size must be an integer, got {n!r}")


@dataclass(frozen=True)
class Group:
    """A class of ``n`` identical users with willingness to pay ``theta``."""

    theta: float
    n: int

    def __post_init__(self) -> None:
        theta = float(self.theta)
        if not math.isfinite(theta) or theta <= 0:
            raise MarketError(f"theta must be positive and finite, got {self.theta!r}")
        n = _as_count(self.n)
        if n < 1:
            raise MarketError(f"group size must be >= 1, got {self.n!r}")
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "n", n)


@dataclass(frozen=True)
class Market:
    """Groups ordered by strictly decreasing ``theta`` plus total supply ``S``.

    Use :func:`validate_market` to build one from unsorted input.
    """

    groups: tuple[Group, ...]
    supply: float

    def __post_init__(self) -> None:
        groups = tuple(self.groups)
        if not groups:
            raise MarketError("market needs at least one group")
        for a, b in zip(groups, groups[1:]):
            if not a.theta > b.theta:
                raise MarketError(
                    "groups must be strictly decreasing in theta "
                    f"(got {a.theta!r} before {b.theta!r})"
                )
        supply = float(self.supply)
        if not math.isfinite(supply) or supply < 0:
            raise MarketError(f"supply must be finite and >= 0, got {self.supply!r}")
        object.__setattr__(self, "groups", groups)
        object.__setattr__(self, "supply", supply)

    @property
    def size(self) -> int:
        return len(self.groups)

    @property
    def thetas(self) -> tuple[float, ...]:
        return tuple(g.theta for g in self.groups)

    @property
    def counts(self) -> tuple[int, ...]:
        return tuple(g.n for g in self.groups)

    def with_supply(self, supply: float) -> Market:
        return Market(self.groups, supply)

    def prefix(self, k: int) -> Market:
        """The market restricted to the ``k`` highest-theta groups."""
        if not 1 <= k <= self.size:
            raise MarketError(f"prefix length {k} outside 1..{self.size}")
        return Market(self.groups[:k], self.supply)


def _coerce_group(item: Any) -> Group:
    if isinstance(item, Group):
        return item
    if isinstance(item, dict):
        return Group(item["theta"], item["n"])
    theta, n = item
    return Group(theta, n)


def validate_market(groups: Iterable[Any], supply: float) -> Market:
    """Build a :class:`Market`, sorting groups by decreasing ``theta``.

    ``groups`` may hold :class:`Group` objects, ``(theta, n)`` pairs or
    ``{"theta": .., "n": ..}`` mappings. Duplicate thetas raise
    :class:`DuplicateThetaError` naming both entries (0-based input order).
    """
    parsed = [_coerce_group(g) for g in groups]
    if not parsed:
        raise MarketError("market needs at least one group")
    seen: dict[float, int] = {}
    for idx, g in enumerate(parsed):
        if g.theta in seen:
            raise DuplicateThetaError(seen[g.theta], idx, g.theta)
        seen[g.theta] = idx
    ordered = sorted(parsed, key=lambda g: g.theta, reverse=True)
    return Market(tuple(ordered), supply)


@dataclass(frozen=True)
class DemandResult:
    quantity: float
    surplus: float


def utility(theta: float, s: float) -> float:
    if theta <= 0:
        raise MarketError(f"theta must be positive, got {theta!r}")
    if s < 0:
        raise MarketError(f"quantity must be nonnegative, got {s!r}")
    return theta * math.log1p(s)


def surplus_at(theta: float, s: float, price: float) -> float:
    """Utility minus payment when buying ``s`` units at unit price ``price``."""
    return utility(theta, s) - price * s


def demand(theta: float, price: float) -> DemandResult:
    """Surplus-maximizing quantity ``(theta/p - 1)^+`` and the surplus it yields."""
    if price <= 0:
        raise MarketError(f"price must be positive, got {price!r}")
    quantity = max(theta / price - 1.0, 0.0)
    return DemandResult(quantity, surplus_at(theta, quantity, price))

