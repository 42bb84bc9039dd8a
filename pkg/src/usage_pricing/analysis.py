"""Revenue-gain analysis: the two-group closed form and resource sweeps."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Literal, Sequence

from .market import EPS, Market
from .pp import KSearch, solve_pp
from .sp import solve_sp

Region = Literal["increasing", "decreasing", "zero"]

# Curves count as separated once the relative revenue gap stays above this
# for SEPARATION_RUN consecutive samples.
SEPARATION_TOL = 1e-6
SEPARATION_RUN = 3
# Relative gains below this are cancellation noise, not a real gain.
PEAK_FLOOR = 1e-9


@dataclass(frozen=True)
class GainPoint:
    t: float
    alpha: float
    s_bar: float
    gain: float
    region: Region


def _check_domain(alpha: float, s_bar: float, t: float | None = None) -> None:
    if t is not None and not t > 1:
        raise ValueError(f"t must exceed 1, got {t!r}")
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha!r}")
    if not s_bar > 0:
        raise ValueError(f"s_bar must be positive, got {s_bar!r}")


def gain_two_group(t: float, alpha: float, s_bar: float) -> GainPoint:
    """CP-over-SP revenue gain for two groups.

    ``t = sqrt(theta_1/theta_2)``, ``alpha = N_1/N`` and ``s_bar = S/N``.
    """
    _check_domain(alpha, s_bar, t)
    ratio = (s_bar + alpha) / alpha
    if t < math.sqrt(ratio):
        g = alpha * (1 - alpha) * (t - 1) ** 2 / (s_bar * (1 + alpha * (t * t - 1)))
        return GainPoint(t, alpha, s_bar, g, "increasing")
    if t < ratio:
        g = (1 - alpha) * (s_bar + alpha - t * alpha) ** 2 / (alpha * s_bar * (1 + s_bar) * t * t)
        return GainPoint(t, alpha, s_bar, g, "decreasing")
    return GainPoint(t, alpha, s_bar, 0.0, "zero")


def gain_max(alpha: float, s_bar: float) -> tuple[float, float]:
    """Peak location ``t`` and peak value of :func:`gain_two_group` over ``t``.

    The peak sits where the low group just drops out of the single-price market.
    """
    _check_domain(alpha, s_bar)
    t_peak = math.sqrt((s_bar + alpha) / alpha)
    g = (1 - alpha) * (math.sqrt(s_bar + alpha) - math.sqrt(alpha)) ** 2 / (s_bar * (1 + s_bar))
    return t_peak, g


def relative_gain(revenue: float, sp_revenue: float) -> float:
    return 0.0 if sp_revenue <= 0 else (revenue - sp_revenue) / sp_revenue


@dataclass(frozen=True)
class GainSample:
    supply: float
    revenue: float
    gain: float
    k_eff: int


@dataclass(frozen=True)
class GainCurve:
    """Revenue and gain over single pricing for one number of prices ``j``.

    ``separation_points`` holds the supply at which this curve first departs
    from the curve with the next larger ``j`` in the sweep (empty for the
    largest ``j`` or if the curves never separate).
    """

    j: int
    label: str
    samples: tuple[GainSample, ...]
    separation_points: tuple[float, ...] = field(default=())

    def column(self, name: str) -> list[float]:
        return [getattr(s, name) for s in self.samples]


def scheme_label(j: int, size: int) -> str:
    if j == 1:
        return "SP"
    if j == size:
        return "CP"
    return f"PP{j}"


def first_separation(
    supplies: Sequence[float],
    lower: Sequence[float],
    upper: Sequence[float],
    tol: float = SEPARATION_TOL,
    run: int = SEPARATION_RUN,
) -> float | None:
    """First supply starting ``run`` consecutive samples with relative gap above ``tol``."""
    streak = 0
    for idx, (a, b) in enumerate(zip(lower, upper)):
        scale = max(abs(a), abs(b))
        if scale > 0 and abs(b - a) / scale > tol:
            streak += 1
            if streak == run:
                return supplies[idx - run + 1]
        else:
            streak = 0
    return None


def sweep_resource(
    market: Market,
    s_values: Iterable[float],
    j_set: Iterable[int],
    eps: float = EPS,
    k_search: KSearch = "best",
) -> list[GainCurve]:
    """Solve every ``(S, j)`` pair and assemble one gain curve per ``j``."""
    supplies = [float(s) for s in s_values]
    if any(b <= a for a, b in zip(supplies, supplies[1:])) or any(s < 0 for s in supplies):
        raise ValueError("supply values must be nonnegative and strictly ascending")
    js = sorted(set(j_set))
    raw: dict[int, list[GainSample]] = {j: [] for j in js}
    for s in supplies:
        m = market.with_supply(s)
        sp_rev = solve_sp(m, eps).revenue
        for j in js:
            sol = solve_pp(m, j, eps, k_search)
            raw[j].append(GainSample(s, sol.revenue, relative_gain(sol.revenue, sp_rev), sol.k_eff))
    curves = []
    for pos, j in enumerate(js):
        seps: tuple[float, ...] = ()
        if pos + 1 < len(js):
            nxt = raw[js[pos + 1]]
            point = first_separation(
                supplies, [x.revenue for x in raw[j]], [x.revenue for x in nxt]
            )
            if point is not None:
                seps = (point,)
        curves.append(GainCurve(j, scheme_label(j, market.size), tuple(raw[j]), seps))
    return curves


def gain_peaks(curve: GainCurve, floor: float = PEAK_FLOOR) -> list[float]:
    """Supplies at strict interior local maxima of the gain (plateaus count once).

    Gains below ``floor`` are rounding noise between identical schemes and read as zero.
    """
    g = [0.0 if x < floor else x for x in curve.column("gain")]
    s = curve.column("supply")
    peaks = []
    i = 1
    while i < len(g) - 1:
        j = i
        while j + 1 < len(g) and g[j + 1] == g[i]:
            j += 1
        if j + 1 < len(g) and g[i] > g[i - 1] and g[i] > g[j + 1]:
            peaks.append(s[i])
        i = j + 1
    return peaks


def threshold_changes(market: Market, s_values: Iterable[float], eps: float = EPS) -> list[float]:
    """Supplies at which the single-price effective market grows."""
    out = []
    prev = None
    for s in s_values:
        k = solve_sp(market.with_supply(s), eps).k_eff
        if prev is not None and k != prev:
            out.append(float(s))
        prev = k
    return out
