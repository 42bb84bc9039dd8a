"""Revenue-maximizing usage-based pricing for a capacity-limited provider."""

from .analysis import GainCurve, GainPoint, gain_max, gain_two_group, sweep_resource
from .cp import CpSolution, cp_revenue_decomposition, solve_cp, water_fill_lambda
from .iccp import (
    IcFeasibility,
    IcInfeasibleError,
    PriceMenu,
    SelectionReport,
    build_menu,
    feasibility_thresholds,
    indifference_quantity,
    simulate_self_selection,
)
from .market import DemandResult, Group, Market, MarketError, demand, surplus_at, utility, validate_market
from .pp import (
    Partition,
    PpSolution,
    SuperGroup,
    aggregate_supergroup,
    enumerate_consecutive_partitions,
    partition_count_unrestricted,
    solve_level1,
    solve_pp,
)
from .sp import ComparisonReport, SpSolution, compare_cp_sp, solve_sp

__all__ = [
    "ComparisonReport", "CpSolution", "DemandResult", "GainCurve", "GainPoint", "Group",
    "IcFeasibility", "IcInfeasibleError", "Market", "MarketError", "Partition", "PpSolution",
    "PriceMenu", "SelectionReport", "SpSolution", "SuperGroup", "aggregate_supergroup",
    "build_menu", "compare_cp_sp", "cp_revenue_decomposition", "demand",
    "enumerate_consecutive_partitions", "feasibility_thresholds", "gain_max", "gain_two_group",
    "indifference_quantity", "partition_count_unrestricted", "simulate_self_selection",
    "solve_cp", "solve_level1", "solve_pp", "solve_sp", "surplus_at", "sweep_resource",
    "utility", "validate_market", "water_fill_lambda",
]
