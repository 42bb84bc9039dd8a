"""Scenario documents (YAML) and result records.

A scenario looks like::

    supply: 100
    groups:
      - {theta: 16, n: 2}
      - {theta: 8, n: 3}
    options:
      j: 2
      sweep: {s_min: 0.01, s_max: 50, steps: 5000, j_values: [1, 2, 3, 4, 5]}
      tolerance: 1.0e-9
      k_search: best

Unknown keys anywhere are rejected; errors name the offending field and,
when available, the line.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

import yaml

from .market import EPS, DuplicateThetaError, Market, MarketError, validate_market


class ScenarioError(ValueError):
    """Malformed or invalid scenario document."""


@dataclass(frozen=True)
class SweepOptions:
    s_min: float
    s_max: float
    steps: int
    j_values: tuple[int, ...] | None = None

    def supplies(self) -> list[float]:
        if self.steps == 1:
            return [self.s_min]
        width = (self.s_max - self.s_min) / (self.steps - 1)
        # Rounded so that grids like 0.01, 0.02, ... print and compare cleanly.
        return [round(self.s_min + i * width, 12) for i in range(self.steps)]


@dataclass(frozen=True)
class ScenarioOptions:
    j: int | None = None
    sweep: SweepOptions | None = None
    tolerance: float = EPS
    k_search: str = "best"


@dataclass(frozen=True)
class ScenarioFile:
    groups: tuple[dict[str, Any], ...]
    supply: float
    options: ScenarioOptions = field(default_factory=ScenarioOptions)
    market: Market | None = None


_TOP_KEYS = {"groups", "supply", "options"}
_GROUP_KEYS = {"theta", "n"}
_OPTION_KEYS = {"j", "sweep", "tolerance", "k_search"}
_SWEEP_KEYS = {"s_min", "s_max", "steps", "j_values"}


def _line_map(text: str) -> dict[tuple, int]:
    """1-based source line for each mapping key / sequence item path."""
    lines: dict[tuple, int] = {}

    def walk(node: yaml.Node, path: tuple) -> None:
        lines[path] = node.start_mark.line + 1
        if isinstance(node, yaml.MappingNode):
            for k, v in node.value:
                walk(v, path + (k.value,))
                lines[path + (k.value,)] = k.start_mark.line + 1
        elif isinstance(node, yaml.SequenceNode):
            for i, v in enumerate(node.value):
                walk(v, path + (i,))

    try:
        root = yaml.compose(text, Loader=yaml.SafeLoader)
    except yaml.YAMLError:
        return lines
    if root is not None:
        walk(root, ())
    return lines


def _fmt_path(path: tuple) -> str:
    out = ""
    for p in path:
        out += f"[{p}]" if isinstance(p, int) else (f".{p}" if out else str(p))
    return out or "<root>"


class _Ctx:
    def __init__(self, lines: dict[tuple, int], source: str):
        self.lines = lines
        self.source = source

    def error(self, path: tuple, msg: str) -> ScenarioError:
        line = self.lines.get(path)
        where = f"{self.source}:{line}" if line else self.source
        return ScenarioError(f"{where}: {_fmt_path(path)}: {msg}")

    def mapping(self, value: Any, path: tuple, allowed: set[str], required: set[str]) -> dict:
        if not isinstance(value, dict):
            raise self.error(path, "expected a mapping")
        unknown = sorted(set(map(str, value)) - allowed)
        if unknown:
            raise self.error(path + (unknown[0],), f"unknown key {unknown[0]!r}")
        missing = sorted(required - set(value))
        if missing:
            raise self.error(path, f"missing required key {missing[0]!r}")
        return value

    def number(self, value: Any, path: tuple, *, minimum: float | None = None, positive: bool = False) -> float:
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
            raise self.error(path, f"expected a finite number, got {value!r}")
        if positive and value <= 0:
            raise self.error(path, f"must be positive, got {value!r}")
        if minimum is not None and value < minimum:
            raise self.error(path, f"must be >= {minimum}, got {value!r}")
        return float(value)

    def integer(self, value: Any, path: tuple, minimum: int = 1) -> int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise self.error(path, f"expected an integer, got {value!r}")
        if value < minimum:
            raise self.error(path, f"must be >= {minimum}, got {value!r}")
        return value


def parse_scenario(source: str | Path) -> ScenarioFile:
    """Parse a scenario from a path or from YAML text.

    A ``str`` is treated as a path when such a file exists, otherwise as the
    document itself.
    """
    if isinstance(source, Path) or (isinstance(source, str) and "\n" not in source and Path(source).is_file()):
        path = Path(source)
        text = path.read_text()
        name = str(path)
    else:
        text = str(source)
        name = "<scenario>"
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ScenarioError(f"{name}: malformed YAML: {exc}") from exc
    ctx = _Ctx(_line_map(text), name)

    doc = ctx.mapping(doc, (), _TOP_KEYS, {"groups", "supply"})
    supply = ctx.number(doc["supply"], ("supply",), minimum=0.0)
    raw_groups = doc["groups"]
    if not isinstance(raw_groups, list) or not raw_groups:
        raise ctx.error(("groups",), "expected a nonempty list of groups")
    groups = []
    for i, g in enumerate(raw_groups):
        path = ("groups", i)
        g = ctx.mapping(g, path, _GROUP_KEYS, _GROUP_KEYS)
        theta = ctx.number(g["theta"], path + ("theta",), positive=True)
        n = ctx.integer(g["n"], path + ("n",), minimum=1)
        groups.append({"theta": theta, "n": n})

    options = ScenarioOptions()
    if "options" in doc and doc["options"] is not None:
        opath = ("options",)
        o = ctx.mapping(doc["options"], opath, _OPTION_KEYS, set())
        j = ctx.integer(o["j"], opath + ("j",)) if "j" in o else None
        tolerance = ctx.number(o["tolerance"], opath + ("tolerance",), positive=True) if "tolerance" in o else EPS
        k_search = o.get("k_search", "best")
        if k_search not in ("best", "first-feasible"):
            raise ctx.error(opath + ("k_search",), f"expected 'best' or 'first-feasible', got {k_search!r}")
        sweep = None
        if "sweep" in o:
            spath = opath + ("sweep",)
            sw = ctx.mapping(o["sweep"], spath, _SWEEP_KEYS, {"s_min", "s_max", "steps"})
            s_min = ctx.number(sw["s_min"], spath + ("s_min",), minimum=0.0)
            s_max = ctx.number(sw["s_max"], spath + ("s_max",), minimum=0.0)
            steps = ctx.integer(sw["steps"], spath + ("steps",))
            if s_max < s_min or (steps > 1 and s_max == s_min):
                raise ctx.error(spath, "s_max must exceed s_min")
            j_values = None
            if "j_values" in sw:
                jv = sw["j_values"]
                if not isinstance(jv, list) or not jv:
                    raise ctx.error(spath + ("j_values",), "expected a nonempty list of integers")
                j_values = tuple(ctx.integer(x, spath + ("j_values", i)) for i, x in enumerate(jv))
            sweep = SweepOptions(s_min, s_max, steps, j_values)
        options = ScenarioOptions(j, sweep, tolerance, k_search)

    try:
        market = validate_market(groups, supply)
    except DuplicateThetaError as exc:
        first, second = ("groups", exc.first), ("groups", exc.second)
        lf, ls = ctx.lines.get(first), ctx.lines.get(second)
        raise ScenarioError(
            f"{name}: duplicate willingness to pay theta={exc.theta!r} in "
            f"{_fmt_path(first)} (line {lf}) and {_fmt_path(second)} (line {ls})"
        ) from exc
    except MarketError as exc:
        raise ScenarioError(f"{name}: {exc}") from exc
    if options.j is not None and options.j > market.size:
        raise ctx.error(("options", "j"), f"j={options.j} exceeds the number of groups {market.size}")
    return ScenarioFile(tuple(groups), supply, options, market)


@dataclass(frozen=True)
class ResultRecord:
    """One solver outcome in serializable form."""

    scheme: str
    S: float
    J: int
    revenue: float
    gain_vs_sp: float
    k_eff: int
    prices: tuple[float, ...]
    allocations: tuple[float, ...]
    flags: dict[str, Any] = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> ResultRecord:
        d = json.loads(text)
        d["prices"] = tuple(d["prices"])
        d["allocations"] = tuple(d["allocations"])
        return cls(**d)


CSV_SCHEMA = 1
CSV_COLUMNS = ("scheme", "S", "J", "revenue", "gain_vs_sp", "k_eff")


def fmt_number(x: float) -> str:
    return f"{x:.12g}"
