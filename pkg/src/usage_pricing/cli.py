"""Command-line entry point: ``usage-pricing <command> --scenario FILE``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import random
import sys
from dataclasses import asdict
from typing import Any, Callable, Iterable, TextIO

from . import analysis, iccp, oracle
from .cp import solve_cp
from .market import Group, Market
from .pp import solve_pp
from .scenario import (
    CSV_COLUMNS,
    CSV_SCHEMA,
    ResultRecord,
    ScenarioError,
    ScenarioFile,
    SweepOptions,
    fmt_number,
    parse_scenario,
)
from .sp import solve_sp

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_INFEASIBLE = 3
EXIT_MISMATCH = 4

COMMANDS = ("solve-cp", "solve-sp", "solve-pp", "design-menu", "check-ic", "sweep", "verify")


def _emit_error(kind: str, message: str, **extra: Any) -> None:
    sys.stderr.write(json.dumps({"type": "error", "kind": kind, "message": message, **extra}) + "\n")


def _jsonable(obj: Any) -> Any:
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def _write_jsonl(out: TextIO, records: Iterable[dict]) -> None:
    for r in records:
        out.write(json.dumps(_jsonable(r), sort_keys=True) + "\n")


def _record_cp(m: Market, eps: float, **_: Any) -> ResultRecord:
    cp, sp = solve_cp(m, eps), solve_sp(m, eps)
    return ResultRecord(
        "CP", m.supply, m.size, cp.revenue, analysis.relative_gain(cp.revenue, sp.revenue),
        cp.k_eff, cp.prices, cp.allocations, {"lambda_star": cp.lambda_star},
    )


def _record_sp(m: Market, eps: float, **_: Any) -> ResultRecord:
    sp = solve_sp(m, eps)
    return ResultRecord(
        "SP", m.supply, 1, sp.revenue, 0.0, sp.k_eff,
        tuple(sp.price if s > 0 else t for s, t in zip(sp.allocations, m.thetas)),
        sp.allocations, {"price": sp.price},
    )


def _record_pp(m: Market, eps: float, j: int, k_search: str, **_: Any) -> ResultRecord:
    pp, sp = solve_pp(m, j, eps, k_search), solve_sp(m, eps)
    clusters = [list(c) for c in pp.partition.clusters] if pp.partition else []
    return ResultRecord(
        "PP", m.supply, j, pp.revenue, analysis.relative_gain(pp.revenue, sp.revenue),
        pp.k_eff, pp.group_prices, pp.allocations,
        {"j_used": pp.j_used, "clusters": clusters, "k_search": k_search,
         "cp_revenue": solve_cp(m, eps).revenue},
    )


def _sweep_supplies(scn: ScenarioFile) -> list[float]:
    if scn.options.sweep is not None:
        return scn.options.sweep.supplies()
    fine = SweepOptions(0.0, 50.0, 5001).supplies()
    top = max(100, math.ceil(scn.supply))
    return fine + [float(s) for s in range(51, top + 1)]


def _run_sweep(scn: ScenarioFile, args: argparse.Namespace, out: TextIO) -> int:
    m = scn.market
    if args.j_values:
        js = args.j_values
    elif scn.options.sweep and scn.options.sweep.j_values:
        js = list(scn.options.sweep.j_values)
    else:
        js = list(range(1, m.size + 1))
    if any(not 1 <= j <= m.size for j in js):
        _emit_error("schema", f"j values must lie in 1..{m.size}")
        return EXIT_PARSE
    curves = analysis.sweep_resource(m, _sweep_supplies(scn), js, args.eps, args.k_search)
    if args.format == "csv":
        out.write(f"schema={CSV_SCHEMA}\n")
        w = csv.writer(out, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for c in curves:
            for s in c.samples:
                w.writerow([c.label, fmt_number(s.supply), c.j, fmt_number(s.revenue), fmt_number(s.gain), s.k_eff])
    else:
        for c in curves:
            _write_jsonl(out, (
                {"type": "sample", "scheme": c.label, "S": s.supply, "J": c.j,
                 "revenue": s.revenue, "gain_vs_sp": s.gain, "k_eff": s.k_eff}
                for s in c.samples
            ))
        _write_jsonl(out, ({"type": "separation", "J": c.j, "points": list(c.separation_points)} for c in curves))
    return EXIT_OK


def _menu_record(menu: iccp.PriceMenu) -> dict:
    return {"type": "menu", "prices": list(menu.prices), "thresholds": list(menu.thresholds),
            "steps": [list(s) for s in menu.steps]}


def _run_design_menu(scn: ScenarioFile, args: argparse.Namespace, out: TextIO) -> int:
    m = scn.market
    cp = solve_cp(m, args.eps)
    try:
        menu = iccp.build_menu(m, cp, args.placement)
    except iccp.IcInfeasibleError as exc:
        _emit_error("infeasible", str(exc), q=exc.q, margin=exc.margin)
        return EXIT_INFEASIBLE
    except ValueError as exc:
        _emit_error("infeasible", str(exc))
        return EXIT_INFEASIBLE
    report = iccp.simulate_self_selection(menu, m, cp)
    _write_jsonl(out, [_menu_record(menu), {"type": "selection", **asdict(report), "cp_revenue": cp.revenue}])
    return EXIT_OK


def _run_check_ic(scn: ScenarioFile, args: argparse.Namespace, out: TextIO) -> int:
    m = scn.market
    rep = iccp.feasibility_thresholds(m, solve_cp(m, args.eps))
    _write_jsonl(out, [{"type": "ic_feasibility", **asdict(rep), "t_root": iccp.T_ROOT}])
    return EXIT_OK if rep.feasible else EXIT_INFEASIBLE


def _random_market(rng: random.Random, max_groups: int = 6) -> Market:
    size = rng.randint(1, max_groups)
    while True:
        thetas = sorted((math.exp(rng.uniform(math.log(0.1), math.log(100))) for _ in range(size)), reverse=True)
        if all(a / b >= 1 + 1e-3 for a, b in zip(thetas, thetas[1:])):
            break
    groups = tuple(Group(t, rng.randint(1, 50)) for t in thetas)
    return Market(groups, math.exp(rng.uniform(math.log(0.01), math.log(1e3))))


def verification_checks(m: Market, eps: float) -> list[dict]:
    """Oracle-vs-solver comparisons on one market."""
    checks = []

    def check(name: str, ok: bool, **detail: Any) -> None:
        checks.append({"type": "check", "name": name, "pass": bool(ok), **detail})

    if m.supply <= 0:
        check("supply", True, note="zero supply: nothing to verify")
        return checks
    cp, sp = solve_cp(m, eps), solve_sp(m, eps)
    lam = oracle.brute_lambda_bisection(m)
    check("cp_lambda_vs_bisection", abs(lam - cp.lambda_star) <= 1e-8 * cp.lambda_star,
          solver=cp.lambda_star, oracle=lam)
    grid = 100_000
    _, r_grid = oracle.brute_best_single_price(m, grid)
    bound = oracle.single_price_grid_error(m, sp.price, grid)
    check("sp_vs_grid", -1e-9 * sp.revenue <= sp.revenue - r_grid <= bound + 1e-9 * sp.revenue,
          solver=sp.revenue, oracle=r_grid, bound=bound)
    if m.size <= 8:
        for j in range(1, min(m.size, 3) + 1):
            ex = oracle.brute_pp_exhaustive(m, j)
            pp = solve_pp(m, j, eps)
            check(f"pp_vs_exhaustive_j{j}",
                  abs(pp.revenue - ex.revenue) <= 1e-8 * max(ex.revenue, 1.0) and ex.is_consecutive and ex.is_prefix,
                  solver=pp.revenue, oracle=ex.revenue)
    if cp.k_eff >= 1:
        feas = iccp.feasibility_thresholds(m, cp)
        check("ic_thresholds_below_root", all(1 < t < iccp.T_ROOT for t in feas.t_thresholds))
        if feas.feasible:
            rep = iccp.simulate_self_selection(iccp.build_menu(m, cp), m, cp)
            check("iccp_self_selection", rep.compatible and abs(rep.revenue - cp.revenue) <= 1e-8 * max(cp.revenue, 1.0),
                  solver=rep.revenue, oracle=cp.revenue)
    return checks


def _run_verify(scn: ScenarioFile, args: argparse.Namespace, out: TextIO) -> int:
    records = [{**c, "market": "scenario"} for c in verification_checks(scn.market, args.eps)]
    rng = random.Random(args.seed)
    for idx in range(args.random_markets):
        m = _random_market(rng)
        records.extend({**c, "market": f"random-{idx}"} for c in verification_checks(m, args.eps))
    failed = sum(not r["pass"] for r in records)
    records.append({"type": "summary", "checks": len(records), "failed": failed, "seed": args.seed})
    _write_jsonl(out, records)
    return EXIT_OK if failed == 0 else EXIT_MISMATCH


_SOLVERS: dict[str, Callable[..., ResultRecord]] = {
    "solve-cp": _record_cp,
    "solve-sp": _record_sp,
    "solve-pp": _record_pp,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="usage-pricing", description="Revenue-maximizing usage-based tariffs.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--scenario", required=True, help="scenario YAML file")
    p.add_argument("--out", default="-", help="output file (default: stdout)")
    p.add_argument("--format", choices=("csv", "json-lines"), default=None)
    p.add_argument("--seed", type=int, default=0, help="seed for verify's random markets")
    p.add_argument("--tolerance", type=float, default=None, help="threshold tolerance (overrides scenario)")
    p.add_argument("--supply", type=float, default=None, help="override the scenario's supply")
    p.add_argument("--j", type=int, default=None, help="number of prices for solve-pp")
    p.add_argument("--j-values", type=int, nargs="+", default=None, help="price counts for sweep")
    p.add_argument("--k-search", choices=("best", "first-feasible"), default=None)
    p.add_argument("--placement", choices=("tight", "midpoint"), default="tight")
    p.add_argument("--random-markets", type=int, default=20, help="extra random markets for verify")
    return p


def run_command(argv: list[str] | None = None, stdout: TextIO | None = None) -> int:
    args = build_parser().parse_args(argv)
    stdout = stdout or sys.stdout
    try:
        scn = parse_scenario(args.scenario)
    except (ScenarioError, OSError) as exc:
        _emit_error("parse", str(exc))
        return EXIT_PARSE
    if args.supply is not None:
        if args.supply < 0:
            _emit_error("parse", "--supply must be >= 0")
            return EXIT_PARSE
        scn = ScenarioFile(scn.groups, args.supply, scn.options, scn.market.with_supply(args.supply))
    args.eps = args.tolerance if args.tolerance is not None else scn.options.tolerance
    args.k_search = args.k_search or scn.options.k_search
    if args.format is None:
        args.format = "csv" if args.command == "sweep" else "json-lines"

    buf = io.StringIO()
    if args.command in _SOLVERS:
        j = args.j if args.j is not None else scn.options.j
        if args.command == "solve-pp":
            if j is None or not 1 <= j <= scn.market.size:
                _emit_error("schema", f"solve-pp needs --j (or options.j) in 1..{scn.market.size}")
                return EXIT_PARSE
        rec = _SOLVERS[args.command](scn.market, args.eps, j=j, k_search=args.k_search)
        if args.format == "csv":
            buf.write(f"schema={CSV_SCHEMA}\n")
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(CSV_COLUMNS)
            w.writerow([rec.scheme, fmt_number(rec.S), rec.J, fmt_number(rec.revenue), fmt_number(rec.gain_vs_sp), rec.k_eff])
        else:
            buf.write(rec.to_json() + "\n")
        status = EXIT_OK
    elif args.command == "sweep":
        status = _run_sweep(scn, args, buf)
    elif args.command == "design-menu":
        status = _run_design_menu(scn, args, buf)
    elif args.command == "check-ic":
        status = _run_check_ic(scn, args, buf)
    else:
        status = _run_verify(scn, args, buf)

    if args.out == "-":
        stdout.write(buf.getvalue())
    else:
        with open(args.out, "w", newline="") as fh:
            fh.write(buf.getvalue())
    return status


def main() -> None:
    sys.exit(run_command())


if __name__ == "__main__":
    main()
