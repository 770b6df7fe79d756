"""Command-line front end: ``rml <command> ...``.

Single runs print one JSON object; ``bench`` writes CSV.  Exit codes:
0 ok, 1 other error, 2 parse error, 3 degree cap, 4 time limit, 5 infeasible.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import __version__
from .core import build_universe, count_variables, eta, parse_triples, write_triples
from .errors import DegreeCapError, InfeasibleError, RmlError
from .instances import gen_autocorr, gen_mult, gen_vision, load_instance, save_instance
from .kernel3 import build_cover_graph, fpt_decide
from .linearize import GreedyTieBreak, SeqPolicy, full_linearize, greedy_linearize, parse_order, seq_linearize
from .models import export_qcp, solve_binary, solve_bestbound, solve_minlin
from .relax import bound_report, build_dual, build_rml_lp, lp_bound, root_node_gap
from .solver import SolverConfig, export_lp_format

EXIT_TIME_LIMIT = 4
STAGE_LIMIT = 30.0
TOTAL_LIMIT = 600.0
# bench stops exact stages after this many simplex iterations so results do not depend on machine speed
BENCH_WORK = 2000
STRATEGIES = ("seq", "greedy", "minlin", "bb", "full")
BENCH_SCHEMA = "rml-bench/1"
BENCH_COLUMNS = (
    "schema",
    "instance",
    "strategy",
    "status",
    "size",
    "n_vars",
    "bound",
    "eta",
    "root_gap_pct",
    "runtime_ms",
    "reason",
)

log = logging.getLogger("rml")


def default_seed() -> int:
    return int(os.environ.get("RML_SEED", "0"))


def _ms(t0: float) -> float:
    return round((time.perf_counter() - t0) * 1000.0, 3)


def _emit(report: dict, out: str | None = None) -> None:
    text = json.dumps(report, indent=2, sort_keys=True)
    if out:
        Path(out).write_text(text + "\n", encoding="utf-8")
    print(text)


def _load_triples(path: str):
    return parse_triples(Path(path).read_text(encoding="utf-8"))


def _config(a) -> SolverConfig:
    return SolverConfig(work_limit=a.work_limit)


def _exit_for(statuses) -> int:
    return EXIT_TIME_LIMIT if any(s in ("feasible", "time_limit") for s in statuses) else 0


# --- strategies -------------------------------------------------------------


def run_strategy(
    mlp, name: str, limit: float, ctx: dict, seed: int = 0, order: str | None = None, k: int | None = None,
    config: SolverConfig | None = None,
):
    """Return ``(triples, status)`` for one strategy; ``ctx`` carries earlier results (bb reuses minlin)."""
    if name == "seq":
        policy = parse_order(order, mlp.n) if order else SeqPolicy()
        return seq_linearize(mlp, policy), "optimal"
    if name == "greedy":
        rule = "random" if ctx.get("tie") == "random" else "canonical"
        return greedy_linearize(mlp, GreedyTieBreak(rule, seed)), "optimal"
    if name == "full":
        return full_linearize(mlp), "optimal"
    if name == "minlin":
        warm = ctx.get("greedy") or greedy_linearize(mlp)
        sol = solve_minlin(mlp, time_limit=limit, warm=warm, config=config)
        ctx["minlin"] = sol.triple_set
        return sol.triple_set, sol.status
    if name == "bb":
        warm = ctx.get("minlin")
        if warm is None:
            warm = solve_minlin(mlp, time_limit=limit, warm=greedy_linearize(mlp), config=config).triple_set
            ctx["minlin"] = warm
        sol = solve_bestbound(mlp, k if k is not None else len(warm), warm=warm, time_limit=limit, config=config)
        return sol.triple_set, sol.status
    raise ValueError(f"unknown strategy {name!r}")


# --- commands ---------------------------------------------------------------


def cmd_gen(a) -> int:
    seed = a.seed if a.seed is not None else default_seed()
    if a.family in ("mult3", "mult4"):
        mlp = gen_mult(a.n, a.m, int(a.family[-1]), seed)
    elif a.family == "vision":
        mlp = gen_vision(a.grid, seed, a.l_seed)
    else:
        mlp = gen_autocorr(a.length, a.max_lag)
    save_instance(mlp, a.output)
    _emit({"family": a.family, "n": mlp.n, "m": mlp.m, "seed": seed, "path": a.output})
    return 0


def cmd_linearize(a) -> int:
    mlp = load_instance(a.input)
    t0 = time.perf_counter()
    seed = a.seed if a.seed is not None else default_seed()
    T, status = run_strategy(
        mlp, a.strategy, a.time_limit * a.budget, {"tie": a.tie}, seed=seed, order=a.order, k=a.k, config=_config(a)
    )
    if a.output:
        Path(a.output).write_text(write_triples(T), encoding="utf-8")
    _emit({
        "strategy": a.strategy,
        "size": len(T),
        "n_vars": count_variables(T, mlp),
        "status": status,
        "runtime_ms": _ms(t0),
        "output": a.output,
    })
    return _exit_for([status])


def cmd_bound(a) -> int:
    mlp = load_instance(a.input)
    T = _load_triples(a.triples) if a.triples else full_linearize(mlp)
    _emit(bound_report(mlp, T))
    return 0


def cmd_minlin(a) -> int:
    mlp = load_instance(a.input)
    warm = None
    if a.warm == "greedy":
        warm = greedy_linearize(mlp)
    elif a.warm:
        warm = _load_triples(a.warm)
    sol = solve_minlin(mlp, time_limit=a.time_limit * a.budget, warm=warm, config=_config(a))
    if a.output:
        Path(a.output).write_text(write_triples(sol.triple_set), encoding="utf-8")
    _emit({
        "size": sol.objective,
        "bound": sol.bound,
        "status": sol.status,
        "nodes": sol.nodes,
        "runtime_ms": round(sol.runtime * 1000, 3),
    })
    return _exit_for([sol.status])


def cmd_bestbound(a) -> int:
    mlp = load_instance(a.input)
    warm = _load_triples(a.warm) if a.warm else None
    sol = solve_bestbound(mlp, a.k, warm=warm, time_limit=a.time_limit * a.budget, config=_config(a))
    if a.output:
        Path(a.output).write_text(write_triples(sol.triple_set), encoding="utf-8")
    _emit({
        "k": a.k,
        "size": len(sol.triple_set),
        "bound": sol.bound,
        "status": sol.status,
        "nodes": sol.nodes,
        "runtime_ms": round(sol.runtime * 1000, 3),
    })
    return _exit_for([sol.status])


def cmd_kernel(a) -> int:
    mlp = load_instance(a.input)
    g = build_cover_graph(mlp)
    res = fpt_decide(g, a.k)
    _emit({
        "verdict": "yes" if res.yes else "no",
        "k": a.k,
        "forced_pairs": [[j + 1 for j in p] for p in g.forced],
        "selections": [[j + 1 for j in p] for p in (res.selection or [])],
        "kernel_sizes": res.kernel.graph.sizes(),
        "kernel_k": res.kernel.k,
        "trace_length": len(res.kernel.trace),
    })
    return 0


def cmd_solve_binary(a) -> int:
    mlp = load_instance(a.input)
    T = _load_triples(a.triples) if a.triples else greedy_linearize(mlp)
    res, x = solve_binary(mlp, T, time_limit=a.time_limit * a.budget, config=_config(a))
    if x is None:
        raise InfeasibleError(f"no binary solution ({res.status.value})")
    status = "optimal" if res.ok else "feasible"
    _emit({"objective": res.objective, "x": x, "status": status, "nodes": res.nodes,
           "runtime_ms": round(res.runtime * 1000, 3)})
    return _exit_for([status])


def cmd_export(a) -> int:
    mlp = load_instance(a.input)
    T = _load_triples(a.triples) if a.triples else greedy_linearize(mlp)
    if a.format == "qcp":
        text = export_qcp(mlp, T)
    elif a.model == "dual":
        text = export_lp_format(build_dual(mlp, T))
    else:
        text = export_lp_format(build_rml_lp(mlp, T, gated=a.gated))
    if a.output:
        Path(a.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def pipeline(mlp, limit: float = STAGE_LIMIT, total: float = TOTAL_LIMIT, config: SolverConfig | None = None) -> dict:
    t0 = time.perf_counter()
    stages = {}
    greedy = greedy_linearize(mlp)
    stages["greedy"] = {"size": len(greedy), "bound": lp_bound(mlp, greedy), "status": "optimal"}
    remaining = lambda: max(0.0, total - (time.perf_counter() - t0))  # noqa: E731
    ml = solve_minlin(mlp, time_limit=min(limit, remaining()), warm=greedy, config=config)
    stages["minlin"] = {"size": ml.objective, "bound": lp_bound(mlp, ml.triple_set), "status": ml.status}
    bb = solve_bestbound(mlp, ml.objective, warm=ml.triple_set, time_limit=min(limit, remaining()), config=config)
    stages["bb"] = {"size": len(bb.triple_set), "bound": bb.bound, "status": bb.status}
    return {"stages": stages, "bound": bb.bound, "eta": eta(mlp), "runtime_ms": _ms(t0)}


def cmd_pipeline(a) -> int:
    mlp = load_instance(a.input)
    report = pipeline(mlp, a.time_limit * a.budget, a.total_limit * a.budget, _config(a))
    if a.no_timings:
        report.pop("runtime_ms")
    report["version"] = __version__
    _emit(report)
    return _exit_for(s["status"] for s in report["stages"].values())


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return f"{x:.9g}"
    return str(x)


def bench_instance(
    path: str, strategies: tuple[str, ...], limit: float, timings: bool, work: int | None = None
) -> list[dict]:
    """Rows for one instance; failures become rows with a reason code."""
    name = Path(path).name
    base = {"schema": BENCH_SCHEMA, "instance": name}
    try:
        mlp = load_instance(path)
    except RmlError as exc:
        return [dict(base, strategy=s, status="error", reason=f"parse: {exc}") for s in strategies]
    e = eta(mlp)
    try:
        f_full = lp_bound(mlp, build_universe(mlp).all)
        full_reason = ""
    except RmlError as exc:
        f_full, full_reason = None, f"full: {type(exc).__name__}"
    ctx: dict = {}
    rows = []
    for s in strategies:
        t0 = time.perf_counter()
        row = dict(base, strategy=s, eta=e)
        try:
            T, status = run_strategy(mlp, s, limit, ctx, config=SolverConfig(work_limit=work))
            if s == "greedy":
                ctx["greedy"] = T
            bound = lp_bound(mlp, T)
            row.update(status=status, size=len(T), n_vars=count_variables(T, mlp), bound=bound)
            if f_full is not None:
                gap = root_node_gap(f_full, bound)
                row["root_gap_pct"] = 0.0 if abs(gap) < 1e-9 else gap  # LP round-off
            else:
                row["reason"] = full_reason
        except DegreeCapError as exc:
            row.update(status="error", reason=f"cap: {exc}")
        except RmlError as exc:
            row.update(status="error", reason=f"{type(exc).__name__}: {exc}")
        row["runtime_ms"] = _ms(t0) if timings else None
        rows.append(row)
    return rows


def cmd_bench(a) -> int:
    files = sorted(str(p) for p in Path(a.directory).glob("*.mlp"))
    strategies = tuple(s.strip() for s in a.strategies.split(",") if s.strip())
    for s in strategies:
        if s not in STRATEGIES:
            raise ValueError(f"unknown strategy {s!r}")
    limit = a.time_limit * a.budget
    timings = not a.no_timings
    if a.jobs > 1:
        with ProcessPoolExecutor(max_workers=a.jobs) as pool:
            results = list(pool.map(bench_instance, files, [strategies] * len(files),
                                    [limit] * len(files), [timings] * len(files), [a.work_limit] * len(files)))
    else:
        results = [bench_instance(f, strategies, limit, timings, a.work_limit) for f in files]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(BENCH_COLUMNS)
    for rows in results:
        for row in rows:
            w.writerow([_fmt(row.get(c)) for c in BENCH_COLUMNS])
    if a.output:
        Path(a.output).write_text(buf.getvalue(), encoding="utf-8")
    else:
        sys.stdout.write(buf.getvalue())
    statuses = [r["status"] for rows in results for r in rows]
    if any(s == "error" for s in statuses):
        return 1
    return _exit_for(statuses)


# --- argument parsing -------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rml", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"rml {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="log warnings and progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    def timed(sp, work: int | None = None):
        sp.add_argument("--time-limit", type=float, default=STAGE_LIMIT, help="seconds per exact stage")
        sp.add_argument("--budget", type=float, default=1.0, help="multiplier applied to every time limit")
        sp.add_argument("--work-limit", type=int, default=work, help="simplex iterations per exact stage")

    g = sub.add_parser("gen", help="generate an instance")
    g.add_argument("--family", choices=("mult3", "mult4", "vision", "autocorr"), required=True)
    g.add_argument("--n", type=int, default=20)
    g.add_argument("--m", type=int, default=50)
    g.add_argument("--grid", type=int, default=3)
    g.add_argument("--l-seed", type=int, default=None, help="vision: redraw only the linear part")
    g.add_argument("--length", type=int, default=10)
    g.add_argument("--max-lag", type=int, default=3)
    g.add_argument("--seed", type=int, default=None, help="defaults to $RML_SEED or 0")
    g.add_argument("-o", "--output", required=True)
    g.set_defaults(func=cmd_gen)

    li = sub.add_parser("linearize", help="build a proper triple set")
    li.add_argument("input")
    li.add_argument("--strategy", choices=STRATEGIES, default="greedy")
    li.add_argument("--order", help="seq: 1-based variable order, e.g. 3,4,1,2")
    li.add_argument("--tie", choices=("canonical", "random"), default="canonical")
    li.add_argument("--seed", type=int, default=None)
    li.add_argument("--k", type=int, default=None, help="bb: cardinality (default: minlin size)")
    li.add_argument("-o", "--output")
    timed(li)
    li.set_defaults(func=cmd_linearize)

    b = sub.add_parser("bound", help="LP bound of a triple set (default: all triples)")
    b.add_argument("input")
    b.add_argument("--triples")
    b.set_defaults(func=cmd_bound)

    mn = sub.add_parser("minlin", help="minimum-size linearization")
    mn.add_argument("input")
    mn.add_argument("--warm", default="greedy", help="'greedy', '' or a .rml file")
    mn.add_argument("-o", "--output")
    timed(mn)
    mn.set_defaults(func=cmd_minlin)

    bb = sub.add_parser("bestbound", help="best LP bound over linearizations of size <= k")
    bb.add_argument("input")
    bb.add_argument("--k", type=int, required=True)
    bb.add_argument("--warm")
    bb.add_argument("-o", "--output")
    timed(bb)
    bb.set_defaults(func=cmd_bestbound)

    kn = sub.add_parser("kernel", help="kernelize and decide a degree-3 instance")
    kn.add_argument("input")
    kn.add_argument("--k", type=int, required=True)
    kn.set_defaults(func=cmd_kernel)

    sb = sub.add_parser("solve-binary", help="exact optimum of a binary instance")
    sb.add_argument("input")
    sb.add_argument("--triples")
    timed(sb)
    sb.set_defaults(func=cmd_solve_binary)

    ex = sub.add_parser("export", help="write a model in LP format")
    ex.add_argument("input")
    ex.add_argument("--format", choices=("lp", "qcp"), default="lp")
    ex.add_argument("--model", choices=("rml", "dual"), default="rml")
    ex.add_argument("--gated", action="store_true", help="rows for every triple with activation rhs")
    ex.add_argument("--triples")
    ex.add_argument("-o", "--output")
    ex.set_defaults(func=cmd_export)

    be = sub.add_parser("bench", help="run strategies over a directory of .mlp files")
    be.add_argument("directory")
    be.add_argument("--strategies", default=",".join(STRATEGIES))
    be.add_argument("--jobs", type=int, default=1)
    be.add_argument("--no-timings", action="store_true", help="leave runtime_ms empty (byte-stable output)")
    be.add_argument("-o", "--output")
    timed(be, BENCH_WORK)
    be.set_defaults(func=cmd_bench)

    pl = sub.add_parser("pipeline", help="greedy -> minlin -> bestbound")
    pl.add_argument("input")
    pl.add_argument("--total-limit", type=float, default=TOTAL_LIMIT)
    pl.add_argument("--no-timings", action="store_true")
    timed(pl)
    pl.set_defaults(func=cmd_pipeline)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except RmlError as exc:
        print(f"rml: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (ValueError, OSError) as exc:
        print(f"rml: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
