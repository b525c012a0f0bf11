"""Command-line front end: generate, solve-exact, solve-lp, gap, verify."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from itertools import product
from pathlib import Path

import numpy as np

from . import analysis
from .core import InstanceError, ParseError, ResourceError, read_instance, write_instance
from .exact import min_label_cut_bnb, min_label_cut_exhaustive
from .generators import (
    DEFAULT_EDGE_CAP,
    GadgetParams,
    PermutationTable,
    derive_params,
    make_gap_instance,
    make_path_instance,
)
from .lp import emit_lp_text, gadget_min_path, min_distinct_label_path, solve_relaxation

CSV_COLUMNS = [
    "instance_id", "k", "d", "h", "seed", "n", "m", "q", "opt", "lp1", "lp2",
    "gap1", "gap2", "t_opt_ms", "t_lp1_ms", "t_lp2_ms", "opt_status",
]


def metadata_path(instance_path) -> Path:
    return Path(str(instance_path) + ".meta.json")


def _f6(value) -> str:
    return "" if value is None else f"{value:.6f}"


# --- gap experiments ---------------------------------------------------------


@dataclass
class GapReport:
    instance_id: str
    k: int | None
    d: int | None
    h: int | None
    seed: int | None
    n: int
    m: int
    q: int
    opt: int | None
    opt_status: str
    lp1: float
    lp2: float
    t_opt_ms: float
    t_lp1_ms: float
    t_lp2_ms: float
    cap: int | None = None

    @property
    def gap1(self):
        return self.opt / self.lp1 if self.opt is not None and self.lp1 > 0 else None

    @property
    def gap2(self):
        return self.opt / self.lp2 if self.opt is not None and self.lp2 > 0 else None

    def csv_row(self, timings: bool) -> list[str]:
        blank = lambda v: "" if v is None else str(v)  # noqa: E731
        if self.opt_status == "exact":
            opt = str(self.opt)
        elif self.opt_status == "gt_cap":
            opt = f">{self.cap}"
        else:
            opt = ""
        times = [_f6(self.t_opt_ms), _f6(self.t_lp1_ms), _f6(self.t_lp2_ms)] if timings else ["", "", ""]
        return [
            self.instance_id, blank(self.k), blank(self.d), blank(self.h), blank(self.seed),
            str(self.n), str(self.m), str(self.q), opt, _f6(self.lp1), _f6(self.lp2),
            _f6(self.gap1), _f6(self.gap2), *times, self.opt_status,
        ]

    def record(self) -> dict:
        out = {col: getattr(self, col) for col in CSV_COLUMNS if col not in ("gap1", "gap2")}
        out["gap1"], out["gap2"] = self.gap1, self.gap2
        return out


def _timed(fn, *args, **kwargs):
    start = time.perf_counter()
    value = fn(*args, **kwargs)
    return value, (time.perf_counter() - start) * 1000.0


def run_gap_row(task: dict) -> GapReport:
    if task["family"] == "path":
        instance = make_path_instance(task["m"])
        table = None
        ident = f"path-m{task['m']}"
        k = d = h = seed = None
    else:
        k, d, h, seed = task["k"], task["d"], task["h"], task["seed"]
        instance, table = make_gap_instance(GadgetParams(k, d, h, seed))
        ident = f"gadget-k{k}-d{d}-h{h}-s{seed}"

    start = time.perf_counter()
    status, opt = "exact", None
    try:
        opt = min_label_cut_bnb(instance, node_guard=task["node_guard"]).size
    except ResourceError:
        try:
            res = min_label_cut_exhaustive(instance, cap=task["cap"])
            if res.exceeds_cap:
                status = "gt_cap"
            else:
                opt = res.size
        except ResourceError:
            status = "guard"
    t_opt = (time.perf_counter() - start) * 1000.0

    lp1, t_lp1 = _timed(solve_relaxation, instance, "lp1")
    oracle = "gadget" if table is not None else "generic"
    lp2, t_lp2 = _timed(solve_relaxation, instance, "lp2", oracle, table)
    return GapReport(
        ident, k, d, h, seed, instance.vertex_count, instance.edge_count, instance.label_count,
        opt, status, lp1.value, lp2.value, t_opt, t_lp1, t_lp2, cap=task["cap"],
    )


def gap_tasks(args) -> list[dict]:
    common = {"family": args.family, "cap": args.cap, "node_guard": args.node_guard}
    if args.family == "path":
        return [dict(common, m=m) for m in args.m]
    return [
        dict(common, k=k, d=d, h=h, seed=seed)
        for k, d, h, seed in product(args.k, args.d, args.h, args.seeds)
    ]


def run_gap(tasks: list[dict], jobs: int = 1) -> list[GapReport]:
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(run_gap_row, tasks))
    return [run_gap_row(t) for t in tasks]


def gap_csv(rows: list[GapReport], timings: bool = False) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        writer.writerow(row.csv_row(timings))
    return buf.getvalue()


# --- verify ------------------------------------------------------------------


def _dominance_grid() -> analysis.BoundReport:
    worst = -math.inf
    checked = 0
    for a in (0.5, 1, 2, 4):
        top = math.floor(4 * a)
        for d in range(math.ceil(16 * a) + 1, 64 * math.ceil(a) + 1):
            bound = analysis.chain_sep_prob_bound(a, d)
            for x, y in product(range(top + 1), repeat=2):
                worst = max(worst, float(analysis.chain_sep_exact_prob(x, y, d)) - bound)
                checked += 1
    return analysis.BoundReport("separation_bound_dominance", passed=worst <= 0, detail=f"{checked} cases, max excess {worst:.3e}")


MC_CASES = ((1, 1, 2), (2, 1, 3), (3, 2, 8))


def _monte_carlo(trials: int, seed: int) -> list[analysis.BoundReport]:
    out = []
    for idx, (sm, sn, d) in enumerate(MC_CASES):
        exact = float(analysis.chain_sep_exact_prob(sm, sn, d))
        est, se = analysis.monte_carlo_chain_sep(range(1, sm + 1), range(1, sn + 1), d, trials, seed + idx)
        ok = abs(est - exact) <= 4 * se
        out.append(
            analysis.BoundReport(
                f"monte_carlo_{sm}_{sn}_{d}", estimate=est, stderr=se, passed=ok, detail=f"exact {exact:.6f}"
            )
        )
    return out


def _configuration_count() -> analysis.BoundReport:
    worst = -math.inf
    cases = 0
    for k, d in product((1, 2), range(1, 5)):
        for c in range(0, min(4, k * d) + 1):
            count = analysis.enumerate_configurations_exact(k, d, c)
            bound = analysis.log_config_count_bound(k, d, c / k)
            worst = max(worst, math.log(count) - bound)
            cases += 1
    return analysis.BoundReport("configuration_count", passed=worst <= 1e-12, detail=f"{cases} cases, max log excess {worst:.3f}")


def _binomial_tail() -> analysis.BoundReport:
    pairs = analysis.binomial_tail_pairs(64)
    failures = [p for p in pairs if not analysis.binomial_tail_holds(*p)]
    return analysis.BoundReport("binomial_tail", passed=not failures, detail=f"{len(pairs)} pairs with d > 8a, {len(failures)} failures")


UNIFORM_CASES = ((2, 2, 1), (3, 2, 2), (4, 4, 2))


def _uniform_feasible(seed: int) -> analysis.BoundReport:
    ok = True
    for (k, d, h), offset in product(UNIFORM_CASES, range(3)):
        instance, table = make_gap_instance(GadgetParams(k, d, h, seed + offset))
        x = np.full(instance.label_count, 1.0 / d)
        generic, _ = min_distinct_label_path(instance, x)
        structured, _ = gadget_min_path(instance, table, x)
        ok &= generic >= 1 - 1e-7 and structured >= 1 - 1e-7 and abs(x.sum() - k) <= 1e-9
    return analysis.BoundReport("uniform_labeling_feasible", passed=bool(ok), detail="x = 1/d on 9 gadget instances")


def _z_checks() -> list[analysis.BoundReport]:
    value = analysis.eval_log_z(4, 128, 4, 2)
    crossover = analysis.z_crossover(0.32)
    doubled = analysis.eval_log_z(4, 128, 8, 2) < value
    return [
        analysis.BoundReport("log_z_example", log_value=value, passed=abs(value - 178.41) <= 0.01),
        analysis.BoundReport(
            "log_z_crossover", passed=crossover is not None,
            detail=f"epsilon=0.32 first negative at k={crossover}",
        ),
        analysis.BoundReport("log_z_decreasing_in_h", passed=doubled),
    ]


def _exponent_checks() -> analysis.BoundReport:
    ok = True
    for eps in (0.3, 0.2, 0.1, 0.05, 0.01):
        p = derive_params(eps, 2)
        ok &= analysis.check_exponent(p.delta, p.beta, eps) and p.beta > p.delta - 1
    return analysis.BoundReport("exponent_inequality", passed=bool(ok), detail="epsilon in 0.3..0.01")


def verify_checks(trials: int, seed: int) -> list[analysis.BoundReport]:
    return [
        _dominance_grid(),
        *_monte_carlo(trials, seed),
        _configuration_count(),
        _binomial_tail(),
        _uniform_feasible(seed),
        *_z_checks(),
        _exponent_checks(),
    ]


# --- argument handling -------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="labelcut", description="Min Label s-t Cut workbench")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="write a gap instance")
    gen_sub = gen.add_subparsers(dest="family", required=True)
    gp = gen_sub.add_parser("path")
    gp.add_argument("--m", type=int, required=True)
    gp.add_argument("--out", required=True)
    gp.add_argument("--directed", action="store_true")
    gg = gen_sub.add_parser("gadget")
    gg.add_argument("--k", type=int, required=True)
    gg.add_argument("--d", type=int)
    gg.add_argument("--h", type=int)
    gg.add_argument("--epsilon", type=float, help="derive d and h from epsilon and k")
    gg.add_argument("--seed", type=int, default=0)
    gg.add_argument("--out", required=True)
    gg.add_argument("--directed", action="store_true")
    gg.add_argument("--edge-cap", type=int, default=DEFAULT_EDGE_CAP)

    se = sub.add_parser("solve-exact", help="exact minimum label cut")
    se.add_argument("instance")
    se.add_argument("--method", choices=("exhaustive", "bnb"), default="bnb")
    se.add_argument("--cap", type=int)

    sl = sub.add_parser("solve-lp", help="LP relaxation by cutting planes")
    sl.add_argument("instance")
    sl.add_argument("--variant", choices=("lp1", "lp2"), default="lp2")
    sl.add_argument("--oracle", choices=("generic", "gadget"), default="generic")
    sl.add_argument("--meta", help="gadget metadata (default: <instance>.meta.json)")
    sl.add_argument("--emit-lp", help="write the generated LP in CPLEX LP format")

    gap = sub.add_parser("gap", help="integrality gap table")
    gap.add_argument("--family", choices=("path", "gadget"), required=True)
    gap.add_argument("--m", type=int, nargs="+", default=[5, 20, 100])
    gap.add_argument("--k", type=int, nargs="+", default=[2, 3])
    gap.add_argument("--d", type=int, nargs="+", default=[2])
    gap.add_argument("--h", type=int, nargs="+", default=[1])
    gap.add_argument("--seeds", type=int, nargs="+", default=[0])
    gap.add_argument("--cap", type=int, default=8)
    gap.add_argument("--node-guard", type=int, default=10**6)
    gap.add_argument("--jobs", type=int, default=1)
    gap.add_argument("--timings", action="store_true", help="fill the timing columns (breaks byte-identity)")
    gap.add_argument("--out", help="CSV path (default stdout)")
    gap.add_argument("--records", help="JSON-lines path for full records")

    ver = sub.add_parser("verify", help="numeric checks of the gap analysis")
    ver.add_argument("--trials", type=int, default=100_000)
    ver.add_argument("--seed", type=int, default=0)
    ver.add_argument("--records", help="JSON-lines path for the bound reports")
    return parser


def _cmd_generate(args) -> int:
    if args.family == "path":
        write_instance(make_path_instance(args.m, args.directed), args.out)
        return 0
    if args.epsilon is not None:
        params = derive_params(args.epsilon, args.k, args.seed)
    elif args.d is None or args.h is None:
        raise InstanceError("gadget needs --d and --h, or --epsilon")
    else:
        params = GadgetParams(args.k, args.d, args.h, args.seed)
    instance, table = make_gap_instance(params, args.directed, args.edge_cap)
    write_instance(instance, args.out)
    table.write(metadata_path(args.out))
    return 0


def _cmd_solve_exact(args) -> int:
    instance = read_instance(args.instance)
    if args.method == "exhaustive":
        res = min_label_cut_exhaustive(instance, cap=args.cap)
    else:
        res = min_label_cut_bnb(instance)
        if args.cap is not None and res.size > args.cap:
            res = min_label_cut_exhaustive(instance, cap=args.cap)
    rec = res.record()
    print(f"opt: {rec['opt']}")
    if "witness" in rec:
        print("witness: " + " ".join(map(str, rec["witness"])))
    print(f"method: {rec['method']}")
    print(f"nodes: {rec['nodes']}")
    return 0


def _cmd_solve_lp(args) -> int:
    instance = read_instance(args.instance)
    table = None
    if args.oracle == "gadget":
        table = PermutationTable.read(args.meta or metadata_path(args.instance))
    res = solve_relaxation(instance, args.variant, args.oracle, table)
    print(f"value: {res.value:.6f}")
    print(f"status: {res.status}")
    print(f"iterations: {res.iterations}")
    print(f"active: {len(res.active)}")
    print("x: " + " ".join(f"{v:.6f}" for v in res.x))
    if args.emit_lp:
        Path(args.emit_lp).write_text(emit_lp_text(instance.label_count, res.cuts))
    return 0


def _cmd_gap(args) -> int:
    rows = run_gap(gap_tasks(args), args.jobs)
    text = gap_csv(rows, args.timings)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    if args.records:
        with open(args.records, "w") as fh:
            for row in rows:
                fh.write(json.dumps(row.record(), sort_keys=True) + "\n")
    return 0


def _cmd_verify(args) -> int:
    reports = verify_checks(args.trials, args.seed)
    for rep in reports:
        print(f"{'PASS' if rep.passed else 'FAIL'} {rep.name} {rep.detail}".rstrip())
    if args.records:
        with open(args.records, "w") as fh:
            for rep in reports:
                fh.write(json.dumps(rep.record(), sort_keys=True) + "\n")
    return 0 if all(rep.passed for rep in reports) else 1


COMMANDS = {
    "generate": _cmd_generate,
    "solve-exact": _cmd_solve_exact,
    "solve-lp": _cmd_solve_lp,
    "gap": _cmd_gap,
    "verify": _cmd_verify,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ResourceError as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return 3
    except (InstanceError, ParseError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
