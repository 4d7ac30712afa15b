"""Command line: ``erica-sim sim|fluid|oracle``.

Exit status is 0 on success, 1 when a run misses its acceptance thresholds
(or a fluid study misses its cycle budget), 2 on usage, parse or I/O errors.
"""

from __future__ import annotations

import argparse
import csv
import os
import statistics
import sys
from typing import List, Optional

from . import fluid
from .errors import ScenarioError
from .maxmin import solve
from .netsim.engine import Simulator
from .netsim.metrics import REPORT_TXT, summarize, write_csvs
from .scenario import apply_overrides, resolve
from .units import APPLICATION_FACTOR, cells_to_mbps

OUT_DIR_ENV = "ERICA_OUT_DIR"
DEFAULT_OUT_DIR = "erica-out"

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _out_dir(arg: Optional[str]) -> str:
    return arg or os.environ.get(OUT_DIR_ENV) or DEFAULT_OUT_DIR


def _load(name, overrides=()):
    scenario = resolve(name)
    return apply_overrides(scenario, list(overrides))


def cmd_sim(args) -> int:
    overrides = list(args.set or [])
    if args.duration is not None:
        overrides.append(f"run.duration={args.duration}")
    if args.seed is not None:
        overrides.append(f"run.seed={args.seed}")
    scenario = _load(args.scenario, overrides)
    sim = Simulator(scenario)
    log = sim.run()
    report = summarize(log, scenario.acceptance)
    out = _out_dir(args.out)
    write_csvs(log, out)
    text = report.to_text()
    with open(os.path.join(out, REPORT_TXT), "w", encoding="utf-8") as fh:
        fh.write(text)
    sys.stdout.write(text)
    return EXIT_OK if report.passed else EXIT_FAIL


def _parse_caps(text):
    if not text:
        return None
    caps = []
    for item in text.split(","):
        item = item.strip().lower()
        caps.append(None if item in ("", "none", "-") else float(item))
    return caps


def cmd_fluid(args) -> int:
    try:
        ns = [int(x) for x in args.n.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"--n wants comma-separated integers, got {args.n!r}")
    if any(n < 1 for n in ns) or args.seeds < 1:
        raise argparse.ArgumentTypeError("need n >= 1 and seeds >= 1")
    caps = _parse_caps(args.caps)
    runs = fluid.convergence_study(ns, args.seeds, delta=args.delta, caps=caps,
                                   max_cycles=args.max_cycles, seed_base=args.seed_base)
    out = _out_dir(args.out)
    os.makedirs(out, exist_ok=True)
    with open(os.path.join(out, "fluid_seeds.csv"), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["n", "seed", "converged", "cycles", "matches_oracle"])
        for r in runs:
            w.writerow([r.n, r.seed, int(r.converged), "" if r.cycles is None else r.cycles,
                        int(r.matches_oracle)])
    scaled = None if caps is None else [None if c is None else c * 100.0 for c in caps]
    for n in ns:
        s0 = fluid.random_initial_state(n, args.seed_base, 100.0, scaled)
        run = fluid.run_until_converged(s0, args.delta, args.max_cycles)
        with open(os.path.join(out, f"fluid_cycles_n{n}.csv"), "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["cycle", "z", "min_rate", "max_rate", "fairness_index", "in_region"])
            for c, z, lo, hi, fi, inside in fluid.cycle_rows(run, args.delta):
                w.writerow([c, format(z, ".9g"), format(lo, ".9g"), format(hi, ".9g"),
                            format(fi, ".9g"), int(inside)])

    print("n,runs,converged,matches_oracle,median_cycles,max_cycles")
    medians = []
    failed = [r for r in runs if not r.converged]
    for n in ns:
        rs = [r for r in runs if r.n == n]
        cycles = [r.cycles for r in rs if r.converged]
        med = statistics.median(cycles) if cycles else float("nan")
        medians.append(med)
        print(f"{n},{len(rs)},{len(cycles)},{sum(r.matches_oracle for r in rs)},"
              f"{med:g},{max(cycles) if cycles else ''}")
    if len(ns) >= 2 and not failed:
        c1, c2, res = fluid.fit_log_scaling(ns, medians)
        print(f"# fit: median_cycles = {c1:.4f} * log2(n) + {c2:.4f}; "
              f"max |residual| = {max(abs(x) for x in res):.4f}")
    for r in failed:
        print(f"# no convergence within {args.max_cycles} cycles: n={r.n} seed={r.seed}",
              file=sys.stderr)
    return EXIT_FAIL if failed else EXIT_OK


def cmd_oracle(args) -> int:
    scenario = _load(args.scenario, args.set or [])
    alloc = solve(scenario.to_maxmin_problem())
    print("vc_id,rate_mbps,application_mbps,bottleneck")
    for vc, rate in alloc.rates.items():
        mbps = cells_to_mbps(rate)
        print(f"{vc},{mbps:.9g},{mbps * APPLICATION_FACTOR:.9g},{alloc.bottleneck_link[vc]}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="erica-sim",
                                     description="ERICA explicit-rate switch simulations and checks.")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("sim", help="run the cell-level simulator")
    sim.add_argument("scenario", help="built-in name (gfc2, varcap, single) or scenario file")
    sim.add_argument("--duration", type=float, help="simulated seconds (overrides run.duration)")
    sim.add_argument("--seed", type=int, help="random seed (overrides run.seed)")
    sim.add_argument("--out", help=f"output directory (default ${OUT_DIR_ENV} or {DEFAULT_OUT_DIR})")
    sim.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE",
                     help="override a scenario value; repeatable")
    sim.set_defaults(func=cmd_sim)

    fl = sub.add_parser("fluid", help="fluid-model convergence study")
    fl.add_argument("--n", default="2,4,8,16,32,64,128", help="comma-separated source counts")
    fl.add_argument("--seeds", type=int, default=1000)
    fl.add_argument("--seed-base", type=int, default=0)
    fl.add_argument("--delta", type=float, default=0.1)
    fl.add_argument("--caps", help="per-source caps as fractions of capacity, e.g. 0.05,none")
    fl.add_argument("--max-cycles", type=int, default=100, help="cycle budget per run")
    fl.add_argument("--out", help=f"output directory (default ${OUT_DIR_ENV} or {DEFAULT_OUT_DIR})")
    fl.set_defaults(func=cmd_fluid)

    orc = sub.add_parser("oracle", help="print max-min rates for a scenario")
    orc.add_argument("scenario")
    orc.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE")
    orc.set_defaults(func=cmd_oracle)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except argparse.ArgumentTypeError as exc:
        parser.error(str(exc))
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
