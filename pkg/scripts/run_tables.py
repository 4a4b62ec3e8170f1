#!/usr/bin/env python3
"""Regenerate the convergence tables for every config under configs/.

    python3 scripts/run_tables.py --jobs 4 --out out
    python3 scripts/run_tables.py --only s1_resonant --references-only

References are cached (see --cache-dir / SPLITDIRAC_CACHE_DIR), so a second
run only re-evaluates the table cells.
"""
import argparse
import logging
import sys
import time
from pathlib import Path

from splitdirac.harness import ReferenceCache, emit, run_experiment
from splitdirac.harness.config import load_plan
from splitdirac.harness.experiment import plan_reference

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--only", nargs="*", help="config stems to run (default: all)")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", type=Path, default=Path("out"))
    p.add_argument("--format", choices=["csv", "markdown"], default="markdown")
    p.add_argument("--cache-dir", type=Path)
    p.add_argument("--references-only", action="store_true")
    args = p.parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(message)s")

    paths = sorted(CONFIGS.glob("*.toml"))
    if args.only:
        paths = [q for q in paths if q.stem in args.only]
        if not paths:
            p.error(f"no configs named {args.only}")
    cache = ReferenceCache(args.cache_dir)
    for path in paths:
        plan = load_plan(path)
        t0 = time.perf_counter()
        if args.references_only:
            for eps in plan.eps:
                plan_reference(plan, eps, cache)
        else:
            table = run_experiment(plan, cache, jobs=args.jobs)
            for out in emit(table, args.format, args.out, plan.name):
                print(out)
        print(f"{path.stem}: {time.perf_counter() - t0:.0f} s", file=sys.stderr)


if __name__ == "__main__":
    main()
