"""Command-line entry point ``splitdirac``.

Subcommands: simulate, converge, check-resonance, reference.
Exit codes: 0 success, 1 usage/config error, 2 numerical failure, 3 I/O error.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from dataclasses import replace
from pathlib import Path

from ..observables import observables
from ..resonance import DEFAULT_DELTA, ResonanceSpec, interval_index, is_non_resonant, nearest_non_resonant
from ..schemes import NumericalFailure, PhysicsParams, SchemeRun, evolve
from .cache import ReferenceCache
from .config import (ConfigError, _grid_from, _initial_from, _num, _potential_from, initial_field,
                     load_plan, load_toml, parse_potential)
from .experiment import plan_reference, run_experiment
from .expression import EvaluationError, ParseError
from .tables import emit

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL, EXIT_IO = 0, 1, 2, 3

log = logging.getLogger("splitdirac")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="splitdirac", description="Time-splitting Fourier pseudospectral solvers for the 1D NLDE")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("simulate", help="run one scheme and write the final field and observables")
    s.add_argument("--config", type=Path)
    s.add_argument("--scheme", choices=["S1", "S2"])
    s.add_argument("--eps")
    s.add_argument("--tau")
    s.add_argument("--T", dest="T")
    s.add_argument("--steps", type=int)
    s.add_argument("--a")
    s.add_argument("--b")
    s.add_argument("--M", type=int)
    s.add_argument("--lambda1")
    s.add_argument("--lambda2")
    s.add_argument("--potential", help="zero, rational ((x-1)/(x^2+1)) or an expression in x")
    s.add_argument("--out", type=Path, default=Path("out"))

    c = sub.add_parser("converge", help="run an experiment plan and emit convergence tables")
    r = sub.add_parser("reference", help="prebuild the reference-solution cache for a plan")
    for q in (c, r):
        q.add_argument("--config", type=Path, required=True)
        q.add_argument("--jobs", type=int, default=1)
        q.add_argument("--tau-e", dest="tau_e")
        q.add_argument("--cache-dir", type=Path, help="overrides $SPLITDIRAC_CACHE_DIR")
    c.add_argument("--out", type=Path)
    c.add_argument("--delta")
    c.add_argument("--format", choices=["csv", "markdown"])

    k = sub.add_parser("check-resonance", help="classify a step size against A_delta(eps)")
    k.add_argument("--tau", required=True)
    k.add_argument("--eps", required=True)
    k.add_argument("--delta", default=str(DEFAULT_DELTA))
    return p


def _simulate(args) -> int:
    cfg = load_toml(args.config) if args.config else {}
    run_cfg = cfg.get("run", {})
    grid_cfg = dict(cfg.get("grid", {}))
    for key in ("a", "b", "M"):
        if getattr(args, key) is not None:
            grid_cfg[key] = getattr(args, key)
    grid = _grid_from(grid_cfg).build()
    phys = dict(cfg.get("physics", {}))
    for key in ("lambda1", "lambda2", "potential"):
        if getattr(args, key) is not None:
            phys[key] = getattr(args, key)
    eps = _num(args.eps if args.eps is not None else run_cfg.get("eps", 1.0), "eps")
    tau = _num(args.tau if args.tau is not None else run_cfg.get("tau", 0.01), "tau")
    scheme = args.scheme or run_cfg.get("scheme", "S2")
    potential = parse_potential(_potential_from(phys.get("potential")), grid)
    params = PhysicsParams(eps, _num(phys.get("lambda1", 1.0), "lambda1"), _num(phys.get("lambda2", 0.0), "lambda2"),
                           potential)
    init = initial_field(_initial_from(cfg.get("initial")), grid)
    steps = args.steps if args.steps is not None else run_cfg.get("steps")
    if steps is None:
        T = _num(args.T if args.T is not None else run_cfg.get("T", 1.0), "T")
        run = SchemeRun.to_time(scheme, tau, T, params, init)
    else:
        run = SchemeRun(scheme, tau, int(steps), params, init)
    res = evolve(run)
    ob = observables(res.field, params)
    args.out.mkdir(parents=True, exist_ok=True)
    with open(args.out / "field.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "re_phi1", "im_phi1", "re_phi2", "im_phi2"])
        for x, p1, p2 in zip(grid.x, res.field.phi1, res.field.phi2):
            w.writerow([repr(float(x)), repr(p1.real), repr(p1.imag), repr(p2.real), repr(p2.imag)])
    summary = {"scheme": scheme, "eps": eps, "tau": tau, "steps": run.steps, "T": run.final_time,
               "mass": ob.mass, "initial_mass": init.norm(), "max_mass_drift": res.max_mass_drift,
               "energy": ob.energy}
    (args.out / "observables.json").write_text(json.dumps(summary, indent=2) + "\n")
    print(json.dumps(summary))
    return EXIT_OK


def _plan_from_args(args):
    plan = load_plan(args.config)
    over = {}
    if args.tau_e is not None:
        over["tau_e"] = _num(args.tau_e, "--tau-e")
    if getattr(args, "out", None) is not None:
        over["out_dir"] = str(args.out)
    if getattr(args, "format", None) is not None:
        over["format"] = args.format
    if getattr(args, "delta", None) is not None:
        over["tau_rule"] = replace(plan.tau_rule, delta=_num(args.delta, "--delta"))
    return plan.with_overrides(**over)


def _converge(args) -> int:
    plan = _plan_from_args(args)
    cache = ReferenceCache(args.cache_dir)
    table = run_experiment(plan, cache, jobs=args.jobs)
    paths = emit(table, plan.format, plan.out_dir, plan.name)
    for p in paths:
        print(p)
    if any(r.failure and "NumericalFailure" in r.failure for r in table.records):
        return EXIT_NUMERICAL
    return EXIT_OK


def _reference(args) -> int:
    plan = _plan_from_args(args)
    cache = ReferenceCache(args.cache_dir)
    for e in plan.eps:
        plan_reference(plan, e, cache)
        print(f"eps={e!r} reference ready in {cache.dir}")
    return EXIT_OK


def _check_resonance(args) -> int:
    tau, eps, delta = _num(args.tau, "--tau"), _num(args.eps, "--eps"), _num(args.delta, "--delta")
    spec = ResonanceSpec(eps, delta)
    member = is_non_resonant(tau, spec)
    print(json.dumps({"tau": tau, "eps": eps, "delta": delta, "non_resonant": member,
                      "nearest_non_resonant": nearest_non_resonant(tau, spec),
                      "interval_index": interval_index(tau, spec),
                      "sin_2tau_over_eps2": math.sin(2 * tau / eps**2)}))
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    handlers = {"simulate": _simulate, "converge": _converge, "reference": _reference,
                "check-resonance": _check_resonance}
    try:
        return handlers[args.command](args)
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ConfigError, ParseError, EvaluationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
