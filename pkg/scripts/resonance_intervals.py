#!/usr/bin/env python3
"""Data for picturing the non-resonant step set A_delta(eps) on [0, tau_max].

Writes two CSVs: the non-resonant intervals (k, lo, hi) clipped to the
window, and a sampled trace of |sin(2 tau/eps^2)| with the membership flag.
Plot them with any external tool.

    python3 scripts/resonance_intervals.py --eps 1 0.5 --delta 0.15 --tau-max 4 --out out/resonance
"""
import argparse
import csv
import math
from pathlib import Path

import numpy as np

from splitdirac.resonance import DEFAULT_DELTA, ResonanceSpec, is_non_resonant


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--eps", type=float, nargs="+", default=[1.0, 0.5])
    p.add_argument("--delta", type=float, default=DEFAULT_DELTA)
    p.add_argument("--tau-max", type=float, default=4.0)
    p.add_argument("--samples", type=int, default=4001)
    p.add_argument("--out", type=Path, default=Path("out/resonance"))
    args = p.parse_args(argv)
    args.out.mkdir(parents=True, exist_ok=True)

    with open(args.out / "intervals.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["eps", "delta", "k", "lo", "hi"])
        for eps in args.eps:
            spec = ResonanceSpec(eps, args.delta)
            for k in range(math.ceil(args.tau_max / spec.period) + 1):
                lo, hi = spec.interval(k)
                if lo < args.tau_max:
                    w.writerow([eps, args.delta, k, repr(lo), repr(min(hi, args.tau_max))])

    taus = np.linspace(args.tau_max / args.samples, args.tau_max, args.samples)
    with open(args.out / "trace.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["eps", "tau", "abs_sin", "non_resonant"])
        for eps in args.eps:
            spec = ResonanceSpec(eps, args.delta)
            for t in taus:
                w.writerow([eps, repr(float(t)), f"{abs(math.sin(2 * t / eps**2)):.6f}",
                            int(is_non_resonant(float(t), spec))])
    print(args.out / "intervals.csv")
    print(args.out / "trace.csv")


if __name__ == "__main__":
    main()
