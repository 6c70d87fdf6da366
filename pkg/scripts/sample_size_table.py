"""Majority sample size needed for a target accuracy, as a function of z = (xbar - mu) / sigma.

    python3 scripts/sample_size_table.py --epsilon 0.1
"""
import argparse
import sys

import numpy as np

from rarelogit import plan_sample_size, sigma_1d_gaussian


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--z-max", type=float, default=4.0)
    p.add_argument("--step", type=float, default=0.5)
    args = p.parse_args(argv)
    print(f"{'z':>5} {'sigma^2 limit':>14} {'N':>20}")
    for z in np.arange(0.0, args.z_max + args.step / 2, args.step):
        plan = plan_sample_size(float(z), 0.0, 1.0, args.epsilon)
        mark = " (saturated)" if plan.saturated else ""
        print(f"{z:>5.2f} {sigma_1d_gaussian(float(z), 0.0, 1.0):>14.6g} {plan.N:>20}{mark}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
