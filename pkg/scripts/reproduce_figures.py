"""ECDF data for standardized slopes at xbar = 1 and xbar = 2.

Writes one directory per xbar, each holding summary.csv and ecdf_N{N}.csv
(columns value, ecdf, theoretical_cdf) ready for plotting.

    python3 scripts/reproduce_figures.py --out results/figures --seed 0
"""
import argparse
import sys
from pathlib import Path

from rarelogit.cli import main as cli_main


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--out", default="results/figures")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--replicates", type=int, default=100)
    p.add_argument("--n-grid", default="100,200,500,1000,5000")
    p.add_argument("--workers", type=int, default=1)
    args = p.parse_args(argv)
    for xbar in ("1", "2"):
        out = Path(args.out) / f"xbar_{xbar}"
        print(f"== xbar = {xbar} -> {out}")
        code = cli_main(["simulate", "--mu", "0", "--sigma", "1", "--xbar", xbar,
                         "--n-grid", args.n_grid, "--replicates", str(args.replicates),
                         "--seed", str(args.seed), "--workers", str(args.workers),
                         "--format", "csv", "--out", str(out)])
        if code:
            return code
    return 0


if __name__ == "__main__":
    sys.exit(main())
