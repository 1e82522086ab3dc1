"""Predicted versus observed linear stability on (S, CFL) grids.

    python scripts/stability_map.py [--out results/stability] [--n 9]

For each scheme the grid spans the region around its stated boundary; each
cell holds the verdict of the stated conditions and the measured growth of the
frozen-coefficient scheme over single Fourier modes.
"""

import argparse
import os

import numpy as np

from invburgers.stability import format_map, stability_map

RANGES = {
    "ftcs": ((0.1, 0.8), (0.2, 1.4)),
    "lax_wendroff": ((0.05, 0.6), (0.1, 1.3)),
    "crank_nicolson": ((0.1, 3.0), (0.1, 3.0)),
    "invariant": ((0.05, 0.8), (0.1, 1.3)),
}


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--out", default="results/stability")
    ap.add_argument("--n", type=int, default=9)
    ap.add_argument("--omega-tau", type=float, default=0.0)
    args = ap.parse_args()
    os.makedirs(args.out, exist_ok=True)
    for scheme, ((s0, s1), (c0, c1)) in RANGES.items():
        cells = stability_map(scheme, np.linspace(s0, s1, args.n), np.linspace(c0, c1, args.n),
                              omega_tau=args.omega_tau)
        with open(os.path.join(args.out, f"{scheme}.csv"), "w") as fh:
            fh.write(format_map(cells))
        agree = sum(c.agrees for c in cells)
        print(f"{scheme:15s} agreement {agree}/{len(cells)}")


if __name__ == "__main__":
    main()
