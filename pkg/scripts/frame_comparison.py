"""Frame-sensitivity table and figures for the three comparison configurations.

    python scripts/frame_comparison.py [--out results/frames] [--t-window 5]

Writes ``frames.csv`` (per scheme and configuration: max l2 in each frame and
``rho``) plus one error plot per frame and configuration.
"""

import argparse
import os

from invburgers.harness import COMPARISON_SCHEMES, frame_comparison
from invburgers.outputs import emit_comparison

CONFIGS = [(2.0, 0.04), (2.0, 0.08), (3.0, 0.08)]


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--out", default="results/frames")
    ap.add_argument("--t-window", type=float, default=5.0)
    ap.add_argument("--nx", type=int, default=201)
    ap.add_argument("--workers", type=int)
    args = ap.parse_args()
    os.makedirs(args.out, exist_ok=True)
    rows = ["re_h,cfl,scheme,max_l2_F1,max_l2_F2,rho"]
    for re_h, cfl in CONFIGS:
        fc = frame_comparison(re_h, cfl, nx=args.nx, t_window=args.t_window, workers=args.workers)
        for s in COMPARISON_SCHEMES:
            rows.append(f"{re_h:g},{cfl:g},{s},{fc.max_f1[s]:.17g},{fc.max_f2[s]:.17g},{fc.rho[s]:.17g}")
        tag = f"re{re_h:g}_cfl{cfl:g}"
        for which in ("F1", "F2"):
            runs = {s: r for (s, w), r in fc.results.items() if w == which}
            emit_comparison(runs, args.out, f"{tag}_{which}", t_max=args.t_window)
        print(f"Re_h={re_h:g} CFL={cfl:g}: " + ", ".join(f"{s} {fc.rho[s]:.3f}" for s in COMPARISON_SCHEMES))
    with open(os.path.join(args.out, "frames.csv"), "w") as fh:
        fh.write("\n".join(rows) + "\n")


if __name__ == "__main__":
    main()
