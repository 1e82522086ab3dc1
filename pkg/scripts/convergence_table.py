"""Observed orders of accuracy for every scheme and probe.

    python scripts/convergence_table.py [--out results/convergence] [--levels 4]
"""

import argparse
import os

from invburgers.harness import convergence_study, default_convergence_spec, format_convergence
from invburgers.schemes import SCHEMES


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--out", default="results/convergence")
    ap.add_argument("--levels", type=int, default=4)
    args = ap.parse_args()
    os.makedirs(args.out, exist_ok=True)
    summary = ["scheme,probe,reference,finest_order"]
    for scheme in SCHEMES:
        for probe in ("spatial", "temporal"):
            spec = default_convergence_spec(scheme, probe, args.levels)
            rows = convergence_study(spec)
            with open(os.path.join(args.out, f"{scheme}_{probe}.csv"), "w") as fh:
                fh.write(format_convergence(rows))
            order = rows[-1].order
            summary.append(f"{scheme},{probe},{spec.reference},{'' if order is None else f'{order:.4f}'}")
            print(f"{scheme:15s} {probe:8s} {spec.reference:12s} order {order:.3f}")
    with open(os.path.join(args.out, "summary.csv"), "w") as fh:
        fh.write("\n".join(summary) + "\n")


if __name__ == "__main__":
    main()
