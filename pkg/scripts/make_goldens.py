"""Regenerate the committed goldens.

The artificial-viscosity constraint report is computed here with sympy, independently
of ``invburgers.diffalg``; the package only parses the result. Symmetry records and
closed-form modified equations are refreshed through the CLI.

    python scripts/make_goldens.py [--check]
"""

import argparse
import subprocess
import sys
from fractions import Fraction

import sympy as sp

from invburgers import diffalg as da
from invburgers.cli import c_constraints_golden_path

x, t, u, u_x, u_xx, nu, h, tau = sp.symbols("x t u u_x u_xx nu h tau")
GENS = (x, t, u, u_x, u_xx, nu, h, tau)


def oracle_rows(kappa=sp.Rational(-1, 100)):
    C = kappa * t * (t * u - x) ** 2 * u_x ** 2
    d = lambda s: sp.diff(C, s)  # noqa: E731
    return [
        ("space translation", [d(x)]),
        ("time translation", [d(t)]),
        ("dilatation (b)", [x * d(x) + 2 * t * d(t) - u * d(u) + h * d(h) + 2 * tau * d(tau)]),
        ("projective", [d(x), d(u), d(u_xx), t ** 2 * d(t) + 2 * d(u_x)]),
        ("galilean", [d(u) + t * d(x)]),
        ("dilatation (f)", [-t * d(t) + u * d(u) + nu * d(nu) - tau * d(tau)]),
    ]


def to_package_text(expr) -> str:
    """Print a sympy polynomial in the package's ``c*sym^e`` syntax."""
    expr = sp.expand(expr)
    if expr == 0:
        return "0"
    terms = []
    for monom, coeff in sp.Poly(expr, *GENS).terms():
        c = Fraction(int(coeff.p), int(coeff.q))
        factors = [str(s) if e == 1 else f"{s}^{e}" for s, e in zip(GENS, monom) if e]
        body = "*".join([str(abs(c))] + factors)
        terms.append(("- " if c < 0 else "+ ") + body)
    return " ".join(terms).removeprefix("+ ")


def constraint_golden() -> str:
    lines = []
    for name, residuals in oracle_rows():
        polys = [da.from_text(to_package_text(r)) for r in residuals]
        verdict = "zero" if all(p.is_zero() for p in polys) else "nonzero"
        lines.append(f"{name}\t{verdict}\t" + " ; ".join(da.to_text(p) for p in polys))
    return "\n".join(lines) + "\n"


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--check", action="store_true", help="compare instead of writing")
    args = ap.parse_args()
    text = constraint_golden()
    path = c_constraints_golden_path()
    if args.check:
        ok = path.read_text() == text
        print(f"{path.name}: {'ok' if ok else 'MISMATCH'}")
        return 0 if ok else 3
    path.write_text(text)
    print(f"wrote {path}")
    run = [sys.executable, "-m", "invburgers"]
    subprocess.run(run + ["check-symmetries", "--set", "all", "--target", "all", "--update-goldens"],
                   check=True, stdout=subprocess.DEVNULL)
    for scheme in ("ftcs", "lax_wendroff", "crank_nicolson", "high_order", "invariant"):
        subprocess.run(run + ["modified-equation", "--scheme", scheme, "--update-goldens"],
                       check=True, stdout=subprocess.DEVNULL)
    return 0


if __name__ == "__main__":
    sys.exit(main())
