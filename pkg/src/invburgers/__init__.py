"""Symmetry-preserving finite-difference schemes for the viscous Burgers equation.

Modules: ``diffalg`` (exact differential polynomials), ``symmetry`` (generators and
on-shell invariance), ``modeq`` (stencils and modified equations), ``problems``
(exact solutions and frames), ``schemes`` (time steppers), ``stability`` (linear
stability and run monitoring) and ``harness`` (configs, runs, comparisons).
"""

__version__ = "0.1.0"
