"""Numerical toolkit for regular (non-semisimple) Frobenius structures.

Taylor-jet automatic differentiation, David-Hertling coordinate data,
tensor residuals of the Frobenius axioms, a catalog of closed-form families
in dimensions 2-4, and the Painleve VI pipeline for the semisimple 3d case.
"""

__version__ = "0.1.0"
