"""Finite-depth construction of a proper holomorphic embedding of the
complement of a Cantor set in the Riemann sphere into C^2.

The construction is driven by a tower of rational functions built from
rational shears; every finite-depth inequality is checked numerically.
"""

__version__ = "0.1.0"
