"""Molecular ground-state preparation on an exact statevector simulator.

Two routes to the same target: digitized adiabatic evolution assisted by
counter-diabatic driving, and variational search with ansatzes built
from the approximate adiabatic gauge potential.
"""

__version__ = "0.1.0"

CHEMICAL_ACCURACY = 1.5936e-3  # Hartree, 1 kcal/mol
