"""Quasi-convexity and long-time action stability for central-force Hamiltonians."""

from .potentials import (
    CentralPotential, Homogeneous, PowerSum, LennardJones, ScreenedCoulomb,
    kepler, harmonic, from_record, admissible_window, AdmissibleWindow,
)

__version__ = "0.1.0"
