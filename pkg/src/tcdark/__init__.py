"""Simulation engine for dark-state stability under slow deformation of
Tavis-Cummings Hamiltonians: one cavity, coupled cavities with photon
hopping, and the atom-tunneling variant."""

__version__ = "0.1.0"
