"""Moments-corrected energies and Hellmann-Feynman dipole moments."""
__version__ = "0.1.0"
