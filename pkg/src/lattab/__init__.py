"""Energies, derivatives and stability of 3-D Bravais lattices at fixed volume."""

__version__ = "0.1.0"
