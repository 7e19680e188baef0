"""Dispersive estimates and the discrete Schrödinger flow on the honeycomb lattice."""

__version__ = "0.1.0"
