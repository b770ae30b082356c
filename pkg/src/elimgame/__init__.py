"""Symmetric N-player elimination game: closed-form equilibrium, solver, simulator."""

__version__ = "0.1.0"
