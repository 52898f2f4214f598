"""Transition amplitude densities for retarded/advanced wavefunction pairs."""

__version__ = "0.1.0"
