"""Action-dependent Lagrangians: derivation, simulation and verification."""

__version__ = "0.1.0"
