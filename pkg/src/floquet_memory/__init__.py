"""Decohered Floquet-code memory: simulation, decoding and information diagnostics."""

__version__ = "0.1.0"
