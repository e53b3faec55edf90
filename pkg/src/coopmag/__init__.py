"""Cooperative dynamics of spin-qubit arrays coupled through a magnon bath."""

__version__ = "0.1.0"
