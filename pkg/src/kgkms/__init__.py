"""Finite k-graphs, their Toeplitz algebras, and KMS states with spatial measures."""

__version__ = "0.1.0"
