"""Exact stress spaces and stress algebras for realized simplicial complexes."""

__version__ = "0.1.0"
