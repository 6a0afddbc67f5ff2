"""Exact operator calculus on cyclic chains of free algebras."""

__version__ = "0.1.0"
