"""Quadratic-twist vanishing statistics for elliptic curve L-functions."""

__version__ = "0.1.0"
