"""Fuchsian series of holomorphic quadratic differentials on the hyperbolic disc."""

__version__ = "0.1.0"
