"""Composition operators on the Dirichlet space and logarithmic capacity on the circle."""

__version__ = "0.1.0"
