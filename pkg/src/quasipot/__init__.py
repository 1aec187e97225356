"""Quasi-convex potentials from sampled cyclically quasi-monotone fields."""

__version__ = "0.1.0"
