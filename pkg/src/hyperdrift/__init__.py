"""Numerical laboratory for random products of isometries of hyperbolic spaces."""
__version__ = "0.1.0"
