"""Exact verification of unit-distance rigidity claims on finite planar configurations."""

__version__ = "0.1.0"
