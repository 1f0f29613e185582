"""Equivariant Euler characteristics of toric vector bundles via convex chains."""

__version__ = "0.1.0"
