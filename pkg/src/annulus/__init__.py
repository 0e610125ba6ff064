"""Gain-sparse graphs on the annulus: counts, inductive moves, and geometric realizers."""

__version__ = "0.1.0"
