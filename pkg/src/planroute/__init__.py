"""Compact (1+eps)-stretch routing schemes on weighted embedded planar graphs."""

__version__ = "0.1.0"
