"""Simulator and verification lab for a steering-based quantum bit commitment protocol."""

__version__ = "0.1.0"
