"""Guesswork-based leakage measures for discrete sources."""

__version__ = "0.1.0"
