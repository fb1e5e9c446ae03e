"""Glauber dynamics, spectral independence and approximate counting on small spin systems."""

__version__ = "0.1.0"
