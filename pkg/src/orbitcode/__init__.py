"""Orbit decision and Borel-code synthesis for finite permutation-group actions."""

__version__ = "0.1.0"
