"""Integrated density of states for random operators on Z^d-periodic graphs."""

__version__ = "0.1.0"
