"""Numerical checks of log-supermodularity and the inequalities built on it."""

__version__ = "0.1.0"
