"""Pseudospectral laboratory for truncated and subcritical approximations of
the 1D defocusing (stochastic) mass-critical NLS."""

__version__ = "0.1.0"
