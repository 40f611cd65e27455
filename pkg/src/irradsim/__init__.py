"""Empirical-stochastic simulation of daily solar irradiance."""

__version__ = "0.1.0"
