"""Continuous-variable simulation of exponential-swap based quantum machine learning subroutines."""

__version__ = "0.1.0"
