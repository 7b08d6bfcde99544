"""Graph polynomials, power counting and parametric integration for graphical functions."""

__version__ = "0.1.0"
