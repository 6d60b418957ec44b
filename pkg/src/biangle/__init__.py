"""Orthogonal polynomials on the parabolic biangle and on the square."""

__version__ = "0.1.0"
