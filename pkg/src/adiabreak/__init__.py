"""Solvable model of adiabatic-approximation breakdown for scaled harmonic oscillators."""

__version__ = "0.1.0"
