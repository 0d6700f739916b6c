"""Exact arithmetic, residue sieves and symbol computations for Fermat's
equation over Q(sqrt 5) and Q(sqrt 17)."""

__version__ = "0.1.0"
