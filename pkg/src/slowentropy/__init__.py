"""Empirical Hamming covering numbers and slow entropy for constructed systems."""
__version__ = "0.1.0"
