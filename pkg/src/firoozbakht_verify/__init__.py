"""Rigorous desk-scale checks around Firoozbakht's conjecture on p_n^(1/n)."""

__version__ = "0.1.0"
