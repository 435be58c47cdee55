"""Exact symbolic engine for integral Riemann-Roch formulas of closed immersions."""

__version__ = "0.1.0"
