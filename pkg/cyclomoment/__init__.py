"""
Negative square moments of Dirichlet L-functions and the log-cyclotomic-unit lattice
"""

__version__ = "0.1.0"
