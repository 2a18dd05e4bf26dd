"""Numerical laboratory for Besov/Triebel-Lizorkin-type spaces built on a general quasi-normed lattice."""

__version__ = "0.1.0"
