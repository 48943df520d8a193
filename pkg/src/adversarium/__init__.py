"""Adversary bounds, span programs, learning graphs and quantum walks at desk scale."""

__version__ = "0.1.0"
