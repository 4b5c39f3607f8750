"""Differential geometry of level sets from third-order derivative jets."""

__version__ = "0.1.0"
