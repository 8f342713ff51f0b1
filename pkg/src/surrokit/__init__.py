"""Surrogate-assisted many-task optimization toolkit."""

__version__ = "0.1.0"
