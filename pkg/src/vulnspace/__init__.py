"""Vulnerability-space analytics toolkit."""

__version__ = "0.1.0"
