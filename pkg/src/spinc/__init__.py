"""Exact and numerical verification of Spin^c twistor geometry."""

__version__ = "0.1.0"
