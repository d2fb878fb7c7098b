"""Certified integration and symbolic dynamics of the Sitnikov problem."""

__version__ = "0.1.0"
