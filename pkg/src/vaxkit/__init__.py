"""Vaccine-concern classification toolkit for social-media posts."""

__version__ = "0.1.0"

__all__ = ["__version__"]
