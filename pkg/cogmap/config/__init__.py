"""
Configuration management for cognitive-map experiments.
"""

from .manager import OUT_ENV, SECTIONS, ConfigurationManager

__all__ = ["ConfigurationManager", "OUT_ENV", "SECTIONS"]
