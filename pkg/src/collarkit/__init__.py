"""Comparison-geometry toolkit for collar bounds on surfaces with curvature bounded below."""

__version__ = "0.1.0"
