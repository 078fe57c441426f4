"""Belief-state engine for hidden-identity games."""

__version__ = "0.1.0"
