"""Synthetic runway-approach scenario generation and automatic corner annotation."""

__version__ = "0.1.0"
