"""Counting rational points near plane curves with exact arithmetic."""

__version__ = "0.1.0"
