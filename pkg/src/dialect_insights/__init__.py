"""Batch analytics for dialectal social-media text."""

__version__ = "0.1.0"
