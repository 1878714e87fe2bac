"""Sentiment and topic analytics for short-text corpora."""

__version__ = "0.1.0"
