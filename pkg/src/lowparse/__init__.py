"""Treebank tools and a transition-based parser for low-resource dependency parsing."""

__version__ = "0.1.0"
