"""Rank of edge-weighted configuration-model adjacency matrices."""

__version__ = "0.1.0"
