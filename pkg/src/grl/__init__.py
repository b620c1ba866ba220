"""Exact growth-rate algebra, group presentations and handle ledgers."""

__version__ = "0.1.0"
