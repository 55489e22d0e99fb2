"""Monitoring of agent teams by watching the relationships between members."""

__version__ = "0.1.0"
