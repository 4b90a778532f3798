"""Evolvable Hebbian plasticity for swarm source localisation."""

__version__ = "0.1.0"
