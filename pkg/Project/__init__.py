"""Teleportation and remote state preparation nonlocality simulator."""
__version__ = "0.1.0"
