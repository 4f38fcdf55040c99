"""Deterministic discrete-event simulator for multi-drone edge offloading."""

__version__ = "1.0.0"
