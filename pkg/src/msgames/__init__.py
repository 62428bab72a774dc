"""Multi-structural game engine for linear orders and binary strings."""

__version__ = "0.1.0"
