"""QDDC requirement compilation, guided safety-game synthesis and analysis."""

__version__ = "0.1.0"
