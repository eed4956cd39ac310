"""High-order asymptotic-preserving kinetic residual-distribution solver."""

__version__ = "0.1.0"
