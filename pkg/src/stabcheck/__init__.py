"""Topological obstructions to continuous feedback stabilization of x' = f(x, u)."""

__version__ = "0.1.0"
