"""Quiver algebras of ADE type, their representations, and the fibered threefolds they resolve."""

__version__ = "0.1.0"
