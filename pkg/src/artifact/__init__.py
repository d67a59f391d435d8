"""Random matrix products, their SDE limits and strip eigenvalue statistics."""

__version__ = "0.1.0"
