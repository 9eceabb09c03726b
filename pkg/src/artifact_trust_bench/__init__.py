"""Artifact Trust Bench

Perturbation-aligned benchmark construction and structured trust-trace
evaluation for method/Javadoc/test artifact bundles.
"""

from .cli import main

__version__ = "0.3.0"

__all__ = ["main", "__version__"]
