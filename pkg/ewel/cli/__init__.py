"""
ewel CLI - run experiments, inspect models, validate configs and plot sweeps.
"""

from .main import app

__all__ = ["app"]
