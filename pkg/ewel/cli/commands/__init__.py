"""CLI Commands"""

from . import models, plot, run, validate

__all__ = ["models", "plot", "run", "validate"]
