"""Command-line interface for dirac-darboux."""

from dirac_darboux.cli.main import main

__all__ = ["main"]
