"""HTTP service wrapping the solver, oracles and sweeps."""

from .app import create_app

__all__ = ["create_app"]
