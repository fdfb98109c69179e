"""Entanglement of two oscillators through a common bosonic bath."""
from ._accel import backend
from .bath import BathSpec
from .gaussian import SystemParams, log_negativity

__all__ = ["BathSpec", "SystemParams", "backend", "log_negativity"]
__version__ = "0.1.0"
