"""Projection methods and Douglas-Rachford variants for feasibility problems."""

__version__ = "0.1.0"

from .core import (InnerProduct, SolveReport, Status, StoppingPolicy, inner,
                   iterate, norm)
from .errors import *  # noqa: F401,F403
from .kernels import BACKEND

__all__ = ["InnerProduct", "SolveReport", "Status", "StoppingPolicy", "inner",
           "iterate", "norm", "BACKEND", "__version__"]
