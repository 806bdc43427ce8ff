"""Residual entropy of Eulerian orientations: exact counts, sampling, bounds."""

from ._accel import backend
from .errors import ConvergenceError, GraphError, IceEntropyError, ResourceLimitError
from .graph import Graph, read_graph, write_graph

__version__ = "0.1.0"

__all__ = [
    "Graph",
    "read_graph",
    "write_graph",
    "backend",
    "IceEntropyError",
    "GraphError",
    "ResourceLimitError",
    "ConvergenceError",
    "__version__",
]
