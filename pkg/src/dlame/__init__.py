"""Discrete conjugate nets, circular nets and discrete Lame systems."""

__version__ = "0.1.0"

from .clifford import Algebra, algebra

__all__ = ["Algebra", "algebra", "__version__"]
