"""Exact geometry, cell graphs and energy computations for carpet-like fractals.

Submodules are imported on demand so that ``LSC_THREADS`` can take effect
before numpy loads.
"""

__version__ = "0.1.0"
