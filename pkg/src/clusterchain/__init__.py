"""Cluster-state spin chains with Ising couplings and local fields.

Exact free-fermion solution, dense reference simulator, matrix product
states, variational ground-state search, Monte Carlo localizable
entanglement and disentangling measurements.
"""

from .params import ChainParams

__version__ = "0.1.0"

__all__ = ["ChainParams", "__version__"]
