"""Exact supersaturation, chain-distribution and container computations for
the boolean lattice, subspace lattices and the grid posets {0,...,r}^n."""

__version__ = "0.1.0"
