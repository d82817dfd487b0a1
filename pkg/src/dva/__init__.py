"""Exact computer algebra for a two-parameter deformed Virasoro algebra.

Subpackages cover the exact coefficient arithmetic, partition combinatorics,
symmetric functions with Hall-Littlewood and Milne bases, the algebra rewrite
engines with Verma-module Gram and Kac determinant machinery, the free-field
(boson) realization, and a command line front end.
"""

__version__ = "0.1.0"
