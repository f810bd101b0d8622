"""Exact-arithmetic computations around graded vertex-operator models."""

__version__ = "0.1.0"
