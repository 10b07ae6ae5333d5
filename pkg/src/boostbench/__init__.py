"""Gradient boosting, regularized boosting and random forests from scratch,
plus a nested cross-validation benchmarking harness."""

__version__ = "0.1.0"
