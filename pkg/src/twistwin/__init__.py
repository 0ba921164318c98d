"""Hyperplane absolute games against twisted non-recurrence targets."""

__version__ = "0.1.0"
