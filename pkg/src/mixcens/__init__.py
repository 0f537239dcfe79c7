"""Type I-Type II mixture censoring for Weibull lifetime data."""

__version__ = "0.1.0"
