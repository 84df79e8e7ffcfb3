"""Day-ahead demand-response scheduling for a small microgrid."""

__version__ = "0.1.0"
