"""Linear differential systems over differential fields."""

__version__ = "0.1.0"
