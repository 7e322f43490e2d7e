"""Seed and option portfolios for randomized game-playing programs."""
__version__ = "0.1.0"
