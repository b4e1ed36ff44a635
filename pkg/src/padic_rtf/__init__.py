"""p-adic harmonic analysis toolkit for rank-one relative trace formula transfer."""

__version__ = "0.1.0"
