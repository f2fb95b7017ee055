"""Exact decisions of spectral gap and ergodicity for affine actions on solenoids."""

__version__ = "0.1.0"
