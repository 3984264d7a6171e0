"""Topological risk portfolios: H0 persistence landscapes, optimizers and backtests."""

__version__ = "0.1.0"
