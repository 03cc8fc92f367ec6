"""Bin packing games with proportional cost sharing: packers, equilibrium
checks, best-response dynamics, lower-bound families and weight functions."""

__version__ = "0.1.0"
